#include "pulse/numerics/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pulse::num {

namespace {

void put_hex(std::ostream& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  if (ec != std::errc{}) throw FormatError("checkpoint: cannot format float");
  out.write(buf, end - buf);
}

double get_hex(const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  bool neg = false;
  if (first != last && *first == '-') neg = true, ++first;
  auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::hex);
  if (ec != std::errc{} || ptr != last) throw FormatError("checkpoint: bad float token '" + tok + "'");
  return neg ? -v : v;
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word)
    throw FormatError("checkpoint: expected '" + word + "' but found '" + got + "'");
}

}  // namespace

void Checkpoint::write(std::ostream& out) const {
  out << "pulse-checkpoint " << kCheckpointVersion << "\n";
  out << "float-width 64\n";
  out << "meta " << meta.dump() << "\n";
  out << "params " << params.size() << "\n";
  for (const auto& e : params) {
    out << e.path << ' ' << e.value.rank();
    for (auto d : e.value.shape()) out << ' ' << d;
    out << '\n';
    bool first = true;
    for (double v : e.value.data()) {
      if (!first) out << ' ';
      put_hex(out, v);
      first = false;
    }
    out << '\n';
  }
  out << "end\n";
}

Checkpoint Checkpoint::read(std::istream& in) {
  expect(in, "pulse-checkpoint");
  int version = 0;
  if (!(in >> version) || version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  expect(in, "float-width");
  int width = 0;
  if (!(in >> width) || width != 64) throw FormatError("checkpoint: unsupported float width");
  expect(in, "meta");
  std::string line;
  std::getline(in, line);
  Checkpoint ck;
  try {
    ck.meta = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad meta line: ") + e.what());
  }
  expect(in, "params");
  std::size_t count = 0;
  if (!(in >> count)) throw FormatError("checkpoint: missing parameter count");
  for (std::size_t i = 0; i < count; ++i) {
    std::string path;
    std::size_t rank = 0;
    if (!(in >> path >> rank)) throw FormatError("checkpoint: truncated parameter header");
    Shape shape(rank);
    for (auto& d : shape)
      if (!(in >> d)) throw FormatError("checkpoint: truncated shape for " + path);
    std::vector<double> data(numel(shape));
    std::string tok;
    for (auto& v : data) {
      if (!(in >> tok)) throw FormatError("checkpoint: truncated payload for " + path);
      v = get_hex(tok);
    }
    ck.params.add(path, Tensor(std::move(shape), std::move(data)));
  }
  expect(in, "end");
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write(out);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint not found: " + path.string());
  return read(in);
}

}  // namespace pulse::num
