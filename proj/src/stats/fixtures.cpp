#include "pulse/stats/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pulse::stats {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, '\t')) out.push_back(cell);
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

double number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument(where + ": not a number '" + s + "'");
  return v;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path.string());
  return in;
}

}  // namespace

PerSportFixture load_per_sport(const std::filesystem::path& path) {
  auto in = open(path);
  PerSportFixture fx;
  std::vector<std::string> header;
  struct Pending {
    std::string block, metric, better, worse;
  };
  std::vector<Pending> orders;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      const auto body = strip(line.substr(1));
      if (body.rfind("source:", 0) == 0) fx.source = strip(body.substr(7));
      if (body.rfind("order:", 0) == 0) {
        auto cells = split_tabs(strip(body.substr(6)));
        const auto lt = cells.size() == 3 ? cells[2].find('<') : std::string::npos;
        if (lt == std::string::npos) throw std::invalid_argument(where + ": malformed order line");
        orders.push_back({cells[0], cells[1], cells[2].substr(0, lt), cells[2].substr(lt + 1)});
      }
      continue;
    }
    auto cells = split_tabs(line);
    if (header.empty()) {
      if (cells.size() < 5 || cells[0] != "sport" || cells[2] != "metric")
        throw std::invalid_argument(where + ": expected header 'sport n metric <models>'");
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) throw std::invalid_argument(where + ": wrong cell count");
    auto& table = fx.metrics[cells[2]];
    if (table.models.empty()) table.models.assign(header.begin() + 3, header.end());
    table.blocks.push_back(cells[0]);
    std::vector<double> row;
    for (std::size_t c = 3; c < cells.size(); ++c) row.push_back(number(cells[c], where));
    table.values.push_back(std::move(row));
  }
  if (header.empty()) throw std::invalid_argument(path.string() + ": no header row");
  for (const auto& o : orders) {
    auto it = fx.metrics.find(o.metric);
    if (it == fx.metrics.end()) throw std::invalid_argument(path.string() + ": order names unknown metric " + o.metric);
    auto& t = it->second;
    auto b = std::find(t.blocks.begin(), t.blocks.end(), o.block);
    if (b == t.blocks.end()) throw std::invalid_argument(path.string() + ": order names unknown sport " + o.block);
    t.orders.push_back({static_cast<std::size_t>(b - t.blocks.begin()), t.model(o.better), t.model(o.worse)});
  }
  return fx;
}

const OverallEntry& OverallFixture::at(const std::string& model, const std::string& dataset,
                                       const std::string& metric) const {
  for (const auto& e : entries)
    if (e.model == model && e.dataset == dataset && e.metric == metric) return e;
  throw std::out_of_range("overall fixture: no entry " + model + "/" + dataset + "/" + metric);
}

std::vector<std::string> OverallFixture::models() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (std::find(out.begin(), out.end(), e.model) == out.end()) out.push_back(e.model);
  return out;
}

OverallFixture load_overall(const std::filesystem::path& path) {
  auto in = open(path);
  OverallFixture fx;
  bool header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      const auto body = strip(line.substr(1));
      if (body.rfind("source:", 0) == 0) fx.source = strip(body.substr(7));
      continue;
    }
    auto cells = split_tabs(line);
    if (!header) {
      if (cells != std::vector<std::string>{"model", "dataset", "metric", "mean", "std"})
        throw std::invalid_argument(where + ": expected header 'model dataset metric mean std'");
      header = true;
      continue;
    }
    if (cells.size() != 5) throw std::invalid_argument(where + ": wrong cell count");
    fx.entries.push_back({cells[0], cells[1], cells[2], number(cells[3], where), number(cells[4], where)});
  }
  if (!header) throw std::invalid_argument(path.string() + ": no header row");
  return fx;
}

}  // namespace pulse::stats
