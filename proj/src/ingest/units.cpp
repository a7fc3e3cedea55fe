#include "pulse/ingest/units.hpp"

#include <map>
#include <utility>

namespace pulse::ingest {

namespace {

using Table = std::map<std::pair<std::string, std::string>, Conversion>;

const Table& table() {
  static const Table t = [] {
    Table t;
    auto both = [&t](const std::string& a, const std::string& b, double factor, double offset = 0.0) {
      t[{a, b}] = {factor, offset};
      t[{b, a}] = {1.0 / factor, -offset / factor};
    };
    both("mph", "m/s", 0.44704);
    both("km/h", "m/s", 1000.0 / 3600.0);
    both("mi", "m", 1609.344);
    both("km", "m", 1000.0);
    both("ft", "m", 0.3048);
    both("mm", "m", 0.001);
    both("cm", "m", 0.01);
    both("degF", "degC", 5.0 / 9.0, -32.0 * 5.0 / 9.0);
    both("kcal", "kJ", 4.184);
    both("J", "kJ", 0.001);
    both("N/m", "kN/m", 0.001);
    both("min/km", "s/km", 60.0);
    // Exact inverse definitions so composition round-trips as closely as possible.
    t[{"m/s", "mph"}] = {1.0 / 0.44704, 0.0};
    t[{"degC", "degF"}] = {9.0 / 5.0, 32.0};
    return t;
  }();
  return t;
}

}  // namespace

Conversion conversion(const std::string& from, const std::string& to) {
  if (from == to) return {};
  auto it = table().find({from, to});
  if (it != table().end()) return it->second;
  std::string msg = "no unit conversion from '" + from + "' to '" + to + "'; known:";
  for (const auto& k : known_conversions()) msg += " " + k;
  throw UnitError(msg);
}

double convert_units(double value, const std::string& from, const std::string& to) {
  return conversion(from, to).apply(value);
}

std::vector<std::string> known_conversions() {
  std::vector<std::string> out;
  for (const auto& [k, v] : table()) out.push_back(k.first + "->" + k.second);
  return out;
}

}  // namespace pulse::ingest
