#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pulse::ingest {

class UnitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// canonical = factor * raw + offset
struct Conversion {
  double factor = 1.0;
  double offset = 0.0;
  double apply(double v) const { return factor * v + offset; }
};

/// Looks up a registered conversion; identical units convert by identity.
/// Throws UnitError listing the known pairs otherwise.
Conversion conversion(const std::string& from, const std::string& to);

double convert_units(double value, const std::string& from, const std::string& to);

/// "from->to" for every registered pair.
std::vector<std::string> known_conversions();

}  // namespace pulse::ingest
