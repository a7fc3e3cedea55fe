#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include <json.hpp>

#include "pulse/numerics/parameter_store.hpp"

namespace pulse::num {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

/// Parameters plus free-form metadata (config, vocabularies, normalisation).
///
/// Text layout:
///   pulse-checkpoint <version>
///   float-width 64
///   meta <one-line json>
///   params <count>
///   <path> <rank> <extents...>
///   <hex floats separated by spaces>
///   ...
///   end
/// Floats are written in hexadecimal so the round trip is bit-exact.
struct Checkpoint {
  ParameterStore params;
  nlohmann::json meta = nlohmann::json::object();

  void write(std::ostream& out) const;
  static Checkpoint read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace pulse::num
