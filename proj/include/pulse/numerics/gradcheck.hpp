#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pulse/numerics/tape.hpp"
#include "pulse/util/rng.hpp"

namespace pulse::num {

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  /// Denominator floor for the relative error, so coordinates whose true
  /// gradient is ~0 are judged on absolute error.
  double floor = 1e-6;
  /// Coordinates to probe; 0 means all of them.
  std::size_t probes = 0;
  std::uint64_t seed = 0;
  /// Parameter checks only: probe paths starting with this prefix.
  std::string prefix;
};

struct GradCheckReport {
  std::size_t probes = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = true;
};

/// Builds a scalar from a leaf holding the point.
using ScalarFn = std::function<Var(Tape&, Var)>;

/// Compares reverse-mode gradients at `point` (rows x cols) with central
/// differences, coordinate by coordinate.
GradCheckReport grad_check(const ScalarFn& fn, std::size_t rows, std::size_t cols,
                           const std::vector<double>& point, const GradCheckOptions& opts = {});

/// Same, but the probed coordinates are the scalars of `store`; `loss`
/// rebuilds the scalar on a fresh tape each call. Parameter values are
/// restored before returning.
GradCheckReport grad_check_params(ParameterStore& store, const std::function<Var(Tape&)>& loss,
                                  const GradCheckOptions& opts = {});

}  // namespace pulse::num
