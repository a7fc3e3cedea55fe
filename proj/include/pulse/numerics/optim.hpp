#pragma once

#include <stdexcept>
#include <vector>

#include "pulse/numerics/parameter_store.hpp"

namespace pulse::num {

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RmsPropConfig {
  double learning_rate = 0.01;
  double decay = 0.99;
  double epsilon = 1e-8;
  double clip = 2.0;  // global l2 norm; <= 0 disables
};

/// Scales `grads` in place so their global norm is at most `threshold`.
/// Returns the norm before clipping.
double clip_global_norm(GradientBuffer& grads, double threshold);

/// RMSProp with global-norm clipping:
///   v <- decay * v + (1 - decay) * g^2
///   w <- w - lr * g / (sqrt(v) + eps)
class RmsProp {
 public:
  RmsProp(const ParameterStore& store, RmsPropConfig config);

  /// Clips `grads` in place, then updates `store`. Returns the pre-clip norm.
  /// Throws NonFiniteError naming the first offending parameter.
  double step(ParameterStore& store, GradientBuffer& grads);

  const RmsPropConfig& config() const { return config_; }
  const std::vector<std::vector<double>>& accumulators() const { return accum_; }
  std::size_t steps() const { return steps_; }

 private:
  RmsPropConfig config_;
  std::vector<std::vector<double>> accum_;
  std::size_t steps_ = 0;
};

}  // namespace pulse::num
