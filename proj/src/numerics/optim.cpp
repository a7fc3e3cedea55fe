#include "pulse/numerics/optim.hpp"

#include <cmath>

namespace pulse::num {

double clip_global_norm(GradientBuffer& grads, double threshold) {
  const double norm = grads.global_norm();
  if (threshold > 0.0 && norm > threshold) grads.scale(threshold / norm);
  return norm;
}

RmsProp::RmsProp(const ParameterStore& store, RmsPropConfig config) : config_(config) {
  if (!(config.learning_rate > 0.0) || !(config.decay >= 0.0 && config.decay < 1.0) ||
      !(config.epsilon > 0.0))
    throw std::invalid_argument("rmsprop: invalid hyperparameters");
  accum_.reserve(store.size());
  for (const auto& e : store) accum_.emplace_back(e.value.size(), 0.0);
}

double RmsProp::step(ParameterStore& store, GradientBuffer& grads) {
  if (grads.size() != store.size() || accum_.size() != store.size())
    throw std::invalid_argument("rmsprop: gradients not aligned with parameters");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != store.at(i).size())
      throw std::invalid_argument("rmsprop: gradient size mismatch at " + store.path(i));
    for (double g : grads[i])
      if (!std::isfinite(g)) throw NonFiniteError("non-finite gradient for parameter " + store.path(i));
  }
  const double norm = clip_global_norm(grads, config_.clip);
  const double lr = config_.learning_rate, rho = config_.decay, eps = config_.epsilon;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto w = store.at(i).data();
    auto g = grads[i];
    auto& v = accum_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      v[k] = rho * v[k] + (1.0 - rho) * g[k] * g[k];
      w[k] -= lr * g[k] / (std::sqrt(v[k]) + eps);
    }
  }
  ++steps_;
  return norm;
}

}  // namespace pulse::num
