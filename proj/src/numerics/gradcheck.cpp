#include "pulse/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pulse::num {

namespace {

std::vector<std::size_t> choose(std::size_t n, const GradCheckOptions& opts) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (opts.probes == 0 || opts.probes >= n) return idx;
  Rng rng(derive_seed(opts.seed, {0x67636b}));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(opts.probes);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void record(GradCheckReport& r, std::size_t index, double analytic, double numeric,
            const GradCheckOptions& opts) {
  const double abs_err = std::abs(analytic - numeric);
  const double rel = abs_err / std::max({std::abs(analytic), std::abs(numeric), opts.floor});
  ++r.probes;
  r.max_abs_error = std::max(r.max_abs_error, abs_err);
  if (rel > r.max_rel_error || !std::isfinite(rel)) {
    r.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
    r.worst_index = index;
    r.worst_analytic = analytic;
    r.worst_numeric = numeric;
  }
  if (!(rel < opts.tolerance)) r.passed = false;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& fn, std::size_t rows, std::size_t cols,
                           const std::vector<double>& point, const GradCheckOptions& opts) {
  if (point.size() != rows * cols) throw ShapeError("grad_check: point size mismatch");
  std::vector<double> analytic;
  {
    Tape tape;
    Var x = tape.variable(rows, cols, point);
    Var y = fn(tape, x);
    if (y.size() != 1) throw ShapeError("grad_check: function must return a scalar");
    tape.backward(y);
    auto g = tape.grad(x.id);
    analytic.assign(g.begin(), g.end());
  }
  auto eval = [&](const std::vector<double>& p) {
    Tape tape;
    return fn(tape, tape.constant(rows, cols, p)).item();
  };
  GradCheckReport report;
  std::vector<double> p = point;
  for (std::size_t i : choose(point.size(), opts)) {
    p[i] = point[i] + opts.step;
    const double up = eval(p);
    p[i] = point[i] - opts.step;
    const double down = eval(p);
    p[i] = point[i];
    record(report, i, analytic[i], (up - down) / (2.0 * opts.step), opts);
  }
  return report;
}

GradCheckReport grad_check_params(ParameterStore& store, const std::function<Var(Tape&)>& loss,
                                  const GradCheckOptions& opts) {
  GradientBuffer grads(store);
  {
    Tape tape;
    Var y = loss(tape);
    if (y.size() != 1) throw ShapeError("grad_check: loss must be a scalar");
    tape.backward(y);
    tape.accumulate_into(grads, store);
  }
  // Flatten (parameter, offset) coordinates.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!store.path(i).starts_with(opts.prefix)) continue;
    for (std::size_t k = 0; k < store.at(i).size(); ++k) coords.emplace_back(i, k);
  }
  if (coords.empty()) throw std::invalid_argument("grad_check: no parameters match '" + opts.prefix + "'");
  auto eval = [&] {
    Tape tape;
    return loss(tape).item();
  };
  GradCheckReport report;
  for (std::size_t c : choose(coords.size(), opts)) {
    auto [pi, k] = coords[c];
    double& w = store.at(pi)[k];
    const double orig = w;
    w = orig + opts.step;
    const double up = eval();
    w = orig - opts.step;
    const double down = eval();
    w = orig;
    record(report, c, grads[pi][k], (up - down) / (2.0 * opts.step), opts);
  }
  return report;
}

}  // namespace pulse::num
