#include "pulse/numerics/ops.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace pulse::num {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

CMap cmap(std::span<const double> s, std::size_t r, std::size_t c) {
  return CMap(s.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
MMap mmap(std::span<double> s, std::size_t r, std::size_t c) {
  return MMap(s.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

template <class Fwd, class Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  auto x = a.value();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const auto ia = a.id;
  return a.tape->emit(a.rows(), a.cols(), std::move(y), {a},
                      [ia, deriv](Tape& t, std::uint32_t self) {
                        auto g = t.grad_value(self);
                        auto xv = t.value(ia);
                        auto yv = t.value(self);
                        auto ga = t.grad(ia);
                        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(xv[i], yv[i]);
                      });
}

}  // namespace

Var add(Var a, Var b) {
  const bool broadcast = b.rows() == 1 && a.rows() != 1 && b.cols() == a.cols();
  if (!broadcast) require_same_shape(a, b, "add");
  auto av = a.value();
  auto bv = b.value();
  const std::size_t cols = a.cols();
  std::vector<double> y(av.begin(), av.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[broadcast ? i % cols : i];
  const auto ia = a.id, ib = b.id;
  return a.tape->emit(a.rows(), cols, std::move(y), {a, b},
                      [ia, ib, broadcast, cols](Tape& t, std::uint32_t self) {
                        auto g = t.grad_value(self);
                        if (auto ga = t.grad_if(ia); !ga.empty())
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                        if (auto gb = t.grad_if(ib); !gb.empty())
                          for (std::size_t i = 0; i < g.size(); ++i) gb[broadcast ? i % cols : i] += g[i];
                      });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
  const auto ia = a.id, ib = b.id;
  return a.tape->emit(a.rows(), a.cols(), std::move(y), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    auto g = t.grad_value(self);
    if (auto ga = t.grad_if(ia); !ga.empty())
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (auto gb = t.grad_if(ib); !gb.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const auto ia = a.id, ib = b.id;
  return a.tape->emit(a.rows(), a.cols(), std::move(y), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    auto g = t.grad_value(self);
    auto av = t.value(ia);
    auto bv = t.value(ib);
    if (auto ga = t.grad_if(ia); !ga.empty())
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    if (auto gb = t.grad_if(ib); !gb.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var scale(Var a, double factor) {
  return unary(a, [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
               [](double, double y) { return y * (1.0 - y); });
}

Var gelu(Var a) {
  constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [inv_sqrt_2pi](double x, double) {
        return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> y(m * n);
  mmap(y, m, n).noalias() = cmap(a.value(), m, k) * cmap(b.value(), k, n);
  const auto ia = a.id, ib = b.id;
  return a.tape->emit(m, n, std::move(y), {a, b}, [ia, ib, m, k, n](Tape& t, std::uint32_t self) {
    auto g = cmap(t.grad_value(self), m, n);
    if (auto ga = t.grad_if(ia); !ga.empty())
      mmap(ga, m, k).noalias() += g * cmap(t.value(ib), k, n).transpose();
    if (auto gb = t.grad_if(ib); !gb.empty())
      mmap(gb, k, n).noalias() += cmap(t.value(ia), m, k).transpose() * g;
  });
}

Var matmul_nt(Var a, Var b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  std::vector<double> y(m * n);
  mmap(y, m, n).noalias() = cmap(a.value(), m, k) * cmap(b.value(), n, k).transpose();
  const auto ia = a.id, ib = b.id;
  return a.tape->emit(m, n, std::move(y), {a, b}, [ia, ib, m, k, n](Tape& t, std::uint32_t self) {
    auto g = cmap(t.grad_value(self), m, n);
    if (auto ga = t.grad_if(ia); !ga.empty())
      mmap(ga, m, k).noalias() += g * cmap(t.value(ib), n, k);
    if (auto gb = t.grad_if(ib); !gb.empty())
      mmap(gb, n, k).noalias() += g.transpose() * cmap(t.value(ia), m, k);
  });
}

Var affine(Var x, Var w, Var b) {
  const std::size_t n = x.rows(), in = x.cols(), out = w.rows();
  if (w.cols() != in) {
    throw ShapeError("affine: input width " + std::to_string(in) + " vs weight " +
                     std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  const bool has_bias = b.valid();
  if (has_bias && (b.rows() != 1 || b.cols() != out)) throw ShapeError("affine: bias shape");
  std::vector<double> y(n * out);
  auto ym = mmap(y, n, out);
  ym.noalias() = cmap(x.value(), n, in) * cmap(w.value(), out, in).transpose();
  if (has_bias) ym.rowwise() += cmap(b.value(), 1, out).row(0);
  const auto ix = x.id, iw = w.id;
  const auto ib = has_bias ? b.id : 0u;
  auto backward = [ix, iw, ib, has_bias, n, in, out](Tape& t, std::uint32_t self) {
    auto g = cmap(t.grad_value(self), n, out);
    if (auto gx = t.grad_if(ix); !gx.empty())
      mmap(gx, n, in).noalias() += g * cmap(t.value(iw), out, in);
    if (auto gw = t.grad_if(iw); !gw.empty())
      mmap(gw, out, in).noalias() += g.transpose() * cmap(t.value(ix), n, in);
    if (has_bias) {
      if (auto gb = t.grad_if(ib); !gb.empty()) mmap(gb, 1, out) += g.colwise().sum();
    }
  };
  if (has_bias) return x.tape->emit(n, out, std::move(y), {x, w, b}, std::move(backward));
  return x.tape->emit(n, out, std::move(y), {x, w}, std::move(backward));
}

namespace {

Var concat_cols_impl(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape* tape = parts[0].tape;
  std::size_t rows = 1, cols = 0;
  for (const Var& p : parts) rows = std::max(rows, p.rows());
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> widths;
  std::vector<bool> bcast;
  for (const Var& p : parts) {
    if (p.rows() != rows && p.rows() != 1) throw ShapeError("concat_cols: row count mismatch");
    ids.push_back(p.id);
    widths.push_back(p.cols());
    bcast.push_back(p.rows() != rows);
    cols += p.cols();
  }
  std::vector<double> y(rows * cols);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* src = v.data() + (bcast[k] ? 0 : r * widths[k]);
      std::copy(src, src + widths[k], y.data() + r * cols + off);
    }
    off += widths[k];
  }
  // emit() only uses the input list to decide whether a gradient is needed.
  Var dep = parts[0];
  for (const Var& p : parts)
    if (p.requires_grad()) dep = p;
  return tape->emit(rows, cols, std::move(y), {dep},
                    [ids, widths, bcast, rows, cols](Tape& t, std::uint32_t self) {
                      auto g = t.grad_value(self);
                      std::size_t off = 0;
                      for (std::size_t k = 0; k < ids.size(); ++k) {
                        auto gk = t.grad_if(ids[k]);
                        if (!gk.empty()) {
                          for (std::size_t r = 0; r < rows; ++r) {
                            const double* src = g.data() + r * cols + off;
                            double* dst = gk.data() + (bcast[k] ? 0 : r * widths[k]);
                            for (std::size_t c = 0; c < widths[k]; ++c) dst[c] += src[c];
                          }
                        }
                        off += widths[k];
                      }
                    });
}

}  // namespace

Var concat_cols(std::span<const Var> parts) { return concat_cols_impl(parts); }
Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols_impl(std::span<const Var>(parts.begin(), parts.size()));
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> heights;
  std::vector<double> y;
  Var dep = parts[0];
  for (const Var& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column count mismatch");
    auto v = p.value();
    y.insert(y.end(), v.begin(), v.end());
    ids.push_back(p.id);
    heights.push_back(p.rows());
    if (p.requires_grad()) dep = p;
  }
  const std::size_t rows = y.size() / cols;
  return parts[0].tape->emit(rows, cols, std::move(y), {dep},
                             [ids, heights, cols](Tape& t, std::uint32_t self) {
                               auto g = t.grad_value(self);
                               std::size_t off = 0;
                               for (std::size_t k = 0; k < ids.size(); ++k) {
                                 const std::size_t n = heights[k] * cols;
                                 if (auto gk = t.grad_if(ids[k]); !gk.empty())
                                   for (std::size_t i = 0; i < n; ++i) gk[i] += g[off + i];
                                 off += n;
                               }
                             });
}

Var slice_cols(Var a, std::size_t start, std::size_t len) {
  const std::size_t rows = a.rows(), cols = a.cols();
  if (start + len > cols) throw ShapeError("slice_cols: out of range");
  auto v = a.value();
  std::vector<double> y(rows * len);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(v.data() + r * cols + start, len, y.data() + r * len);
  const auto ia = a.id;
  return a.tape->emit(rows, len, std::move(y), {a}, [ia, rows, cols, start, len](Tape& t, std::uint32_t self) {
    auto g = t.grad_value(self);
    auto ga = t.grad(ia);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < len; ++c) ga[r * cols + start + c] += g[r * len + c];
  });
}

Var slice_rows(Var a, std::size_t start, std::size_t len) {
  const std::size_t cols = a.cols();
  if (start + len > a.rows()) throw ShapeError("slice_rows: out of range");
  auto v = a.value();
  std::vector<double> y(v.begin() + start * cols, v.begin() + (start + len) * cols);
  const auto ia = a.id;
  return a.tape->emit(len, cols, std::move(y), {a}, [ia, cols, start](Tape& t, std::uint32_t self) {
    auto g = t.grad_value(self);
    auto ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[start * cols + i] += g[i];
  });
}

Var row(Var a, std::size_t r) { return slice_rows(a, r, 1); }

Var avg_pool_rows(Var a, std::size_t factor) {
  if (factor == 0) throw ShapeError("avg_pool_rows: factor must be positive");
  if (factor == 1) return a;
  const std::size_t cols = a.cols(), out_rows = a.rows() / factor;
  if (out_rows == 0) throw ShapeError("avg_pool_rows: fewer rows than pooling factor");
  auto v = a.value();
  std::vector<double> y(out_rows * cols, 0.0);
  const double inv = 1.0 / static_cast<double>(factor);
  for (std::size_t r = 0; r < out_rows * factor; ++r)
    for (std::size_t c = 0; c < cols; ++c) y[(r / factor) * cols + c] += inv * v[r * cols + c];
  const auto ia = a.id;
  return a.tape->emit(out_rows, cols, std::move(y), {a},
                      [ia, cols, out_rows, factor, inv](Tape& t, std::uint32_t self) {
                        auto g = t.grad_value(self);
                        auto ga = t.grad(ia);
                        for (std::size_t r = 0; r < out_rows * factor; ++r)
                          for (std::size_t c = 0; c < cols; ++c)
                            ga[r * cols + c] += inv * g[(r / factor) * cols + c];
                      });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value()) s += v;
  const auto ia = a.id;
  return a.tape->emit(1, 1, {s}, {a}, [ia](Tape& t, std::uint32_t self) {
    const double g = t.grad_value(self)[0];
    for (double& x : t.grad(ia)) x += g;
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Var masked_softmax(Var scores, const std::vector<bool>& mask) {
  const std::size_t rows = scores.rows(), cols = scores.cols();
  if (mask.size() != cols) throw ShapeError("masked_softmax: mask length differs from width");
  bool any = false;
  for (bool m : mask) any = any || m;
  if (!any) throw std::invalid_argument("masked_softmax: every position is masked");
  auto s = scores.value();
  std::vector<double> y(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c)
      if (mask[c]) mx = std::max(mx, s[r * cols + c]);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c)
      if (mask[c]) z += (y[r * cols + c] = std::exp(s[r * cols + c] - mx));
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] /= z;
  }
  const auto is = scores.id;
  return scores.tape->emit(rows, cols, std::move(y), {scores}, [is, rows, cols](Tape& t, std::uint32_t self) {
    auto g = t.grad_value(self);
    auto p = t.value(self);
    auto gs = t.grad(is);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * p[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c)
        gs[r * cols + c] += p[r * cols + c] * (g[r * cols + c] - dot);
    }
  });
}

Var l2_normalize_rows(Var a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  auto v = a.value();
  std::vector<double> y(v.begin(), v.end());
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sq += v[r * cols + c] * v[r * cols + c];
    norms[r] = std::sqrt(sq);
    if (norms[r] == 0.0) throw std::domain_error("l2_normalize_rows: zero-norm row");
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] /= norms[r];
  }
  const auto ia = a.id;
  return a.tape->emit(rows, cols, std::move(y), {a}, [ia, rows, cols, norms](Tape& t, std::uint32_t self) {
    auto g = t.grad_value(self);
    auto u = t.value(self);
    auto ga = t.grad(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * u[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c)
        ga[r * cols + c] += (g[r * cols + c] - u[r * cols + c] * dot) / norms[r];
    }
  });
}

Var dropout(Var a, double rate, Rng& rng, bool training) {
  if (!training || rate <= 0.0) return a;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> keep(a.size());
  std::bernoulli_distribution drop(rate);
  for (double& k : keep) k = drop(rng) ? 0.0 : keep_scale;
  auto v = a.value();
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = v[i] * keep[i];
  const auto ia = a.id;
  return a.tape->emit(a.rows(), a.cols(), std::move(y), {a}, [ia, keep](Tape& t, std::uint32_t self) {
    auto g = t.grad_value(self);
    auto ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * keep[i];
  });
}

Var mse(Var pred, Var target) {
  require_same_shape(pred, target, "mse");
  auto p = pred.value();
  auto y = target.value();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
  const double n = static_cast<double>(p.size());
  const auto ip = pred.id, iy = target.id;
  return pred.tape->emit(1, 1, {s / n}, {pred, target}, [ip, iy, n](Tape& t, std::uint32_t self) {
    const double g = t.grad_value(self)[0];
    auto p = t.value(ip);
    auto y = t.value(iy);
    if (auto gp = t.grad_if(ip); !gp.empty())
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += 2.0 * g * (p[i] - y[i]) / n;
    if (auto gy = t.grad_if(iy); !gy.empty())
      for (std::size_t i = 0; i < gy.size(); ++i) gy[i] -= 2.0 * g * (p[i] - y[i]) / n;
  });
}

}  // namespace pulse::num
