#include "pulse/numerics/kernels.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace pulse::num {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;
using CVec = Eigen::Map<const Eigen::VectorXd>;
using MVec = Eigen::Map<Eigen::VectorXd>;

inline double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

CMap cmap(std::span<const double> s, std::size_t r, std::size_t c) {
  return CMap(s.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
MMap mmap(std::span<double> s, std::size_t r, std::size_t c) {
  return MMap(s.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

void check_lstm(const LstmWeights& w, std::size_t in) {
  const std::size_t h = w.wh.cols();
  if (w.wh.rows() != 4 * h || w.wx.rows() != 4 * h || w.b.size() != 4 * h)
    throw ShapeError("lstm: weight shapes inconsistent with hidden size");
  if (w.wx.cols() != in)
    throw ShapeError("lstm: input width " + std::to_string(in) + " but weights expect " +
                     std::to_string(w.wx.cols()));
}

// One fused step from pre-projected input xp (1 x 4H). Output row is [h' | c'].
Var lstm_step(Var xp, Var h, Var c, Var wh) {
  const std::size_t H = wh.cols();
  if (h.size() != H || c.size() != H) throw ShapeError("lstm_cell: state size mismatch");
  std::vector<double> a(xp.value().begin(), xp.value().end());
  MVec(a.data(), 4 * H).noalias() += cmap(wh.value(), 4 * H, H) * CVec(h.value().data(), H);
  std::vector<double> gates(4 * H);
  std::vector<double> out(2 * H);
  auto cv = c.value();
  for (std::size_t k = 0; k < H; ++k) {
    const double i = sigm(a[k]), f = sigm(a[H + k]), g = std::tanh(a[2 * H + k]), o = sigm(a[3 * H + k]);
    gates[k] = i, gates[H + k] = f, gates[2 * H + k] = g, gates[3 * H + k] = o;
    const double cn = f * cv[k] + i * g;
    out[H + k] = cn;
    out[k] = o * std::tanh(cn);
  }
  const auto ixp = xp.id, ih = h.id, ic = c.id, iwh = wh.id;
  return xp.tape->emit(1, 2 * H, std::move(out), {xp, h, c, wh},
                       [ixp, ih, ic, iwh, H, gates](Tape& t, std::uint32_t self) {
                         auto g = t.grad_value(self);
                         auto y = t.value(self);
                         auto cprev = t.value(ic);
                         std::vector<double> da(4 * H);
                         std::vector<double> dcprev(H);
                         for (std::size_t k = 0; k < H; ++k) {
                           const double i = gates[k], f = gates[H + k], gg = gates[2 * H + k],
                                        o = gates[3 * H + k];
                           const double tc = std::tanh(y[H + k]);
                           const double dh = g[k];
                           const double dc = dh * o * (1.0 - tc * tc) + g[H + k];
                           da[k] = dc * gg * i * (1.0 - i);
                           da[H + k] = dc * cprev[k] * f * (1.0 - f);
                           da[2 * H + k] = dc * i * (1.0 - gg * gg);
                           da[3 * H + k] = dh * tc * o * (1.0 - o);
                           dcprev[k] = dc * f;
                         }
                         if (auto gx = t.grad_if(ixp); !gx.empty())
                           for (std::size_t k = 0; k < 4 * H; ++k) gx[k] += da[k];
                         if (auto gc = t.grad_if(ic); !gc.empty())
                           for (std::size_t k = 0; k < H; ++k) gc[k] += dcprev[k];
                         if (auto gw = t.grad_if(iwh); !gw.empty())
                           mmap(gw, 4 * H, H).noalias() +=
                               CVec(da.data(), 4 * H) * CVec(t.value(ih).data(), H).transpose();
                         if (auto gh = t.grad_if(ih); !gh.empty())
                           MVec(gh.data(), H).noalias() +=
                               cmap(t.value(iwh), 4 * H, H).transpose() * CVec(da.data(), 4 * H);
                       });
}

// Full recurrence over pre-projected inputs xp (T x 4H) from a zero state.
Var lstm_recurrence(Var xp, Var wh, bool reverse) {
  const std::size_t T = xp.rows(), H = wh.cols();
  auto xv = xp.value();
  auto whm = cmap(wh.value(), 4 * H, H);
  std::vector<double> hs(T * H), cs(T * H), tcs(T * H), gates(T * 4 * H);
  std::vector<double> a(4 * H), hprev(H, 0.0), cprev(H, 0.0);
  for (std::size_t s = 0; s < T; ++s) {
    const std::size_t t = reverse ? T - 1 - s : s;
    std::copy_n(xv.data() + t * 4 * H, 4 * H, a.data());
    MVec(a.data(), 4 * H).noalias() += whm * CVec(hprev.data(), H);
    double* gt = gates.data() + t * 4 * H;
    for (std::size_t k = 0; k < H; ++k) {
      const double i = sigm(a[k]), f = sigm(a[H + k]), g = std::tanh(a[2 * H + k]), o = sigm(a[3 * H + k]);
      gt[k] = i, gt[H + k] = f, gt[2 * H + k] = g, gt[3 * H + k] = o;
      const double cn = f * cprev[k] + i * g;
      const double tc = std::tanh(cn);
      cs[t * H + k] = cn;
      tcs[t * H + k] = tc;
      hs[t * H + k] = o * tc;
    }
    std::copy_n(hs.data() + t * H, H, hprev.data());
    std::copy_n(cs.data() + t * H, H, cprev.data());
  }
  const auto ixp = xp.id, iwh = wh.id;
  return xp.tape->emit(
      T, H, std::move(hs), {xp, wh},
      [ixp, iwh, T, H, reverse, cs = std::move(cs), tcs = std::move(tcs), gates = std::move(gates)](Tape& t, std::uint32_t self) {
        auto gout = t.grad_value(self);
        auto hsv = t.value(self);
        auto whm = cmap(t.value(iwh), 4 * H, H);
        std::vector<double> dA(T * 4 * H), hprev_all(T * H, 0.0);
        std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dh(H);
        for (std::size_t s = T; s-- > 0;) {
          const std::size_t tt = reverse ? T - 1 - s : s;
          const bool first = s == 0;
          const std::size_t tp = reverse ? tt + 1 : tt - 1;  // previous processed step
          const double* gt = gates.data() + tt * 4 * H;
          double* da = dA.data() + tt * 4 * H;
          for (std::size_t k = 0; k < H; ++k) {
            const double i = gt[k], f = gt[H + k], g = gt[2 * H + k], o = gt[3 * H + k];
            const double tc = tcs[tt * H + k];
            const double dhk = gout[tt * H + k] + dh_next[k];
            const double dc = dhk * o * (1.0 - tc * tc) + dc_next[k];
            const double cprev = first ? 0.0 : cs[tp * H + k];
            da[k] = dc * g * i * (1.0 - i);
            da[H + k] = dc * cprev * f * (1.0 - f);
            da[2 * H + k] = dc * i * (1.0 - g * g);
            da[3 * H + k] = dhk * tc * o * (1.0 - o);
            dc_next[k] = dc * f;
            if (!first) hprev_all[tt * H + k] = hsv[tp * H + k];
          }
          MVec(dh_next.data(), H).noalias() = whm.transpose() * CVec(da, 4 * H);
        }
        if (auto gx = t.grad_if(ixp); !gx.empty())
          for (std::size_t k = 0; k < dA.size(); ++k) gx[k] += dA[k];
        if (auto gw = t.grad_if(iwh); !gw.empty())
          mmap(gw, 4 * H, H).noalias() += cmap(dA, T, 4 * H).transpose() * cmap(hprev_all, T, H);
      });
}

}  // namespace

LstmState lstm_cell(Var x, Var h, Var c, const LstmWeights& w) {
  check_lstm(w, x.cols());
  const std::size_t H = w.hidden();
  Var hc = lstm_step(affine(x, w.wx, w.b), h, c, w.wh);
  return {slice_cols(hc, 0, H), slice_cols(hc, H, H)};
}

Var lstm_sequence(Var xs, const LstmWeights& w, bool reverse) {
  check_lstm(w, xs.cols());
  if (xs.rows() == 0) throw ShapeError("lstm_sequence: empty sequence");
  return lstm_recurrence(affine(xs, w.wx, w.b), w.wh, reverse);
}

Var bilstm_sequence(Var xs, const LstmWeights& fwd, const LstmWeights& bwd) {
  return concat_cols({lstm_sequence(xs, fwd, false), lstm_sequence(xs, bwd, true)});
}

Var bilstm_final(Var states, std::size_t hidden) {
  const std::size_t T = states.rows();
  return concat_cols({slice_cols(row(states, T - 1), 0, hidden), slice_cols(row(states, 0), hidden, hidden)});
}

namespace {

Var gru_step(Var xp, Var h, Var wh, Var bh) {
  const std::size_t H = wh.cols();
  if (h.size() != H) throw ShapeError("gru_cell: state size mismatch");
  std::vector<double> hp(bh.value().begin(), bh.value().end());
  MVec(hp.data(), 3 * H).noalias() += cmap(wh.value(), 3 * H, H) * CVec(h.value().data(), H);
  auto xv = xp.value();
  auto hv = h.value();
  std::vector<double> acts(3 * H);  // r, z, n
  std::vector<double> out(H);
  for (std::size_t k = 0; k < H; ++k) {
    const double r = sigm(xv[k] + hp[k]);
    const double z = sigm(xv[H + k] + hp[H + k]);
    const double n = std::tanh(xv[2 * H + k] + r * hp[2 * H + k]);
    acts[k] = r, acts[H + k] = z, acts[2 * H + k] = n;
    out[k] = (1.0 - z) * n + z * hv[k];
  }
  const auto ixp = xp.id, ih = h.id, iwh = wh.id, ibh = bh.id;
  return xp.tape->emit(1, H, std::move(out), {xp, h, wh, bh},
                       [ixp, ih, iwh, ibh, H, acts, hp](Tape& t, std::uint32_t self) {
                         auto g = t.grad_value(self);
                         auto hv = t.value(ih);
                         std::vector<double> dxp(3 * H), dhp(3 * H), dh(H);
                         for (std::size_t k = 0; k < H; ++k) {
                           const double r = acts[k], z = acts[H + k], n = acts[2 * H + k];
                           const double dz = g[k] * (hv[k] - n);
                           const double dn = g[k] * (1.0 - z);
                           dh[k] = g[k] * z;
                           const double dan = dn * (1.0 - n * n);
                           const double dr = dan * hp[2 * H + k];
                           const double dar = dr * r * (1.0 - r);
                           const double daz = dz * z * (1.0 - z);
                           dxp[k] = dar, dxp[H + k] = daz, dxp[2 * H + k] = dan;
                           dhp[k] = dar, dhp[H + k] = daz, dhp[2 * H + k] = dan * r;
                         }
                         if (auto gx = t.grad_if(ixp); !gx.empty())
                           for (std::size_t k = 0; k < 3 * H; ++k) gx[k] += dxp[k];
                         if (auto gb = t.grad_if(ibh); !gb.empty())
                           for (std::size_t k = 0; k < 3 * H; ++k) gb[k] += dhp[k];
                         if (auto gw = t.grad_if(iwh); !gw.empty())
                           mmap(gw, 3 * H, H).noalias() +=
                               CVec(dhp.data(), 3 * H) * CVec(hv.data(), H).transpose();
                         if (auto ghh = t.grad_if(ih); !ghh.empty()) {
                           MVec(dh.data(), H).noalias() +=
                               cmap(t.value(iwh), 3 * H, H).transpose() * CVec(dhp.data(), 3 * H);
                           for (std::size_t k = 0; k < H; ++k) ghh[k] += dh[k];
                         }
                       });
}

void check_gru(const GruWeights& w, std::size_t in) {
  const std::size_t H = w.wh.cols();
  if (w.wh.rows() != 3 * H || w.wx.rows() != 3 * H || w.bx.size() != 3 * H || w.bh.size() != 3 * H)
    throw ShapeError("gru: weight shapes inconsistent with hidden size");
  if (w.wx.cols() != in) throw ShapeError("gru: input width mismatch");
}

}  // namespace

Var gru_cell(Var x, Var h, const GruWeights& w) {
  check_gru(w, x.cols());
  return gru_step(affine(x, w.wx, w.bx), h, w.wh, w.bh);
}

Var gru_sequence(Var xs, Var h0, const GruWeights& w, const std::vector<bool>* mask) {
  const std::size_t N = xs.rows();
  if (N == 0) return h0;
  check_gru(w, xs.cols());
  if (mask && mask->size() != N) throw ShapeError("gru_sequence: mask length mismatch");
  Var xp = affine(xs, w.wx, w.bx);
  std::vector<Var> states;
  states.reserve(N);
  Var h = h0;
  for (std::size_t i = 0; i < N; ++i) {
    if (!mask || (*mask)[i]) h = gru_step(row(xp, i), h, w.wh, w.bh);
    states.push_back(h);
  }
  return concat_rows(states);
}

AttentionOutput multi_head_attention(Var query, Var keys, Var values, const std::vector<bool>& mask,
                                     const AttentionWeights& w) {
  if (query.rows() != 1) throw ShapeError("attention: query must be a single row");
  if (keys.rows() != values.rows()) throw ShapeError("attention: keys and values differ in length");
  if (mask.size() != keys.rows()) throw ShapeError("attention: mask length differs from key count");
  const std::size_t d = w.wq.rows();
  if (w.heads == 0 || d % w.heads != 0) throw ShapeError("attention: heads must divide model width");
  const std::size_t dk = d / w.heads;
  Var q = affine(query, w.wq, w.bq);
  Var k = affine(keys, w.wk, w.bk);
  Var v = affine(values, w.wv, w.bv);
  const double inv = 1.0 / std::sqrt(static_cast<double>(dk));
  AttentionOutput result;
  std::vector<Var> heads;
  for (std::size_t hd = 0; hd < w.heads; ++hd) {
    Var qh = slice_cols(q, hd * dk, dk);
    Var kh = slice_cols(k, hd * dk, dk);
    Var vh = slice_cols(v, hd * dk, dk);
    Var attn = masked_softmax(scale(matmul_nt(qh, kh), inv), mask);
    result.weights.emplace_back(attn.value().begin(), attn.value().end());
    heads.push_back(matmul(attn, vh));
  }
  result.output = affine(concat_cols(heads), w.wo, w.bo);
  return result;
}

Var feed_forward(Var x, const FeedForwardWeights& w, double dropout_rate, Rng* rng, bool training) {
  Var h = gelu(affine(x, w.w1, w.b1));
  if (training && dropout_rate > 0.0) {
    if (!rng) throw std::invalid_argument("feed_forward: training dropout needs an rng");
    h = dropout(h, dropout_rate, *rng, true);
  }
  return affine(h, w.w2, w.b2);
}

InfoNceResult info_nce_eval(std::span<const double> z, std::size_t batch, std::size_t dim,
                            std::span<const int> groups, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("info_nce: temperature must be positive");
  if (z.size() != batch * dim || groups.size() != batch) throw ShapeError("info_nce: batch shape mismatch");
  InfoNceResult res;
  res.grad.assign(batch * dim, 0.0);
  if (batch < 2) return res;

  std::vector<double> u(z.begin(), z.end()), norms(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) sq += u[b * dim + j] * u[b * dim + j];
    norms[b] = std::sqrt(sq);
    if (norms[b] == 0.0)
      throw std::domain_error("info_nce: embedding " + std::to_string(b) + " has zero norm");
    for (std::size_t j = 0; j < dim; ++j) u[b * dim + j] /= norms[b];
  }
  std::vector<double> s(batch * batch, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < batch; ++c) {
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) dot += u[b * dim + j] * u[c * dim + j];
      s[b * batch + c] = dot / temperature;
    }

  std::vector<std::size_t> positives(batch, 0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < batch; ++c)
      if (b != c && groups[b] == groups[c]) ++positives[b];
  for (auto n : positives) res.positive_pairs += n;
  if (res.positive_pairs == 0) return res;
  const double inv_p = 1.0 / static_cast<double>(res.positive_pairs);

  // dL/ds, diagonal excluded.
  std::vector<double> gs(batch * batch, 0.0);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (positives[b] == 0) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < batch; ++k)
      if (k != b) mx = std::max(mx, s[b * batch + k]);
    double denom = 0.0;
    for (std::size_t k = 0; k < batch; ++k)
      if (k != b) denom += std::exp(s[b * batch + k] - mx);
    const double log_z = mx + std::log(denom);
    for (std::size_t k = 0; k < batch; ++k) {
      if (k == b) continue;
      const double p = std::exp(s[b * batch + k] - log_z);
      const bool pos = groups[k] == groups[b];
      if (pos) loss -= (s[b * batch + k] - log_z);
      gs[b * batch + k] = -inv_p * ((pos ? 1.0 : 0.0) - static_cast<double>(positives[b]) * p);
    }
  }
  res.loss = loss * inv_p;

  // s_bk = u_b . u_k / tau  =>  du_b = sum_k (gs_bk + gs_kb) u_k / tau
  std::vector<double> du(batch * dim, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t k = 0; k < batch; ++k) {
      const double w = (gs[b * batch + k] + gs[k * batch + b]) / temperature;
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < dim; ++j) du[b * dim + j] += w * u[k * dim + j];
    }
  for (std::size_t b = 0; b < batch; ++b) {
    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) dot += du[b * dim + j] * u[b * dim + j];
    for (std::size_t j = 0; j < dim; ++j)
      res.grad[b * dim + j] = (du[b * dim + j] - u[b * dim + j] * dot) / norms[b];
  }
  return res;
}

Var info_nce(Var z, const std::vector<int>& groups, double temperature) {
  auto res = info_nce_eval(z.value(), z.rows(), z.cols(), groups, temperature);
  const auto iz = z.id;
  return z.tape->emit(1, 1, {res.loss}, {z}, [iz, grad = std::move(res.grad)](Tape& t, std::uint32_t self) {
    const double g = t.grad_value(self)[0];
    auto gz = t.grad(iz);
    for (std::size_t i = 0; i < gz.size(); ++i) gz[i] += g * grad[i];
  });
}

}  // namespace pulse::num
