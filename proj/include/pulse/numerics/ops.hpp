#pragma once

#include <span>
#include <vector>

#include "pulse/numerics/tape.hpp"
#include "pulse/util/rng.hpp"

namespace pulse::num {

// Elementwise. `add` also broadcasts a single-row `b` over the rows of `a`.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var tanh(Var a);
Var sigmoid(Var a);
/// Exact GELU, x * Phi(x).
Var gelu(Var a);

Var matmul(Var a, Var b);     // a b
Var matmul_nt(Var a, Var b);  // a b^T
/// x W^T + b with x (n x in), W (out x in), b (1 x out) or invalid for none.
Var affine(Var x, Var w, Var b = {});

/// Column concatenation; single-row inputs are repeated down the rows.
Var concat_cols(std::span<const Var> parts);
Var concat_cols(std::initializer_list<Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t start, std::size_t len);
Var slice_rows(Var a, std::size_t start, std::size_t len);
Var row(Var a, std::size_t r);
/// Mean over consecutive blocks of `factor` rows; trailing rows are dropped.
Var avg_pool_rows(Var a, std::size_t factor);

Var sum(Var a);
Var mean(Var a);

/// Row-wise softmax where `mask[j] == false` forces weight exactly 0.
Var masked_softmax(Var scores, const std::vector<bool>& mask);
/// Row-wise l2 normalisation.
Var l2_normalize_rows(Var a);

/// Inverted dropout; identity (same node) outside training or at rate 0.
Var dropout(Var a, double rate, Rng& rng, bool training);

/// mean((pred - target)^2) over all entries.
Var mse(Var pred, Var target);

}  // namespace pulse::num
