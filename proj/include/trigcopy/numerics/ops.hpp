#pragma once

#include "trigcopy/numerics/graph.hpp"

#include <random>
#include <span>
#include <vector>

// Differentiable operations. Every op checks its shapes, computes the value
// eagerly and registers its backward rule on the operand's graph.
namespace trigcopy {

template <typename Scalar> Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b);
/// a * b^T, the natural form for row-vector activations times weight matrices.
template <typename Scalar> Var<Scalar> matmul_nt(const Var<Scalar>& a, const Var<Scalar>& b);
template <typename Scalar> Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b);
template <typename Scalar> Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b);
/// Adds a 1 x c row to every row of a.
template <typename Scalar> Var<Scalar> add_row(const Var<Scalar>& a, const Var<Scalar>& row);
template <typename Scalar> Var<Scalar> cwise_product(const Var<Scalar>& a, const Var<Scalar>& b);
template <typename Scalar> Var<Scalar> scale(const Var<Scalar>& a, Scalar factor);
template <typename Scalar> Var<Scalar> tanh(const Var<Scalar>& a);
template <typename Scalar> Var<Scalar> sigmoid(const Var<Scalar>& a);
template <typename Scalar> Var<Scalar> exp(const Var<Scalar>& a);
template <typename Scalar> Var<Scalar> log(const Var<Scalar>& a);
template <typename Scalar> Var<Scalar> transpose(const Var<Scalar>& a);

template <typename Scalar> Var<Scalar> vconcat(std::span<const Var<Scalar>> parts);
template <typename Scalar> Var<Scalar> hconcat(std::span<const Var<Scalar>> parts);
template <typename Scalar> Var<Scalar> slice_rows(const Var<Scalar>& a, Index begin, Index count);
template <typename Scalar> Var<Scalar> slice_cols(const Var<Scalar>& a, Index begin, Index count);
/// Rows of `table` selected by `ids` (repeats allowed): embedding lookup.
template <typename Scalar> Var<Scalar> gather_rows(const Var<Scalar>& table, std::span<const Index> ids);

/// Softmax over all entries, with max subtraction.
template <typename Scalar> Var<Scalar> softmax(const Var<Scalar>& a);
/// Per-row log-sum-exp: r x c -> r x 1.
template <typename Scalar> Var<Scalar> row_logsumexp(const Var<Scalar>& a);
/// Per-row log-sum-exp restricted to the given column subsets (non-empty).
template <typename Scalar>
Var<Scalar> row_logsumexp_subset(const Var<Scalar>& a, const std::vector<std::vector<Index>>& columns);

template <typename Scalar> Var<Scalar> sum(const Var<Scalar>& a);
template <typename Scalar> Var<Scalar> mean(const Var<Scalar>& a);
/// Max over groups of `pool` adjacent columns in each row: r x (c*pool) -> r x c.
template <typename Scalar> Var<Scalar> maxout(const Var<Scalar>& a, Index pool);
/// Inverted dropout; identity when rate == 0.
template <typename Scalar> Var<Scalar> dropout(const Var<Scalar>& a, Scalar rate, std::mt19937_64& rng);

/// Row-wise softmax over the entries where `mask` is non-zero; masked entries
/// and rows without any unmasked entry come out as zero.
template <typename Scalar> Var<Scalar> masked_row_softmax(const Var<Scalar>& a, const Tensor<Scalar>& mask);
/// Rows of a where mask(r) != 0, rows of b elsewhere. mask is r x 1.
template <typename Scalar> Var<Scalar> select_rows(const Var<Scalar>& a, const Var<Scalar>& b, const Tensor<Scalar>& mask);

// Slot ops. A slot tensor stacks M blocks of B rows (row m*B + b is slot m of
// batch row b); queries and weights have one row per batch row.

/// out(b, m) = v . tanh(keys[m*B+b] + query[b]).
template <typename Scalar>
Var<Scalar> additive_slot_scores(const Var<Scalar>& keys, const Var<Scalar>& query, const Var<Scalar>& v);
/// out(b, m) = slots[m*B+b] . query[b].
template <typename Scalar> Var<Scalar> slot_dot(const Var<Scalar>& slots, const Var<Scalar>& query);
/// out(b) = sum_m weights(b, m) * slots[m*B+b].
template <typename Scalar> Var<Scalar> slot_weighted_sum(const Var<Scalar>& weights, const Var<Scalar>& slots);

template <typename Scalar> Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) { return add(a, b); }
template <typename Scalar> Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) { return sub(a, b); }

template <typename Scalar>
Var<Scalar> vconcat(std::initializer_list<Var<Scalar>> parts) {
  return vconcat<Scalar>(std::span<const Var<Scalar>>(parts.begin(), parts.size()));
}
template <typename Scalar>
Var<Scalar> hconcat(std::initializer_list<Var<Scalar>> parts) {
  return hconcat<Scalar>(std::span<const Var<Scalar>>(parts.begin(), parts.size()));
}

}  // namespace trigcopy
