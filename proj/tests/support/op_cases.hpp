#pragma once

// One scalar probe per differentiable op, shared by the unit and acceptance tests.

#include "trigcopy/numerics/ops.hpp"

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace trigcopy::testing {

inline Tensord random_matrix(Index rows, Index cols, std::mt19937_64& rng, double bound = 1.0) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensord m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

// sum(f(x) .* probe) so every output entry receives a distinct upstream gradient.
inline Var<double> probe_sum(const Var<double>& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto probe = y.graph().constant(random_matrix(y.rows(), y.cols(), rng));
  return sum(cwise_product(y, probe));
}

using OpBuilder = std::function<Var<double>(Graph<double>&, const ParameterSet<double>&)>;

struct OpCases {
  ParameterSet<double> params;
  std::vector<std::pair<std::string, OpBuilder>> cases;
};

inline OpCases op_gradient_cases() {
  std::mt19937_64 rng(11);
  OpCases out;
  auto& params = out.params;
  const ParamId a = params.add("a", random_matrix(3, 4, rng));
  const ParamId b = params.add("b", random_matrix(4, 2, rng));
  const ParamId c = params.add("c", random_matrix(3, 4, rng));
  const ParamId row = params.add("row", random_matrix(1, 4, rng));
  const ParamId pos = params.add("pos", (random_matrix(3, 4, rng).array().abs() + 0.5).matrix());
  const ParamId table = params.add("table", random_matrix(5, 3, rng));

  out.cases = {
      {"matmul", [=](auto& g, const auto& p) { return probe_sum(matmul(g.parameter(p, a), g.parameter(p, b)), 1); }},
      {"matmul_nt", [=](auto& g, const auto& p) { return probe_sum(matmul_nt(g.parameter(p, a), g.parameter(p, c)), 2); }},
      {"add", [=](auto& g, const auto& p) { return probe_sum(g.parameter(p, a) + g.parameter(p, c), 3); }},
      {"sub", [=](auto& g, const auto& p) { return probe_sum(g.parameter(p, a) - g.parameter(p, c), 4); }},
      {"add_row", [=](auto& g, const auto& p) { return probe_sum(add_row(g.parameter(p, a), g.parameter(p, row)), 5); }},
      {"cwise_product", [=](auto& g, const auto& p) { return probe_sum(cwise_product(g.parameter(p, a), g.parameter(p, c)), 6); }},
      {"scale", [=](auto& g, const auto& p) { return probe_sum(scale(g.parameter(p, a), -1.7), 7); }},
      {"tanh", [=](auto& g, const auto& p) { return probe_sum(tanh(g.parameter(p, a)), 8); }},
      {"sigmoid", [=](auto& g, const auto& p) { return probe_sum(sigmoid(g.parameter(p, a)), 9); }},
      {"exp", [=](auto& g, const auto& p) { return probe_sum(exp(g.parameter(p, a)), 10); }},
      {"log", [=](auto& g, const auto& p) { return probe_sum(log(g.parameter(p, pos)), 11); }},
      {"transpose", [=](auto& g, const auto& p) { return probe_sum(transpose(g.parameter(p, a)), 12); }},
      {"vconcat", [=](auto& g, const auto& p) { return probe_sum(vconcat({g.parameter(p, a), g.parameter(p, row)}), 13); }},
      {"hconcat", [=](auto& g, const auto& p) { return probe_sum(hconcat({g.parameter(p, a), g.parameter(p, c)}), 14); }},
      {"slice_rows", [=](auto& g, const auto& p) { return probe_sum(slice_rows(g.parameter(p, a), 1, 2), 15); }},
      {"slice_cols", [=](auto& g, const auto& p) { return probe_sum(slice_cols(g.parameter(p, a), 1, 2), 16); }},
      {"gather_rows", [=](auto& g, const auto& p) {
         const std::vector<Index> ids{4, 0, 4, 2};
         return probe_sum(gather_rows(g.parameter(p, table), std::span<const Index>(ids)), 17);
       }},
      {"softmax", [=](auto& g, const auto& p) { return probe_sum(softmax(g.parameter(p, row)), 18); }},
      {"row_logsumexp", [=](auto& g, const auto& p) { return probe_sum(row_logsumexp(g.parameter(p, a)), 19); }},
      {"row_logsumexp_subset", [=](auto& g, const auto& p) {
         return probe_sum(row_logsumexp_subset(g.parameter(p, a), {{0, 2}, {3}, {1, 2, 3}}), 20);
       }},
      {"sum", [=](auto& g, const auto& p) { return sum(tanh(g.parameter(p, a))); }},
      {"mean", [=](auto& g, const auto& p) { return mean(tanh(g.parameter(p, a))); }},
      {"maxout", [=](auto& g, const auto& p) { return probe_sum(maxout(g.parameter(p, a), 2), 21); }},
      {"masked_row_softmax", [=](auto& g, const auto& p) {
         Tensord mask = Tensord::Ones(3, 4);
         mask(0, 1) = 0;
         mask.row(2).setZero();
         return probe_sum(masked_row_softmax(g.parameter(p, a), mask), 23);
       }},
      {"select_rows", [=](auto& g, const auto& p) {
         Tensord mask(3, 1);
         mask << 1, 0, 1;
         return probe_sum(select_rows(g.parameter(p, a), g.parameter(p, c), mask), 24);
       }},
      {"additive_slot_scores", [=](auto& g, const auto& p) {
         // 3 slot rows = 3 slots of batch 1; query is a row of a.
         return probe_sum(additive_slot_scores(slice_cols(g.parameter(p, a), 0, 4),
                                               slice_rows(g.parameter(p, c), 0, 1), g.parameter(p, row)), 25);
       }},
      {"slot_dot", [=](auto& g, const auto& p) {
         return probe_sum(slot_dot(vconcat({g.parameter(p, a), g.parameter(p, c)}), g.parameter(p, c)), 26);
       }},
      {"slot_weighted_sum", [=](auto& g, const auto& p) {
         return probe_sum(slot_weighted_sum(slice_cols(g.parameter(p, pos), 0, 2),
                                            vconcat({g.parameter(p, a), g.parameter(p, c)})), 27);
       }},
      {"dropout", [=](auto& g, const auto& p) {
         std::mt19937_64 mask_rng(99);
         return probe_sum(dropout(g.parameter(p, a), 0.3, mask_rng), 22);
       }},
  };
  return out;
}

}  // namespace trigcopy::testing
