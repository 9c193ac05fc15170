#pragma once

// Central finite-difference oracle for reverse-mode gradients. Independent of
// the backward rules: it only ever evaluates forward values.

#include "trigcopy/numerics/graph.hpp"
#include "trigcopy/numerics/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace trigcopy::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  Index checked = 0;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

/// `loss` builds a scalar on a fresh graph from the parameter set. At most
/// `max_entries_per_param` entries per parameter are probed (evenly strided).
inline GradCheckResult gradient_check(
    ParameterSet<double>& params,
    const std::function<Var<double>(Graph<double>&, const ParameterSet<double>&)>& loss,
    double step = 1e-5, Index max_entries_per_param = 1 << 30) {
  Graph<double> graph;
  const Var<double> out = loss(graph, params);
  const Gradients<double> analytic = graph.backward(out, params);

  auto evaluate = [&]() {
    Graph<double> g(false);
    return loss(g, params).value()(0, 0);
  };

  GradCheckResult result;
  for (ParamId id = 0; id < params.size(); ++id) {
    Tensor<double>& value = params[id].value;
    const Index n = value.size();
    const Index stride = std::max<Index>(1, n / std::max<Index>(1, max_entries_per_param));
    for (Index i = 0; i < n; i += stride) {
      const double saved = value.data()[i];
      value.data()[i] = saved + step;
      const double plus = evaluate();
      value.data()[i] = saved - step;
      const double minus = evaluate();
      value.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = analytic[id].data()[i];
      result.max_relative_error = std::max(result.max_relative_error, relative_error(a, numeric));
      result.max_absolute_error = std::max(result.max_absolute_error, std::abs(a - numeric));
      ++result.checked;
    }
  }
  return result;
}

}  // namespace trigcopy::testing
