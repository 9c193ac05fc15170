#pragma once

#include "trigcopy/numerics/parameters.hpp"

#include <vector>

namespace trigcopy {

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParameterSet<Scalar>& params, AdamOptions options);

  [[nodiscard]] long step_count() const { return step_count_; }
  [[nodiscard]] const AdamOptions& options() const { return options_; }
  [[nodiscard]] const Tensor<Scalar>& first_moment(ParamId id) const { return first_.at(id); }
  [[nodiscard]] const Tensor<Scalar>& second_moment(ParamId id) const { return second_.at(id); }

  /// Bias-corrected Adam update of every parameter; increments the step counter.
  void step(ParameterSet<Scalar>& params, const Gradients<Scalar>& grads);

 private:
  AdamOptions options_;
  std::vector<Tensor<Scalar>> first_;
  std::vector<Tensor<Scalar>> second_;
  long step_count_ = 0;
};

template <typename Scalar>
void adam_step(ParameterSet<Scalar>& params, const Gradients<Scalar>& grads, AdamState<Scalar>& state) {
  state.step(params, grads);
}

}  // namespace trigcopy
