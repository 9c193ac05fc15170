#include "trigcopy/numerics/adam.hpp"

#include <cmath>

namespace trigcopy {

template <typename Scalar>
AdamState<Scalar>::AdamState(const ParameterSet<Scalar>& params, AdamOptions options) : options_(options) {
  for (const auto& p : params) {
    first_.push_back(Tensor<Scalar>::Zero(p.value.rows(), p.value.cols()));
    second_.push_back(Tensor<Scalar>::Zero(p.value.rows(), p.value.cols()));
  }
}

template <typename Scalar>
void AdamState<Scalar>::step(ParameterSet<Scalar>& params, const Gradients<Scalar>& grads) {
  if (params.size() != first_.size() || grads.size() != first_.size()) {
    throw DimensionError("adam_step: parameter/gradient/state counts differ");
  }
  for (std::size_t i = 0; i < first_.size(); ++i) {
    require_same_shape(params[i].value, grads[i], "adam_step");
    require_same_shape(params[i].value, first_[i], "adam_step");
  }
  ++step_count_;
  const auto t = static_cast<double>(step_count_);
  const auto b1 = static_cast<Scalar>(options_.beta1);
  const auto b2 = static_cast<Scalar>(options_.beta2);
  const auto correction1 = static_cast<Scalar>(1.0 - std::pow(options_.beta1, t));
  const auto correction2 = static_cast<Scalar>(1.0 - std::pow(options_.beta2, t));
  const auto lr = static_cast<Scalar>(options_.learning_rate);
  const auto eps = static_cast<Scalar>(options_.epsilon);

  for (std::size_t i = 0; i < first_.size(); ++i) {
    auto g = grads[i].array();
    auto m = first_[i].array();
    auto v = second_[i].array();
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    params[i].value.array() -= lr * (m / correction1) / ((v / correction2).sqrt() + eps);
  }
}

template class AdamState<double>;
template class AdamState<float>;

}  // namespace trigcopy
