#include "trigcopy/numerics/parameters.hpp"

namespace trigcopy {

template <typename Scalar>
ParamId ParameterSet<Scalar>::add(std::string name, Tensor<Scalar> value) {
  if (index_.contains(name)) throw ContractError("duplicate parameter name: " + name);
  if (value.size() == 0) throw DimensionError("parameter " + name + " is empty");
  const ParamId id = params_.size();
  index_.emplace(name, id);
  params_.push_back({std::move(name), std::move(value)});
  return id;
}

template <typename Scalar>
ParamId ParameterSet<Scalar>::add_uniform(std::string name, Index rows, Index cols, Scalar bound,
                                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-static_cast<double>(bound), static_cast<double>(bound));
  Tensor<Scalar> value(rows, cols);
  for (Index i = 0; i < value.size(); ++i) value.data()[i] = static_cast<Scalar>(dist(rng));
  return add(std::move(name), std::move(value));
}

template <typename Scalar>
ParamId ParameterSet<Scalar>::id(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ContractError("unknown parameter: " + std::string(name));
  return it->second;
}

template <typename Scalar>
bool ParameterSet<Scalar>::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

template <typename Scalar>
Index ParameterSet<Scalar>::scalar_count() const {
  Index total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

template <typename Scalar>
Gradients<Scalar>::Gradients(const ParameterSet<Scalar>& params) {
  grads_.reserve(params.size());
  for (const auto& p : params) grads_.push_back(Tensor<Scalar>::Zero(p.value.rows(), p.value.cols()));
}

template <typename Scalar>
void Gradients<Scalar>::set_zero() {
  for (auto& g : grads_) g.setZero();
}

template <typename Scalar>
void Gradients<Scalar>::scale(Scalar factor) {
  for (auto& g : grads_) g *= factor;
}

template <typename Scalar>
Gradients<Scalar>& Gradients<Scalar>::operator+=(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) throw DimensionError("gradient sets differ in size");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    require_same_shape(grads_[i], other.grads_[i], "Gradients::operator+=");
    grads_[i] += other.grads_[i];
  }
  return *this;
}

template <typename Scalar>
bool Gradients<Scalar>::all_finite() const {
  for (const auto& g : grads_) {
    if (!g.allFinite()) return false;
  }
  return true;
}

template class ParameterSet<double>;
template class ParameterSet<float>;
template class Gradients<double>;
template class Gradients<float>;

}  // namespace trigcopy
