#pragma once

#include "trigcopy/numerics/tensor.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trigcopy {

using ParamId = std::size_t;

template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> value;
};

/// Named, ordered collection of trainable tensors. Ids are insertion indices
/// and stay stable for the lifetime of the set.
template <typename Scalar>
class ParameterSet {
 public:
  ParamId add(std::string name, Tensor<Scalar> value);
  ParamId add_uniform(std::string name, Index rows, Index cols, Scalar bound, std::mt19937_64& rng);

  [[nodiscard]] ParamId id(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const;

  Parameter<Scalar>& operator[](ParamId id) { return params_.at(id); }
  const Parameter<Scalar>& operator[](ParamId id) const { return params_.at(id); }

  [[nodiscard]] std::size_t size() const { return params_.size(); }
  [[nodiscard]] Index scalar_count() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter<Scalar>> params_;
  std::unordered_map<std::string, ParamId> index_;
};

/// One gradient tensor per parameter, shaped like it, zero-initialized.
template <typename Scalar>
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet<Scalar>& params);

  Tensor<Scalar>& operator[](ParamId id) { return grads_.at(id); }
  const Tensor<Scalar>& operator[](ParamId id) const { return grads_.at(id); }
  [[nodiscard]] std::size_t size() const { return grads_.size(); }

  void set_zero();
  void scale(Scalar factor);
  Gradients& operator+=(const Gradients& other);
  [[nodiscard]] bool all_finite() const;

 private:
  std::vector<Tensor<Scalar>> grads_;
};

}  // namespace trigcopy
