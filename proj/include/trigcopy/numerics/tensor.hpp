#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace trigcopy {

using Index = Eigen::Index;

/// Dense row-major tensor of rank <= 2. Vectors are 1 x n rows throughout
/// the library; column vectors only appear as n x 1 score lists.
template <typename Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Tensord = Tensor<double>;
using Tensorf = Tensor<float>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated caller contract (bad id, non-scalar loss, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_string(Index rows, Index cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

template <typename Derived>
std::string shape_string(const Eigen::MatrixBase<Derived>& m) {
  return shape_string(m.rows(), m.cols());
}

template <typename Derived>
void require_same_shape(const Eigen::MatrixBase<Derived>& a,
                        const Eigen::MatrixBase<Derived>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) +
                         " vs " + shape_string(b));
  }
}

}  // namespace trigcopy
