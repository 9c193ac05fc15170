#pragma once

#include "trigcopy/numerics/parameters.hpp"
#include "trigcopy/numerics/tensor.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace trigcopy {

template <typename Scalar>
class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while the graph lives.
template <typename Scalar>
class Var {
 public:
  Var() = default;

  [[nodiscard]] const Tensor<Scalar>& value() const { return graph_->value(id_); }
  [[nodiscard]] Index rows() const { return value().rows(); }
  [[nodiscard]] Index cols() const { return value().cols(); }
  [[nodiscard]] std::size_t id() const { return id_; }
  [[nodiscard]] Graph<Scalar>& graph() const { return *graph_; }
  [[nodiscard]] bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph<Scalar>;
  Var(Graph<Scalar>* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph<Scalar>* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the node
/// vector is already a topological order and backward walks it in reverse.
///
/// A graph built with record_gradients = false keeps values only; it is used
/// for inference where no backward pass follows.
template <typename Scalar>
class Graph {
 public:
  using Mat = Tensor<Scalar>;
  /// Receives the gradient flowing into the node and distributes it to inputs.
  using BackwardFn = std::function<void(Graph&, const Mat&)>;

  explicit Graph(bool record_gradients = true) : recording_(record_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<Scalar> constant(Mat value);
  /// Leaf that references the parameter storage without copying it. The
  /// ParameterSet must outlive the graph and stay unmodified while in use.
  Var<Scalar> parameter(const ParameterSet<Scalar>& params, ParamId id);
  /// Appends an op result. Throws NumericError on non-finite values.
  Var<Scalar> record(Mat value, BackwardFn backward, const char* op);

  [[nodiscard]] const Mat& value(std::size_t id) const;
  [[nodiscard]] bool recording() const { return recording_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  /// Gradient buffer of a node during backward, zero-allocated on first use.
  Mat& grad_buffer(std::size_t id);

  /// Fresh gradients of a scalar loss w.r.t. every parameter of `params`.
  /// Parameters the loss does not depend on get zero gradients.
  Gradients<Scalar> backward(const Var<Scalar>& loss, const ParameterSet<Scalar>& params);
  /// Adds seed * d(loss)/d(param) into `into`.
  void backward(const Var<Scalar>& loss, Gradients<Scalar>& into, Scalar seed = Scalar(1));
  /// Gradient of the loss w.r.t. an arbitrary node, from the last backward call.
  [[nodiscard]] Mat gradient_of(const Var<Scalar>& node) const;

 private:
  struct Node {
    Mat owned;
    const Mat* external = nullptr;
    BackwardFn backward;
    std::ptrdiff_t param = -1;
  };

  bool recording_;
  std::vector<Node> nodes_;
  std::vector<Mat> grads_;
};

}  // namespace trigcopy
