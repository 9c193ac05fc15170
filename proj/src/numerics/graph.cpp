#include "trigcopy/numerics/graph.hpp"

namespace trigcopy {

template <typename Scalar>
Var<Scalar> Graph<Scalar>::constant(Mat value) {
  Node node;
  node.owned = std::move(value);
  nodes_.push_back(std::move(node));
  return Var<Scalar>(this, nodes_.size() - 1);
}

template <typename Scalar>
Var<Scalar> Graph<Scalar>::parameter(const ParameterSet<Scalar>& params, ParamId id) {
  Node node;
  node.external = &params[id].value;
  node.param = static_cast<std::ptrdiff_t>(id);
  nodes_.push_back(std::move(node));
  return Var<Scalar>(this, nodes_.size() - 1);
}

template <typename Scalar>
Var<Scalar> Graph<Scalar>::record(Mat value, BackwardFn backward, const char* op) {
  if (!value.allFinite()) {
    throw NumericError(std::string(op) + ": non-finite value in output " + shape_string(value));
  }
  Node node;
  node.owned = std::move(value);
  if (recording_) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<Scalar>(this, nodes_.size() - 1);
}

template <typename Scalar>
const typename Graph<Scalar>::Mat& Graph<Scalar>::value(std::size_t id) const {
  const Node& node = nodes_.at(id);
  return node.external ? *node.external : node.owned;
}

template <typename Scalar>
typename Graph<Scalar>::Mat& Graph<Scalar>::grad_buffer(std::size_t id) {
  Mat& g = grads_.at(id);
  if (g.size() == 0) {
    const Mat& v = value(id);
    g = Mat::Zero(v.rows(), v.cols());
  }
  return g;
}

template <typename Scalar>
Gradients<Scalar> Graph<Scalar>::backward(const Var<Scalar>& loss, const ParameterSet<Scalar>& params) {
  Gradients<Scalar> grads(params);
  backward(loss, grads);
  return grads;
}

template <typename Scalar>
void Graph<Scalar>::backward(const Var<Scalar>& loss, Gradients<Scalar>& into, Scalar seed) {
  if (&loss.graph() != this) throw ContractError("backward: loss belongs to another graph");
  if (!recording_) throw ContractError("backward: graph was built without gradient recording");
  const Mat& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be scalar, got " + shape_string(lv));
  }
  grads_.assign(nodes_.size(), Mat());
  grads_[loss.id()] = Mat::Constant(1, 1, seed);

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (grads_[i].size() == 0) continue;
    Node& node = nodes_[i];
    if (node.param >= 0) {
      Tensor<Scalar>& target = into[static_cast<ParamId>(node.param)];
      require_same_shape(target, grads_[i], "backward(parameter)");
      target += grads_[i];
    } else if (node.backward) {
      // Inputs always have smaller ids, so grads_[i] is not written meanwhile.
      node.backward(*this, grads_[i]);
    }
  }
}

template <typename Scalar>
typename Graph<Scalar>::Mat Graph<Scalar>::gradient_of(const Var<Scalar>& node) const {
  if (node.id() < grads_.size() && grads_[node.id()].size() != 0) return grads_[node.id()];
  const Mat& v = value(node.id());
  return Mat::Zero(v.rows(), v.cols());
}

template class Graph<double>;
template class Graph<float>;

}  // namespace trigcopy
