#include "trigcopy/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trigcopy {
namespace {

template <typename Scalar>
Graph<Scalar>& graph_of(const Var<Scalar>& a, const Var<Scalar>& b, const char* op) {
  if (!a.valid() || !b.valid() || &a.graph() != &b.graph()) {
    throw ContractError(std::string(op) + ": operands from different graphs");
  }
  return a.graph();
}

template <typename Scalar>
Graph<Scalar>& graph_of(const Var<Scalar>& a, const char* op) {
  if (!a.valid()) throw ContractError(std::string(op) + ": invalid operand");
  return a.graph();
}

template <typename Scalar>
void require_same(const Var<Scalar>& a, const Var<Scalar>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.rows(), a.cols()) + " vs " +
                         shape_string(b.rows(), b.cols()));
  }
}

}  // namespace

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& g = graph_of(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + shape_string(a.rows(), a.cols()) + " * " +
                         shape_string(b.rows(), b.cols()));
  }
  Tensor<Scalar> out = a.value() * b.value();
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).noalias() += grad * gr.value(ib).transpose();
    gr.grad_buffer(ib).noalias() += gr.value(ia).transpose() * grad;
  }, "matmul");
}

template <typename Scalar>
Var<Scalar> matmul_nt(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& g = graph_of(a, b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ " + shape_string(a.rows(), a.cols()) + " * " +
                         shape_string(b.rows(), b.cols()) + "^T");
  }
  Tensor<Scalar> out = a.value() * b.value().transpose();
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).noalias() += grad * gr.value(ib);
    gr.grad_buffer(ib).noalias() += grad.transpose() * gr.value(ia);
  }, "matmul_nt");
}

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& g = graph_of(a, b, "add");
  require_same(a, b, "add");
  Tensor<Scalar> out = a.value() + b.value();
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia) += grad;
    gr.grad_buffer(ib) += grad;
  }, "add");
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& g = graph_of(a, b, "sub");
  require_same(a, b, "sub");
  Tensor<Scalar> out = a.value() - b.value();
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia) += grad;
    gr.grad_buffer(ib) -= grad;
  }, "sub");
}

template <typename Scalar>
Var<Scalar> add_row(const Var<Scalar>& a, const Var<Scalar>& row) {
  auto& g = graph_of(a, row, "add_row");
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: expected [1x" + std::to_string(a.cols()) + "] row, got " +
                         shape_string(row.rows(), row.cols()));
  }
  Tensor<Scalar> out = a.value().rowwise() + row.value().row(0);
  const std::size_t ia = a.id(), ir = row.id();
  return g.record(std::move(out), [ia, ir](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia) += grad;
    gr.grad_buffer(ir) += grad.colwise().sum();
  }, "add_row");
}

template <typename Scalar>
Var<Scalar> cwise_product(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& g = graph_of(a, b, "cwise_product");
  require_same(a, b, "cwise_product");
  Tensor<Scalar> out = a.value().cwiseProduct(b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia) += grad.cwiseProduct(gr.value(ib));
    gr.grad_buffer(ib) += grad.cwiseProduct(gr.value(ia));
  }, "cwise_product");
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar factor) {
  auto& g = graph_of(a, "scale");
  Tensor<Scalar> out = a.value() * factor;
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, factor](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia) += grad * factor;
  }, "scale");
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  auto& g = graph_of(a, "tanh");
  Tensor<Scalar> out = a.value().array().tanh().matrix();
  const std::size_t ia = a.id(), self = g.size();
  return g.record(std::move(out), [ia, self](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& y = gr.value(self).array();
    gr.grad_buffer(ia).array() += grad.array() * (Scalar(1) - y.square());
  }, "tanh");
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  auto& g = graph_of(a, "sigmoid");
  Tensor<Scalar> out = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  const std::size_t ia = a.id(), self = g.size();
  return g.record(std::move(out), [ia, self](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& y = gr.value(self).array();
    gr.grad_buffer(ia).array() += grad.array() * y * (Scalar(1) - y);
  }, "sigmoid");
}

template <typename Scalar>
Var<Scalar> exp(const Var<Scalar>& a) {
  auto& g = graph_of(a, "exp");
  Tensor<Scalar> out = a.value().array().exp().matrix();
  const std::size_t ia = a.id(), self = g.size();
  return g.record(std::move(out), [ia, self](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).array() += grad.array() * gr.value(self).array();
  }, "exp");
}

template <typename Scalar>
Var<Scalar> log(const Var<Scalar>& a) {
  auto& g = graph_of(a, "log");
  Tensor<Scalar> out = a.value().array().log().matrix();
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).array() += grad.array() / gr.value(ia).array();
  }, "log");
}

template <typename Scalar>
Var<Scalar> transpose(const Var<Scalar>& a) {
  auto& g = graph_of(a, "transpose");
  Tensor<Scalar> out = a.value().transpose();
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia) += grad.transpose();
  }, "transpose");
}

template <typename Scalar>
Var<Scalar> vconcat(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw DimensionError("vconcat: no operands");
  auto& g = graph_of(parts[0], "vconcat");
  const Index cols = parts[0].cols();
  Index rows = 0;
  std::vector<std::size_t> ids;
  for (const auto& p : parts) {
    graph_of(parts[0], p, "vconcat");
    if (p.cols() != cols) throw DimensionError("vconcat: column counts differ");
    rows += p.rows();
    ids.push_back(p.id());
  }
  Tensor<Scalar> out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return g.record(std::move(out), [ids = std::move(ids)](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    Index offset = 0;
    for (std::size_t id : ids) {
      auto& buf = gr.grad_buffer(id);
      buf += grad.middleRows(offset, buf.rows());
      offset += buf.rows();
    }
  }, "vconcat");
}

template <typename Scalar>
Var<Scalar> hconcat(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw DimensionError("hconcat: no operands");
  auto& g = graph_of(parts[0], "hconcat");
  const Index rows = parts[0].rows();
  Index cols = 0;
  std::vector<std::size_t> ids;
  for (const auto& p : parts) {
    graph_of(parts[0], p, "hconcat");
    if (p.rows() != rows) throw DimensionError("hconcat: row counts differ");
    cols += p.cols();
    ids.push_back(p.id());
  }
  Tensor<Scalar> out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return g.record(std::move(out), [ids = std::move(ids)](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    Index offset = 0;
    for (std::size_t id : ids) {
      auto& buf = gr.grad_buffer(id);
      buf += grad.middleCols(offset, buf.cols());
      offset += buf.cols();
    }
  }, "hconcat");
}

template <typename Scalar>
Var<Scalar> slice_rows(const Var<Scalar>& a, Index begin, Index count) {
  auto& g = graph_of(a, "slice_rows");
  if (begin < 0 || count <= 0 || begin + count > a.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") outside " + shape_string(a.rows(), a.cols()));
  }
  Tensor<Scalar> out = a.value().middleRows(begin, count);
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, begin, count](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).middleRows(begin, count) += grad;
  }, "slice_rows");
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar>& a, Index begin, Index count) {
  auto& g = graph_of(a, "slice_cols");
  if (begin < 0 || count <= 0 || begin + count > a.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") outside " + shape_string(a.rows(), a.cols()));
  }
  Tensor<Scalar> out = a.value().middleCols(begin, count);
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, begin, count](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).middleCols(begin, count) += grad;
  }, "slice_cols");
}

template <typename Scalar>
Var<Scalar> gather_rows(const Var<Scalar>& table, std::span<const Index> ids) {
  auto& g = graph_of(table, "gather_rows");
  if (ids.empty()) throw DimensionError("gather_rows: empty id list");
  Tensor<Scalar> out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= table.rows()) {
      throw ContractError("gather_rows: id " + std::to_string(ids[r]) + " outside table of " +
                          std::to_string(table.rows()) + " rows");
    }
    out.row(static_cast<Index>(r)) = table.value().row(ids[r]);
  }
  const std::size_t it = table.id();
  std::vector<Index> rows(ids.begin(), ids.end());
  return g.record(std::move(out), [it, rows = std::move(rows)](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    auto& buf = gr.grad_buffer(it);
    for (std::size_t r = 0; r < rows.size(); ++r) buf.row(rows[r]) += grad.row(static_cast<Index>(r));
  }, "gather_rows");
}

template <typename Scalar>
Var<Scalar> softmax(const Var<Scalar>& a) {
  auto& g = graph_of(a, "softmax");
  if (a.value().size() == 0) throw DimensionError("softmax: empty input");
  const Scalar peak = a.value().maxCoeff();
  Tensor<Scalar> out = (a.value().array() - peak).exp().matrix();
  out /= out.sum();
  const std::size_t ia = a.id(), self = g.size();
  return g.record(std::move(out), [ia, self](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& y = gr.value(self);
    const Scalar dot = grad.cwiseProduct(y).sum();
    gr.grad_buffer(ia).array() += y.array() * (grad.array() - dot);
  }, "softmax");
}

template <typename Scalar>
Var<Scalar> row_logsumexp(const Var<Scalar>& a) {
  auto& g = graph_of(a, "row_logsumexp");
  if (a.cols() == 0) throw DimensionError("row_logsumexp: no columns");
  const auto& x = a.value();
  Tensor<Scalar> out(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar peak = x.row(r).maxCoeff();
    out(r, 0) = peak + std::log((x.row(r).array() - peak).exp().sum());
  }
  const std::size_t ia = a.id(), self = g.size();
  return g.record(std::move(out), [ia, self](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& xv = gr.value(ia);
    const auto& lse = gr.value(self);
    auto& buf = gr.grad_buffer(ia);
    for (Index r = 0; r < xv.rows(); ++r) {
      buf.row(r).array() += grad(r, 0) * (xv.row(r).array() - lse(r, 0)).exp();
    }
  }, "row_logsumexp");
}

template <typename Scalar>
Var<Scalar> row_logsumexp_subset(const Var<Scalar>& a, const std::vector<std::vector<Index>>& columns) {
  auto& g = graph_of(a, "row_logsumexp_subset");
  const auto& x = a.value();
  if (static_cast<Index>(columns.size()) != x.rows()) {
    throw DimensionError("row_logsumexp_subset: one column subset per row required");
  }
  Tensor<Scalar> out(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    const auto& cols = columns[static_cast<std::size_t>(r)];
    if (cols.empty()) throw ContractError("row_logsumexp_subset: empty subset in row " + std::to_string(r));
    Scalar peak = -std::numeric_limits<Scalar>::infinity();
    for (Index c : cols) {
      if (c < 0 || c >= x.cols()) throw ContractError("row_logsumexp_subset: column out of range");
      peak = std::max(peak, x(r, c));
    }
    Scalar acc = 0;
    for (Index c : cols) acc += std::exp(x(r, c) - peak);
    out(r, 0) = peak + std::log(acc);
  }
  const std::size_t ia = a.id(), self = g.size();
  return g.record(std::move(out), [ia, self, columns](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& xv = gr.value(ia);
    const auto& lse = gr.value(self);
    auto& buf = gr.grad_buffer(ia);
    for (Index r = 0; r < xv.rows(); ++r) {
      for (Index c : columns[static_cast<std::size_t>(r)]) {
        buf(r, c) += grad(r, 0) * std::exp(xv(r, c) - lse(r, 0));
      }
    }
  }, "row_logsumexp_subset");
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  auto& g = graph_of(a, "sum");
  Tensor<Scalar> out = Tensor<Scalar>::Constant(1, 1, a.value().sum());
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).array() += grad(0, 0);
  }, "sum");
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  auto& g = graph_of(a, "mean");
  if (a.value().size() == 0) throw DimensionError("mean: empty input");
  const Scalar n = static_cast<Scalar>(a.value().size());
  Tensor<Scalar> out = Tensor<Scalar>::Constant(1, 1, a.value().sum() / n);
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, n](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia).array() += grad(0, 0) / n;
  }, "mean");
}

template <typename Scalar>
Var<Scalar> maxout(const Var<Scalar>& a, Index pool) {
  auto& g = graph_of(a, "maxout");
  if (pool <= 0 || a.cols() % pool != 0) {
    throw DimensionError("maxout: " + std::to_string(a.cols()) + " columns not divisible by pool " +
                         std::to_string(pool));
  }
  const auto& x = a.value();
  const Index out_cols = x.cols() / pool;
  Tensor<Scalar> out(x.rows(), out_cols);
  std::vector<Index> winner(static_cast<std::size_t>(x.rows() * out_cols));
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < out_cols; ++c) {
      Index best = c * pool;
      for (Index k = 1; k < pool; ++k) {
        if (x(r, c * pool + k) > x(r, best)) best = c * pool + k;
      }
      out(r, c) = x(r, best);
      winner[static_cast<std::size_t>(r * out_cols + c)] = best;
    }
  }
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, winner = std::move(winner), out_cols](Graph<Scalar>& gr,
                                                                             const Tensor<Scalar>& grad) {
    auto& buf = gr.grad_buffer(ia);
    for (Index r = 0; r < grad.rows(); ++r) {
      for (Index c = 0; c < out_cols; ++c) buf(r, winner[static_cast<std::size_t>(r * out_cols + c)]) += grad(r, c);
    }
  }, "maxout");
}

template <typename Scalar>
Var<Scalar> dropout(const Var<Scalar>& a, Scalar rate, std::mt19937_64& rng) {
  if (rate <= Scalar(0)) return a;
  if (rate >= Scalar(1)) throw ContractError("dropout: rate must be < 1");
  auto& g = graph_of(a, "dropout");
  std::bernoulli_distribution keep(1.0 - static_cast<double>(rate));
  const Scalar kept = Scalar(1) / (Scalar(1) - rate);
  Tensor<Scalar> mask(a.rows(), a.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? kept : Scalar(0);
  Tensor<Scalar> out = a.value().cwiseProduct(mask);
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, mask = std::move(mask)](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    gr.grad_buffer(ia) += grad.cwiseProduct(mask);
  }, "dropout");
}

template <typename Scalar>
Var<Scalar> masked_row_softmax(const Var<Scalar>& a, const Tensor<Scalar>& mask) {
  auto& g = graph_of(a, "masked_row_softmax");
  require_same_shape(a.value(), mask, "masked_row_softmax");
  const auto& x = a.value();
  Tensor<Scalar> out = Tensor<Scalar>::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    Scalar peak = -std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask(r, c) != 0) peak = std::max(peak, x(r, c));
    }
    if (peak == -std::numeric_limits<Scalar>::infinity()) continue;
    Scalar total = 0;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask(r, c) != 0) total += out(r, c) = std::exp(x(r, c) - peak);
    }
    out.row(r) /= total;
  }
  const std::size_t ia = a.id(), self = g.size();
  return g.record(std::move(out), [ia, self](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& y = gr.value(self);
    auto& buf = gr.grad_buffer(ia);
    for (Index r = 0; r < y.rows(); ++r) {
      const Scalar dot = grad.row(r).dot(y.row(r));
      buf.row(r).array() += y.row(r).array() * (grad.row(r).array() - dot);
    }
  }, "masked_row_softmax");
}

template <typename Scalar>
Var<Scalar> select_rows(const Var<Scalar>& a, const Var<Scalar>& b, const Tensor<Scalar>& mask) {
  auto& g = graph_of(a, b, "select_rows");
  require_same(a, b, "select_rows");
  if (mask.rows() != a.rows() || mask.cols() != 1) throw DimensionError("select_rows: mask must be rows x 1");
  Tensor<Scalar> out = b.value();
  for (Index r = 0; r < out.rows(); ++r) {
    if (mask(r, 0) != 0) out.row(r) = a.value().row(r);
  }
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib, mask](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    auto& ga = gr.grad_buffer(ia);
    auto& gb = gr.grad_buffer(ib);
    for (Index r = 0; r < grad.rows(); ++r) {
      if (mask(r, 0) != 0) ga.row(r) += grad.row(r);
      else gb.row(r) += grad.row(r);
    }
  }, "select_rows");
}

namespace {

template <typename Scalar>
Index slot_count(const Tensor<Scalar>& slots, const Tensor<Scalar>& query, const char* op) {
  const Index batch = query.rows();
  if (batch == 0 || slots.rows() % batch != 0 || slots.cols() != query.cols()) {
    throw DimensionError(std::string(op) + ": slots " + shape_string(slots) + " incompatible with query " +
                         shape_string(query));
  }
  return slots.rows() / batch;
}

}  // namespace

template <typename Scalar>
Var<Scalar> additive_slot_scores(const Var<Scalar>& keys, const Var<Scalar>& query, const Var<Scalar>& v) {
  auto& g = graph_of(keys, query, "additive_slot_scores");
  graph_of(keys, v, "additive_slot_scores");
  const Index batch = query.rows();
  const Index slots = slot_count(keys.value(), query.value(), "additive_slot_scores");
  if (v.rows() != 1 || v.cols() != keys.cols()) throw DimensionError("additive_slot_scores: v must be 1 x depth");
  Tensor<Scalar> hidden(keys.rows(), keys.cols());
  for (Index m = 0; m < slots; ++m) {
    hidden.middleRows(m * batch, batch) = (keys.value().middleRows(m * batch, batch) + query.value()).array().tanh();
  }
  const Tensor<Scalar> flat = hidden * v.value().transpose();
  Tensor<Scalar> out(batch, slots);
  for (Index m = 0; m < slots; ++m) out.col(m) = flat.middleRows(m * batch, batch);
  const std::size_t ik = keys.id(), iq = query.id(), iv = v.id();
  return g.record(std::move(out),
                  [ik, iq, iv, batch, slots, hidden = std::move(hidden)](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
                    Tensor<Scalar> dflat(hidden.rows(), 1);
                    for (Index m = 0; m < slots; ++m) dflat.middleRows(m * batch, batch) = grad.col(m);
                    gr.grad_buffer(iv).noalias() += dflat.transpose() * hidden;
                    const auto& vv = gr.value(iv);
                    Tensor<Scalar> dpre = (1 - hidden.array().square()).matrix();
                    for (Index r = 0; r < dpre.rows(); ++r) dpre.row(r).array() *= dflat(r, 0) * vv.row(0).array();
                    gr.grad_buffer(ik) += dpre;
                    auto& dq = gr.grad_buffer(iq);
                    for (Index m = 0; m < slots; ++m) dq += dpre.middleRows(m * batch, batch);
                  },
                  "additive_slot_scores");
}

template <typename Scalar>
Var<Scalar> slot_dot(const Var<Scalar>& slots, const Var<Scalar>& query) {
  auto& g = graph_of(slots, query, "slot_dot");
  const Index batch = query.rows();
  const Index count = slot_count(slots.value(), query.value(), "slot_dot");
  Tensor<Scalar> out(batch, count);
  for (Index m = 0; m < count; ++m) {
    out.col(m) = slots.value().middleRows(m * batch, batch).cwiseProduct(query.value()).rowwise().sum();
  }
  const std::size_t is = slots.id(), iq = query.id();
  return g.record(std::move(out), [is, iq, batch, count](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& sv = gr.value(is);
    const auto& qv = gr.value(iq);
    auto& ds = gr.grad_buffer(is);
    auto& dq = gr.grad_buffer(iq);
    for (Index m = 0; m < count; ++m) {
      ds.middleRows(m * batch, batch) += grad.col(m).asDiagonal() * qv;
      dq += grad.col(m).asDiagonal() * sv.middleRows(m * batch, batch);
    }
  }, "slot_dot");
}

template <typename Scalar>
Var<Scalar> slot_weighted_sum(const Var<Scalar>& weights, const Var<Scalar>& slots) {
  auto& g = graph_of(weights, slots, "slot_weighted_sum");
  const Index batch = weights.rows();
  const Index count = weights.cols();
  if (slots.rows() != batch * count) {
    throw DimensionError("slot_weighted_sum: weights " + shape_string(weights.rows(), weights.cols()) +
                         " incompatible with slots " + shape_string(slots.rows(), slots.cols()));
  }
  Tensor<Scalar> out = Tensor<Scalar>::Zero(batch, slots.cols());
  for (Index m = 0; m < count; ++m) {
    out.noalias() += weights.value().col(m).asDiagonal() * slots.value().middleRows(m * batch, batch);
  }
  const std::size_t iw = weights.id(), is = slots.id();
  return g.record(std::move(out), [iw, is, batch, count](Graph<Scalar>& gr, const Tensor<Scalar>& grad) {
    const auto& wv = gr.value(iw);
    const auto& sv = gr.value(is);
    auto& dw = gr.grad_buffer(iw);
    auto& ds = gr.grad_buffer(is);
    for (Index m = 0; m < count; ++m) {
      dw.col(m) += sv.middleRows(m * batch, batch).cwiseProduct(grad).rowwise().sum();
      ds.middleRows(m * batch, batch).noalias() += wv.col(m).asDiagonal() * grad;
    }
  }, "slot_weighted_sum");
}

#define TRIGCOPY_INSTANTIATE_OPS(S)                                                              \
  template Var<S> matmul(const Var<S>&, const Var<S>&);                                          \
  template Var<S> matmul_nt(const Var<S>&, const Var<S>&);                                       \
  template Var<S> add(const Var<S>&, const Var<S>&);                                             \
  template Var<S> sub(const Var<S>&, const Var<S>&);                                             \
  template Var<S> add_row(const Var<S>&, const Var<S>&);                                         \
  template Var<S> cwise_product(const Var<S>&, const Var<S>&);                                   \
  template Var<S> scale(const Var<S>&, S);                                                       \
  template Var<S> tanh(const Var<S>&);                                                           \
  template Var<S> sigmoid(const Var<S>&);                                                        \
  template Var<S> exp(const Var<S>&);                                                            \
  template Var<S> log(const Var<S>&);                                                            \
  template Var<S> transpose(const Var<S>&);                                                      \
  template Var<S> vconcat(std::span<const Var<S>>);                                              \
  template Var<S> hconcat(std::span<const Var<S>>);                                              \
  template Var<S> slice_rows(const Var<S>&, Index, Index);                                       \
  template Var<S> slice_cols(const Var<S>&, Index, Index);                                       \
  template Var<S> gather_rows(const Var<S>&, std::span<const Index>);                            \
  template Var<S> softmax(const Var<S>&);                                                        \
  template Var<S> row_logsumexp(const Var<S>&);                                                  \
  template Var<S> row_logsumexp_subset(const Var<S>&, const std::vector<std::vector<Index>>&);    \
  template Var<S> sum(const Var<S>&);                                                            \
  template Var<S> mean(const Var<S>&);                                                           \
  template Var<S> maxout(const Var<S>&, Index);                                                  \
  template Var<S> masked_row_softmax(const Var<S>&, const Tensor<S>&);                           \
  template Var<S> select_rows(const Var<S>&, const Var<S>&, const Tensor<S>&);                   \
  template Var<S> additive_slot_scores(const Var<S>&, const Var<S>&, const Var<S>&);             \
  template Var<S> slot_dot(const Var<S>&, const Var<S>&);                                        \
  template Var<S> slot_weighted_sum(const Var<S>&, const Var<S>&);                               \
  template Var<S> dropout(const Var<S>&, S, std::mt19937_64&);

TRIGCOPY_INSTANTIATE_OPS(double)
TRIGCOPY_INSTANTIATE_OPS(float)

}  // namespace trigcopy
