#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ace/tensor.hpp"

namespace ace {

/// Primitive operations recorded on the tape. Everything else (softmax, MLP
/// layers, losses) is composed from these.
enum class Op {
  kLeaf,
  kConstant,
  kAdd,
  kSub,
  kNeg,
  kMul,
  kDiv,
  kScale,
  kMatmul,
  kTranspose,
  kLeakyRelu,
  kLeakyReluMask,
  kSigmoid,
  kTanh,
  kExp,
  kLog,
  kSqrt,
  kSin,
  kCos,
  kClamp,
  kClampMask,
  kSumAll,
  kRowSum,
  kColSum,
  kBroadcastScalar,
  kBroadcastCols,
  kBroadcastRows,
  kGatherRows,
  kScatterRows,
  kConcatRows,
};

struct TapeNode {
  Op op = Op::kLeaf;
  int a = -1;
  int b = -1;
  double attr0 = 0.0;  // scale factor, activation slope, clamp lo
  double attr1 = 0.0;  // clamp hi
  std::size_t rows_out = 0;
  std::size_t cols_out = 0;
  std::vector<std::size_t> indices;  // gather/scatter row indices
  Tensor value;
};

/// Result of a backward pass: per-node adjoint node ids (-1 = zero gradient).
/// Adjoints are themselves tape nodes, so a scalar assembled from them can be
/// differentiated again for second-order gradients (gradient penalty).
struct Gradients {
  std::vector<int> adjoint;

  bool has(int node) const {
    return node >= 0 && node < static_cast<int>(adjoint.size()) && adjoint[node] >= 0;
  }
  int node_of(int node) const { return has(node) ? adjoint[node] : -1; }
};

/// Reverse-mode autodiff tape over rank-2 tensors.
///
/// Values are computed eagerly on emission and checked finite. The backward
/// pass emits its vector-Jacobian products as ordinary tape primitives, which
/// is what makes grad-of-grad work for arbitrary compositions.
class Tape {
 public:
  const std::vector<TapeNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  const Tensor& value(int id) const { return node_at(id).value; }

  int leaf(Tensor t) {
    t.check_invariants();
    return push(Op::kLeaf, -1, -1, std::move(t));
  }

  int constant(Tensor t) {
    t.check_invariants();
    return push(Op::kConstant, -1, -1, std::move(t));
  }

  int add(int a, int b) { return emit(Op::kAdd, a, b); }
  int sub(int a, int b) { return emit(Op::kSub, a, b); }
  int neg(int a) { return emit(Op::kNeg, a); }
  int mul(int a, int b) { return emit(Op::kMul, a, b); }
  int div(int a, int b) { return emit(Op::kDiv, a, b); }

  int scale(int a, double s) {
    TapeNode n = make(Op::kScale, a, -1);
    n.attr0 = s;
    return finish(std::move(n));
  }

  int matmul(int a, int b) { return emit(Op::kMatmul, a, b); }
  int transpose(int a) { return emit(Op::kTranspose, a); }

  int leaky_relu(int a, double slope) {
    TapeNode n = make(Op::kLeakyRelu, a, -1);
    n.attr0 = slope;
    return finish(std::move(n));
  }

  int sigmoid(int a) { return emit(Op::kSigmoid, a); }
  int tanh(int a) { return emit(Op::kTanh, a); }
  int exp(int a) { return emit(Op::kExp, a); }
  int log(int a) { return emit(Op::kLog, a); }
  int sqrt(int a) { return emit(Op::kSqrt, a); }
  int sin(int a) { return emit(Op::kSin, a); }
  int cos(int a) { return emit(Op::kCos, a); }

  int clamp(int a, double lo, double hi) {
    TapeNode n = make(Op::kClamp, a, -1);
    n.attr0 = lo;
    n.attr1 = hi;
    return finish(std::move(n));
  }

  int sum_all(int a) { return emit(Op::kSumAll, a); }
  int row_sum(int a) { return emit(Op::kRowSum, a); }
  int col_sum(int a) { return emit(Op::kColSum, a); }

  int broadcast_scalar(int a, std::size_t rows, std::size_t cols) {
    TapeNode n = make(Op::kBroadcastScalar, a, -1);
    n.rows_out = rows;
    n.cols_out = cols;
    return finish(std::move(n));
  }

  int broadcast_cols(int a, std::size_t cols) {
    TapeNode n = make(Op::kBroadcastCols, a, -1);
    n.cols_out = cols;
    return finish(std::move(n));
  }

  int broadcast_rows(int a, std::size_t rows) {
    TapeNode n = make(Op::kBroadcastRows, a, -1);
    n.rows_out = rows;
    return finish(std::move(n));
  }

  int gather_rows(int a, std::vector<std::size_t> rows) {
    TapeNode n = make(Op::kGatherRows, a, -1);
    n.indices = std::move(rows);
    return finish(std::move(n));
  }

  int scatter_rows(int a, std::vector<std::size_t> rows, std::size_t total_rows) {
    TapeNode n = make(Op::kScatterRows, a, -1);
    n.indices = std::move(rows);
    n.rows_out = total_rows;
    return finish(std::move(n));
  }

  int concat_rows(int a, int b) { return emit(Op::kConcatRows, a, b); }

  // ---- composed helpers ----

  /// Mean of all entries.
  int mean_all(int a) {
    const Tensor& t = value(a);
    return scale(sum_all(a), 1.0 / static_cast<double>(t.size()));
  }

  /// Column-wise softmax of an [k, B] matrix (per-sample over rows).
  int softmax_cols(int a) {
    const Tensor& t = value(a);
    const std::size_t k = t.rows(), c = t.cols();
    Tensor mx(k, c);
    for (std::size_t j = 0; j < c; ++j) {
      double m = t.at(0, j);
      for (std::size_t i = 1; i < k; ++i) m = std::max(m, t.at(i, j));
      for (std::size_t i = 0; i < k; ++i) mx.at(i, j) = m;
    }
    // shifting by a detached per-column constant leaves softmax and its
    // derivatives unchanged
    const int e = exp(sub(a, constant(std::move(mx))));
    return div(e, broadcast_rows(col_sum(e), k));
  }

  /// Backward pass from `out`. Seed defaults to ones (out must then be 1x1).
  /// Returns adjoint node ids valid for every node recorded before the call.
  Gradients backward(int out, int seed = -1) {
    require(out >= 0 && out < static_cast<int>(nodes_.size()), "backward: node not on tape");
    const std::size_t snapshot = nodes_.size();
    if (seed < 0) {
      require(value(out).size() == 1, "backward: seed required for non-scalar output");
      seed = constant(Tensor(1, 1, 1.0));
    } else {
      require(seed < static_cast<int>(snapshot), "backward: seed not on tape");
      require(value(seed).same_shape(value(out)), "backward: seed shape mismatch");
    }

    Gradients g;
    g.adjoint.assign(snapshot, -1);
    g.adjoint[out] = seed;

    for (int i = out; i >= 0; --i) {
      if (g.adjoint[i] < 0) continue;
      propagate(i, g.adjoint[i], g.adjoint);
    }
    return g;
  }

  /// Gradient tensor for `node` under `g` (zeros when no path).
  Tensor gradient(const Gradients& g, int node) const {
    if (!g.has(node)) {
      const Tensor& v = value(node);
      return Tensor(v.rows(), v.cols());
    }
    return value(g.node_of(node));
  }

  /// Re-executes the whole record and verifies stored values bit-exactly.
  bool replay_check() const {
    std::vector<Tensor> values(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const TapeNode& n = nodes_[i];
      if (n.op == Op::kLeaf || n.op == Op::kConstant) {
        values[i] = n.value;
      } else {
        values[i] = eval_op(n, n.a >= 0 ? &values[n.a] : nullptr,
                            n.b >= 0 ? &values[n.b] : nullptr);
      }
      if (values[i].shape != n.value.shape || values[i].data != n.value.data) return false;
    }
    return true;
  }

 private:
  std::vector<TapeNode> nodes_;

  const TapeNode& node_at(int id) const {
    require(id >= 0 && id < static_cast<int>(nodes_.size()), "tape: node id out of range");
    return nodes_[id];
  }

  TapeNode make(Op op, int a, int b) {
    node_at(a);
    if (b >= 0) node_at(b);
    TapeNode n;
    n.op = op;
    n.a = a;
    n.b = b;
    return n;
  }

  int push(Op op, int a, int b, Tensor value) {
    TapeNode n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int emit(Op op, int a, int b = -1) { return finish(make(op, a, b)); }

  int finish(TapeNode n) {
    n.value = eval_op(n, n.a >= 0 ? &nodes_[n.a].value : nullptr,
                      n.b >= 0 ? &nodes_[n.b].value : nullptr);
    require_finite(n.value.data, op_name(n.op));
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int mask_leaky_relu(int a, double slope) {
    TapeNode n = make(Op::kLeakyReluMask, a, -1);
    n.attr0 = slope;
    return finish(std::move(n));
  }

  int mask_clamp(int a, double lo, double hi) {
    TapeNode n = make(Op::kClampMask, a, -1);
    n.attr0 = lo;
    n.attr1 = hi;
    return finish(std::move(n));
  }

  int ones_like(int a) {
    const Tensor& t = nodes_[a].value;
    return constant(Tensor(t.rows(), t.cols(), 1.0));
  }

  void accumulate(std::vector<int>& adj, int target, int contribution) {
    if (target >= static_cast<int>(adj.size())) return;  // node emitted during backward
    adj[target] = adj[target] < 0 ? contribution : add(adj[target], contribution);
  }

  void propagate(int i, int g, std::vector<int>& adj) {
    const TapeNode n = nodes_[i];  // copy: nodes_ may reallocate while emitting
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConstant:
      case Op::kLeakyReluMask:
      case Op::kClampMask:
        return;
      case Op::kAdd:
        accumulate(adj, n.a, g);
        accumulate(adj, n.b, g);
        return;
      case Op::kSub:
        accumulate(adj, n.a, g);
        accumulate(adj, n.b, neg(g));
        return;
      case Op::kNeg:
        accumulate(adj, n.a, neg(g));
        return;
      case Op::kMul:
        accumulate(adj, n.a, mul(g, n.b));
        accumulate(adj, n.b, mul(g, n.a));
        return;
      case Op::kDiv:
        accumulate(adj, n.a, div(g, n.b));
        accumulate(adj, n.b, neg(mul(g, div(i, n.b))));
        return;
      case Op::kScale:
        accumulate(adj, n.a, scale(g, n.attr0));
        return;
      case Op::kMatmul:
        accumulate(adj, n.a, matmul(g, transpose(n.b)));
        accumulate(adj, n.b, matmul(transpose(n.a), g));
        return;
      case Op::kTranspose:
        accumulate(adj, n.a, transpose(g));
        return;
      case Op::kLeakyRelu:
        accumulate(adj, n.a, mul(g, mask_leaky_relu(n.a, n.attr0)));
        return;
      case Op::kSigmoid:
        accumulate(adj, n.a, mul(g, mul(i, sub(ones_like(i), i))));
        return;
      case Op::kTanh:
        accumulate(adj, n.a, mul(g, sub(ones_like(i), mul(i, i))));
        return;
      case Op::kExp:
        accumulate(adj, n.a, mul(g, i));
        return;
      case Op::kLog:
        accumulate(adj, n.a, div(g, n.a));
        return;
      case Op::kSqrt:
        accumulate(adj, n.a, scale(div(g, i), 0.5));
        return;
      case Op::kSin:
        accumulate(adj, n.a, mul(g, cos(n.a)));
        return;
      case Op::kCos:
        accumulate(adj, n.a, neg(mul(g, sin(n.a))));
        return;
      case Op::kClamp:
        accumulate(adj, n.a, mul(g, mask_clamp(n.a, n.attr0, n.attr1)));
        return;
      case Op::kSumAll: {
        const Tensor& in = nodes_[n.a].value;
        accumulate(adj, n.a, broadcast_scalar(g, in.rows(), in.cols()));
        return;
      }
      case Op::kRowSum: {
        accumulate(adj, n.a, broadcast_cols(g, nodes_[n.a].value.cols()));
        return;
      }
      case Op::kColSum: {
        accumulate(adj, n.a, broadcast_rows(g, nodes_[n.a].value.rows()));
        return;
      }
      case Op::kBroadcastScalar:
        accumulate(adj, n.a, sum_all(g));
        return;
      case Op::kBroadcastCols:
        accumulate(adj, n.a, row_sum(g));
        return;
      case Op::kBroadcastRows:
        accumulate(adj, n.a, col_sum(g));
        return;
      case Op::kGatherRows: {
        accumulate(adj, n.a, scatter_rows(g, n.indices, nodes_[n.a].value.rows()));
        return;
      }
      case Op::kScatterRows:
        accumulate(adj, n.a, gather_rows(g, n.indices));
        return;
      case Op::kConcatRows: {
        const std::size_t ra = nodes_[n.a].value.rows();
        const std::size_t rb = nodes_[n.b].value.rows();
        std::vector<std::size_t> top(ra), bottom(rb);
        for (std::size_t r = 0; r < ra; ++r) top[r] = r;
        for (std::size_t r = 0; r < rb; ++r) bottom[r] = ra + r;
        accumulate(adj, n.a, gather_rows(g, std::move(top)));
        accumulate(adj, n.b, gather_rows(g, std::move(bottom)));
        return;
      }
    }
  }

  static const char* op_name(Op op) {
    switch (op) {
      case Op::kLeaf: return "leaf";
      case Op::kConstant: return "constant";
      case Op::kAdd: return "add";
      case Op::kSub: return "sub";
      case Op::kNeg: return "neg";
      case Op::kMul: return "mul";
      case Op::kDiv: return "div";
      case Op::kScale: return "scale";
      case Op::kMatmul: return "matmul";
      case Op::kTranspose: return "transpose";
      case Op::kLeakyRelu: return "leaky_relu";
      case Op::kLeakyReluMask: return "leaky_relu_mask";
      case Op::kSigmoid: return "sigmoid";
      case Op::kTanh: return "tanh";
      case Op::kExp: return "exp";
      case Op::kLog: return "log";
      case Op::kSqrt: return "sqrt";
      case Op::kSin: return "sin";
      case Op::kCos: return "cos";
      case Op::kClamp: return "clamp";
      case Op::kClampMask: return "clamp_mask";
      case Op::kSumAll: return "sum_all";
      case Op::kRowSum: return "row_sum";
      case Op::kColSum: return "col_sum";
      case Op::kBroadcastScalar: return "broadcast_scalar";
      case Op::kBroadcastCols: return "broadcast_cols";
      case Op::kBroadcastRows: return "broadcast_rows";
      case Op::kGatherRows: return "gather_rows";
      case Op::kScatterRows: return "scatter_rows";
      case Op::kConcatRows: return "concat_rows";
    }
    return "?";
  }

  static Tensor eval_op(const TapeNode& n, const Tensor* A, const Tensor* B) {
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConstant:
        return n.value;
      case Op::kAdd: {
        require(A->same_shape(*B), "add: shape mismatch");
        Tensor out = *A;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B->data[i];
        return out;
      }
      case Op::kSub: {
        require(A->same_shape(*B), "sub: shape mismatch");
        Tensor out = *A;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= B->data[i];
        return out;
      }
      case Op::kNeg: {
        Tensor out = *A;
        for (double& v : out.data) v = -v;
        return out;
      }
      case Op::kMul: {
        require(A->same_shape(*B), "mul: shape mismatch");
        Tensor out = *A;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= B->data[i];
        return out;
      }
      case Op::kDiv: {
        require(A->same_shape(*B), "div: shape mismatch");
        Tensor out = *A;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] /= B->data[i];
        return out;
      }
      case Op::kScale: {
        Tensor out = *A;
        for (double& v : out.data) v *= n.attr0;
        return out;
      }
      case Op::kMatmul: {
        require(A->cols() == B->rows(), "matmul: inner dimension mismatch");
        const std::size_t m = A->rows(), k = A->cols(), c = B->cols();
        Tensor out(m, c);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double a = A->data[i * k + p];
            if (a == 0.0) continue;
            const double* brow = &B->data[p * c];
            double* orow = &out.data[i * c];
            for (std::size_t j = 0; j < c; ++j) orow[j] += a * brow[j];
          }
        }
        return out;
      }
      case Op::kTranspose: {
        Tensor out(A->cols(), A->rows());
        for (std::size_t i = 0; i < A->rows(); ++i)
          for (std::size_t j = 0; j < A->cols(); ++j) out.at(j, i) = A->at(i, j);
        return out;
      }
      case Op::kLeakyRelu: {
        Tensor out = *A;
        for (double& v : out.data) v = v >= 0 ? v : n.attr0 * v;
        return out;
      }
      case Op::kLeakyReluMask: {
        Tensor out = *A;
        for (double& v : out.data) v = v >= 0 ? 1.0 : n.attr0;
        return out;
      }
      case Op::kSigmoid: {
        Tensor out = *A;
        for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
        return out;
      }
      case Op::kTanh: {
        Tensor out = *A;
        for (double& v : out.data) v = std::tanh(v);
        return out;
      }
      case Op::kExp: {
        Tensor out = *A;
        for (double& v : out.data) v = std::exp(v);
        return out;
      }
      case Op::kLog: {
        Tensor out = *A;
        for (double& v : out.data) v = std::log(v);
        return out;
      }
      case Op::kSqrt: {
        Tensor out = *A;
        for (double& v : out.data) v = std::sqrt(v);
        return out;
      }
      case Op::kSin: {
        Tensor out = *A;
        for (double& v : out.data) v = std::sin(v);
        return out;
      }
      case Op::kCos: {
        Tensor out = *A;
        for (double& v : out.data) v = std::cos(v);
        return out;
      }
      case Op::kClamp: {
        Tensor out = *A;
        for (double& v : out.data) v = std::min(std::max(v, n.attr0), n.attr1);
        return out;
      }
      case Op::kClampMask: {
        Tensor out = *A;
        for (double& v : out.data) v = (v >= n.attr0 && v <= n.attr1) ? 1.0 : 0.0;
        return out;
      }
      case Op::kSumAll: {
        double s = 0;
        for (double v : A->data) s += v;
        return Tensor::scalar(s);
      }
      case Op::kRowSum: {
        Tensor out(A->rows(), 1);
        for (std::size_t i = 0; i < A->rows(); ++i) {
          double s = 0;
          for (std::size_t j = 0; j < A->cols(); ++j) s += A->at(i, j);
          out.at(i, 0) = s;
        }
        return out;
      }
      case Op::kColSum: {
        Tensor out(1, A->cols());
        for (std::size_t j = 0; j < A->cols(); ++j) {
          double s = 0;
          for (std::size_t i = 0; i < A->rows(); ++i) s += A->at(i, j);
          out.at(0, j) = s;
        }
        return out;
      }
      case Op::kBroadcastScalar: {
        require(A->size() == 1, "broadcast_scalar: input must be 1x1");
        return Tensor(n.rows_out, n.cols_out, A->data[0]);
      }
      case Op::kBroadcastCols: {
        require(A->cols() == 1, "broadcast_cols: input must be a column");
        Tensor out(A->rows(), n.cols_out);
        for (std::size_t i = 0; i < A->rows(); ++i)
          for (std::size_t j = 0; j < n.cols_out; ++j) out.at(i, j) = A->at(i, 0);
        return out;
      }
      case Op::kBroadcastRows: {
        require(A->rows() == 1, "broadcast_rows: input must be a row");
        Tensor out(n.rows_out, A->cols());
        for (std::size_t i = 0; i < n.rows_out; ++i)
          for (std::size_t j = 0; j < A->cols(); ++j) out.at(i, j) = A->at(0, j);
        return out;
      }
      case Op::kGatherRows: {
        Tensor out(n.indices.size(), A->cols());
        for (std::size_t r = 0; r < n.indices.size(); ++r) {
          require(n.indices[r] < A->rows(), "gather_rows: index out of range");
          for (std::size_t j = 0; j < A->cols(); ++j) out.at(r, j) = A->at(n.indices[r], j);
        }
        return out;
      }
      case Op::kScatterRows: {
        require(A->rows() == n.indices.size(), "scatter_rows: index count mismatch");
        Tensor out(n.rows_out, A->cols());
        for (std::size_t r = 0; r < n.indices.size(); ++r) {
          require(n.indices[r] < n.rows_out, "scatter_rows: index out of range");
          for (std::size_t j = 0; j < A->cols(); ++j) out.at(n.indices[r], j) += A->at(r, j);
        }
        return out;
      }
      case Op::kConcatRows: {
        require(A->cols() == B->cols(), "concat_rows: column mismatch");
        Tensor out(A->rows() + B->rows(), A->cols());
        for (std::size_t i = 0; i < A->rows(); ++i)
          for (std::size_t j = 0; j < A->cols(); ++j) out.at(i, j) = A->at(i, j);
        for (std::size_t i = 0; i < B->rows(); ++i)
          for (std::size_t j = 0; j < B->cols(); ++j) out.at(A->rows() + i, j) = B->at(i, j);
        return out;
      }
    }
    throw ValidationError("tape: unknown op");
  }
};

}  // namespace ace
