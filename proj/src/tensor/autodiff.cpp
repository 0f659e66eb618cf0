#include "autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

namespace s2gsl {

void Node::accumulate(const Matrix& g) {
  if (grad.size() == 0 && value.size() != 0) grad = Matrix(value.rows(), value.cols());
  add_inplace(grad, g);
}

void Node::zero_grad() { grad = Matrix(value.rows(), value.cols()); }

Var parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->grad = Matrix(value.rows(), value.cols());
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

Var constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

namespace {

Var make_node(Matrix value, std::vector<Var> parents, std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  const bool req = std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p->requires_grad; });
  if (req) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(bw);
  }
  return n;
}

void require_same(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b))
    throw ValidationError(std::string(op) + " shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
}

template <typename F>
Matrix map(const Matrix& m, F f) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = f(m[i]);
  return out;
}

}  // namespace

void backward(const Var& loss) {
  if (loss->value.rows() != 1 || loss->value.cols() != 1)
    throw ValidationError("backward requires a scalar loss, got " + loss->value.shape_str());
  if (!loss->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward_fn) n->zero_grad();
    else if (n->grad.size() != n->value.size()) n->zero_grad();
  }
  loss->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

namespace ad {

Var matmul(const Var& a, const Var& b) {
  return make_node(s2gsl::matmul(a->value, b->value), {a, b}, [](Node& n) {
    auto& a = n.parents[0];
    auto& b = n.parents[1];
    if (a->requires_grad) a->accumulate(matmul_nt(n.grad, b->value));
    if (b->requires_grad) b->accumulate(matmul_tn(a->value, n.grad));
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  return make_node(s2gsl::matmul_nt(a->value, b->value), {a, b}, [](Node& n) {
    auto& a = n.parents[0];
    auto& b = n.parents[1];
    if (a->requires_grad) a->accumulate(s2gsl::matmul(n.grad, b->value));
    if (b->requires_grad) b->accumulate(matmul_tn(n.grad, a->value));
  });
}

Var transpose(const Var& a) {
  return make_node(a->value.transpose(), {a}, [](Node& n) { n.parents[0]->accumulate(n.grad.transpose()); });
}

Var add(const Var& a, const Var& b) {
  require_same(a->value, b->value, "add");
  Matrix v = a->value;
  add_inplace(v, b->value);
  return make_node(std::move(v), {a, b}, [](Node& n) {
    for (auto& p : n.parents)
      if (p->requires_grad) p->accumulate(n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a->value, b->value, "sub");
  Matrix v = a->value;
  add_inplace(v, b->value, -1.0);
  return make_node(std::move(v), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad);
    if (n.parents[1]->requires_grad) {
      Matrix g = n.grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = -g[i];
      n.parents[1]->accumulate(g);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a->value, b->value, "mul");
  Matrix v(a->value.rows(), a->value.cols());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a->value[i] * b->value[i];
  return make_node(std::move(v), {a, b}, [](Node& n) {
    auto& a = n.parents[0];
    auto& b = n.parents[1];
    if (a->requires_grad) {
      Matrix g(n.grad.rows(), n.grad.cols());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * b->value[i];
      a->accumulate(g);
    }
    if (b->requires_grad) {
      Matrix g(n.grad.rows(), n.grad.cols());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * a->value[i];
      b->accumulate(g);
    }
  });
}

Var mul_const(const Var& a, const Matrix& c) {
  require_same(a->value, c, "mul_const");
  Matrix v(c.rows(), c.cols());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a->value[i] * c[i];
  return make_node(std::move(v), {a}, [c](Node& n) {
    Matrix g(c.rows(), c.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * c[i];
    n.parents[0]->accumulate(g);
  });
}

Var affine(const Var& a, double scale, double shift) {
  return make_node(map(a->value, [=](double x) { return scale * x + shift; }), {a}, [scale](Node& n) {
    n.parents[0]->accumulate(map(n.grad, [=](double g) { return scale * g; }));
  });
}

Var scale_by(const Var& a, const Var& s) {
  if (s->value.size() != 1) throw ValidationError("scale_by expects a 1x1 scale, got " + s->value.shape_str());
  const double k = s->value[0];
  return make_node(map(a->value, [=](double x) { return k * x; }), {a, s}, [](Node& n) {
    auto& a = n.parents[0];
    auto& s = n.parents[1];
    const double k = s->value[0];
    if (a->requires_grad) a->accumulate(map(n.grad, [=](double g) { return k * g; }));
    if (s->requires_grad) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n.grad.size(); ++i) acc += n.grad[i] * a->value[i];
      s->accumulate(Matrix(1, 1, acc));
    }
  });
}

Var add_row_bias(const Var& x, const Var& bias) {
  if (bias->value.rows() != 1 || bias->value.cols() != x->value.cols())
    throw ValidationError("bias shape " + bias->value.shape_str() + " does not match " + x->value.shape_str());
  Matrix v = x->value;
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) += bias->value[c];
  return make_node(std::move(v), {x, bias}, [](Node& n) {
    auto& x = n.parents[0];
    auto& b = n.parents[1];
    if (x->requires_grad) x->accumulate(n.grad);
    if (b->requires_grad) {
      Matrix g(1, n.grad.cols());
      for (std::size_t r = 0; r < n.grad.rows(); ++r)
        for (std::size_t c = 0; c < n.grad.cols(); ++c) g[c] += n.grad(r, c);
      b->accumulate(g);
    }
  });
}

Var relu(const Var& a) {
  return make_node(map(a->value, [](double x) { return x > 0.0 ? x : 0.0; }), {a}, [](Node& n) {
    const Matrix& x = n.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = x[i] > 0.0 ? n.grad[i] : 0.0;
    n.parents[0]->accumulate(g);
  });
}

Var sigmoid(const Var& a) {
  auto sig = [](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  return make_node(map(a->value, sig), {a}, [](Node& n) {
    Matrix g(n.value.rows(), n.value.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * n.value[i] * (1.0 - n.value[i]);
    n.parents[0]->accumulate(g);
  });
}

Var exp(const Var& a) {
  return make_node(map(a->value, [](double x) { return std::exp(x); }), {a}, [](Node& n) {
    Matrix g(n.value.rows(), n.value.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * n.value[i];
    n.parents[0]->accumulate(g);
  });
}

Var log(const Var& a) {
  return make_node(map(a->value, [](double x) { return std::log(x); }), {a}, [](Node& n) {
    const Matrix& x = n.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] / x[i];
    n.parents[0]->accumulate(g);
  });
}

Var clamp(const Var& a, double lo, double hi) {
  return make_node(map(a->value, [=](double x) { return std::clamp(x, lo, hi); }), {a}, [lo, hi](Node& n) {
    const Matrix& x = n.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (x[i] >= lo && x[i] <= hi) ? n.grad[i] : 0.0;
    n.parents[0]->accumulate(g);
  });
}

Var softmax_rows(const Var& x, const Matrix* additive_mask) {
  const Matrix& in = x->value;
  if (additive_mask) require_same(in, *additive_mask, "softmax mask");
  Matrix y(in.rows(), in.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < in.cols(); ++c) {
      const double v = in(r, c) + (additive_mask ? (*additive_mask)(r, c) : 0.0);
      y(r, c) = v;
      mx = std::max(mx, v);
    }
    double z = 0.0;
    for (std::size_t c = 0; c < in.cols(); ++c) {
      y(r, c) = std::exp(y(r, c) - mx);
      z += y(r, c);
    }
    for (std::size_t c = 0; c < in.cols(); ++c) y(r, c) /= z;
  }
  return make_node(std::move(y), {x}, [](Node& n) {
    const Matrix& y = n.value;
    Matrix g(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += n.grad(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) g(r, c) = y(r, c) * (n.grad(r, c) - dot);
    }
    n.parents[0]->accumulate(g);
  });
}

Var sum(const Var& a) {
  return make_node(Matrix(1, 1, a->value.sum()), {a}, [](Node& n) {
    const Matrix& x = n.parents[0]->value;
    n.parents[0]->accumulate(Matrix(x.rows(), x.cols(), n.grad[0]));
  });
}

Var mean(const Var& a) {
  const double cnt = static_cast<double>(a->value.size());
  return make_node(Matrix(1, 1, a->value.sum() / cnt), {a}, [cnt](Node& n) {
    const Matrix& x = n.parents[0]->value;
    n.parents[0]->accumulate(Matrix(x.rows(), x.cols(), n.grad[0] / cnt));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ValidationError("concat of zero parts");
  const std::size_t rows = parts[0]->value.rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p->value.rows() != rows) throw ValidationError("concat_cols row mismatch");
    cols += p->value.cols();
  }
  Matrix v(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < p->value.cols(); ++c) v(r, off + c) = p->value(r, c);
    off += p->value.cols();
  }
  return make_node(std::move(v), std::vector<Var>(parts.begin(), parts.end()), [](Node& n) {
    std::size_t off = 0;
    for (auto& p : n.parents) {
      const std::size_t pc = p->value.cols();
      if (p->requires_grad) {
        Matrix g(n.grad.rows(), pc);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < pc; ++c) g(r, c) = n.grad(r, off + c);
        p->accumulate(g);
      }
      off += pc;
    }
  });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
  if (c0 > c1 || c1 > a->value.cols()) throw ValidationError("slice_cols out of range");
  Matrix v(a->value.rows(), c1 - c0);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = c0; c < c1; ++c) v(r, c - c0) = a->value(r, c);
  return make_node(std::move(v), {a}, [c0](Node& n) {
    const Matrix& x = n.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    for (std::size_t r = 0; r < n.grad.rows(); ++r)
      for (std::size_t c = 0; c < n.grad.cols(); ++c) g(r, c0 + c) = n.grad(r, c);
    n.parents[0]->accumulate(g);
  });
}

Var mean_rows(const Var& a, std::size_t r0, std::size_t r1) {
  if (r0 > r1 || r1 >= a->value.rows()) throw ValidationError("mean_rows range out of bounds");
  const double cnt = static_cast<double>(r1 - r0 + 1);
  Matrix v(1, a->value.cols());
  for (std::size_t r = r0; r <= r1; ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) v[c] += a->value(r, c);
  for (std::size_t c = 0; c < v.cols(); ++c) v[c] /= cnt;
  return make_node(std::move(v), {a}, [r0, r1, cnt](Node& n) {
    const Matrix& x = n.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    for (std::size_t r = r0; r <= r1; ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) g(r, c) = n.grad[c] / cnt;
    n.parents[0]->accumulate(g);
  });
}

Var broadcast_rows(const Var& row, std::size_t n_rows) {
  if (row->value.rows() != 1) throw ValidationError("broadcast_rows expects a row vector");
  Matrix v(n_rows, row->value.cols());
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) = row->value[c];
  return make_node(std::move(v), {row}, [](Node& n) {
    Matrix g(1, n.grad.cols());
    for (std::size_t r = 0; r < n.grad.rows(); ++r)
      for (std::size_t c = 0; c < n.grad.cols(); ++c) g[c] += n.grad(r, c);
    n.parents[0]->accumulate(g);
  });
}

Var col_sums(const Var& a) {
  Matrix v(1, a->value.cols());
  for (std::size_t r = 0; r < a->value.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) v[c] += a->value(r, c);
  return make_node(std::move(v), {a}, [](Node& n) {
    const Matrix& x = n.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) g(r, c) = n.grad[c];
    n.parents[0]->accumulate(g);
  });
}

Var diag_to_row(const Var& a) {
  if (a->value.rows() != a->value.cols()) throw ValidationError("diag_to_row on non-square matrix");
  const std::size_t n = a->value.rows();
  Matrix v(1, n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a->value(i, i);
  return make_node(std::move(v), {a}, [](Node& nd) {
    const std::size_t n = nd.grad.cols();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) g(i, i) = nd.grad[i];
    nd.parents[0]->accumulate(g);
  });
}

Var row_to_diag(const Var& row) {
  if (row->value.rows() != 1) throw ValidationError("row_to_diag expects a row vector");
  const std::size_t n = row->value.cols();
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = row->value[i];
  return make_node(std::move(v), {row}, [](Node& nd) {
    const std::size_t n = nd.grad.rows();
    Matrix g(1, n);
    for (std::size_t i = 0; i < n; ++i) g[i] = nd.grad(i, i);
    nd.parents[0]->accumulate(g);
  });
}

Var replace_row(const Var& a, std::size_t r, const Var& row) {
  if (r >= a->value.rows() || row->value.rows() != 1 || row->value.cols() != a->value.cols())
    throw ValidationError("replace_row shape mismatch");
  Matrix v = a->value;
  for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) = row->value[c];
  return make_node(std::move(v), {a, row}, [r](Node& n) {
    auto& a = n.parents[0];
    auto& row = n.parents[1];
    if (a->requires_grad) {
      Matrix g = n.grad;
      for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) = 0.0;
      a->accumulate(g);
    }
    if (row->requires_grad) {
      Matrix g(1, n.grad.cols());
      for (std::size_t c = 0; c < g.cols(); ++c) g[c] = n.grad(r, c);
      row->accumulate(g);
    }
  });
}

Var pick(const Var& a, std::size_t r, std::size_t c) {
  if (r >= a->value.rows() || c >= a->value.cols()) throw ValidationError("pick out of range");
  return make_node(Matrix(1, 1, a->value(r, c)), {a}, [r, c](Node& n) {
    const Matrix& x = n.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    g(r, c) = n.grad[0];
    n.parents[0]->accumulate(g);
  });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& offset, double eps) {
  const Matrix& in = x->value;
  const std::size_t rows = in.rows(), cols = in.cols();
  if (gain->value.rows() != 1 || gain->value.cols() != cols || !gain->value.same_shape(offset->value))
    throw ValidationError("layer_norm gain/offset shape mismatch");
  // xhat and per-row inverse std are kept for the backward pass.
  auto xhat = std::make_shared<Matrix>(rows, cols);
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Matrix v(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += in(r, c);
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (in(r, c) - mu) * (in(r, c) - mu);
    var /= static_cast<double>(cols);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < cols; ++c) {
      (*xhat)(r, c) = (in(r, c) - mu) * is;
      v(r, c) = (*xhat)(r, c) * gain->value[c] + offset->value[c];
    }
  }
  return make_node(std::move(v), {x, gain, offset}, [xhat, inv_std](Node& n) {
    auto& x = n.parents[0];
    auto& gain = n.parents[1];
    auto& offset = n.parents[2];
    const std::size_t rows = n.grad.rows(), cols = n.grad.cols();
    if (gain->requires_grad || offset->requires_grad) {
      Matrix gg(1, cols), go(1, cols);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
          gg[c] += n.grad(r, c) * (*xhat)(r, c);
          go[c] += n.grad(r, c);
        }
      if (gain->requires_grad) gain->accumulate(gg);
      if (offset->requires_grad) offset->accumulate(go);
    }
    if (x->requires_grad) {
      Matrix g(rows, cols);
      const double inv_n = 1.0 / static_cast<double>(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          const double dxh = n.grad(r, c) * gain->value[c];
          s1 += dxh;
          s2 += dxh * (*xhat)(r, c);
        }
        for (std::size_t c = 0; c < cols; ++c) {
          const double dxh = n.grad(r, c) * gain->value[c];
          g(r, c) = (*inv_std)[r] * (dxh - inv_n * s1 - (*xhat)(r, c) * inv_n * s2);
        }
      }
      x->accumulate(g);
    }
  });
}

Var inverse(const Var& a, double pivot_tol) {
  return make_node(s2gsl::inverse(a->value, pivot_tol), {a}, [](Node& n) {
    // d(A^-1) = -A^-1 dA A^-1  =>  dL/dA = -A^-T G A^-T
    const Matrix inv_t = n.value.transpose();
    Matrix g = s2gsl::matmul(s2gsl::matmul(inv_t, n.grad), inv_t);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -g[i];
    n.parents[0]->accumulate(g);
  });
}

Var gather_rows(const Var& table, std::span<const std::size_t> ids, bool zero_id0) {
  const Matrix& t = table->value;
  const std::size_t shift = zero_id0 ? 1 : 0;
  Matrix v(ids.size(), t.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= t.rows() + shift)
      throw ValidationError("gather id " + std::to_string(ids[i]) + " out of range for table with " +
                            std::to_string(t.rows()) + " rows");
    if (zero_id0 && ids[i] == 0) continue;
    for (std::size_t c = 0; c < t.cols(); ++c) v(i, c) = t(ids[i] - shift, c);
  }
  std::vector<std::size_t> idv(ids.begin(), ids.end());
  return make_node(std::move(v), {table}, [idv = std::move(idv), zero_id0, shift](Node& n) {
    const Matrix& t = n.parents[0]->value;
    Matrix g(t.rows(), t.cols());
    for (std::size_t i = 0; i < idv.size(); ++i) {
      if (zero_id0 && idv[i] == 0) continue;
      for (std::size_t c = 0; c < t.cols(); ++c) g(idv[i] - shift, c) += n.grad(i, c);
    }
    n.parents[0]->accumulate(g);
  });
}

Var column_as_square(const Var& a, std::size_t col, std::size_t n) {
  if (a->value.rows() != n * n || col >= a->value.cols())
    throw ValidationError("column_as_square shape mismatch: " + a->value.shape_str());
  Matrix v(n, n);
  for (std::size_t i = 0; i < n * n; ++i) v[i] = a->value(i, col);
  return make_node(std::move(v), {a}, [col](Node& nd) {
    const Matrix& x = nd.parents[0]->value;
    Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < nd.grad.size(); ++i) g(i, col) = nd.grad[i];
    nd.parents[0]->accumulate(g);
  });
}

Var bce_logits_mean(const Var& logits, const Matrix& targets) {
  require_same(logits->value, targets, "bce_logits");
  const Matrix& z = logits->value;
  const double cnt = static_cast<double>(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    // -[y ln s(z) + (1-y) ln(1-s(z))] = softplus(z) - y z
    const double sp = std::max(z[i], 0.0) + std::log1p(std::exp(-std::abs(z[i])));
    total += sp - targets[i] * z[i];
  }
  return make_node(Matrix(1, 1, total / cnt), {logits}, [targets, cnt](Node& n) {
    const Matrix& z = n.parents[0]->value;
    Matrix g(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = z[i] >= 0 ? 1.0 / (1.0 + std::exp(-z[i])) : std::exp(z[i]) / (1.0 + std::exp(z[i]));
      g[i] = n.grad[0] * (s - targets[i]) / cnt;
    }
    n.parents[0]->accumulate(g);
  });
}

Var bce_prob_sum(const Var& probs, const Matrix& targets, double eps) {
  require_same(probs->value, targets, "bce_prob");
  const Matrix& p = probs->value;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], eps, 1.0 - eps);
    total -= targets[i] * std::log(q) + (1.0 - targets[i]) * std::log(1.0 - q);
  }
  return make_node(Matrix(1, 1, total), {probs}, [targets, eps](Node& n) {
    const Matrix& p = n.parents[0]->value;
    Matrix g(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] < eps || p[i] > 1.0 - eps) continue;
      g[i] = n.grad[0] * (-targets[i] / p[i] + (1.0 - targets[i]) / (1.0 - p[i]));
    }
    n.parents[0]->accumulate(g);
  });
}

Var neg_log_pick(const Var& probs, std::size_t label, double eps) {
  if (probs->value.rows() != 1 || label >= probs->value.cols())
    throw ValidationError("neg_log_pick expects a probability row and a valid label");
  const double y = probs->value[label];
  return make_node(Matrix(1, 1, -std::log(std::max(y, eps))), {probs}, [label, eps](Node& n) {
    const Matrix& p = n.parents[0]->value;
    Matrix g(1, p.cols());
    if (p[label] >= eps) g[label] = -n.grad[0] / p[label];
    n.parents[0]->accumulate(g);
  });
}

}  // namespace ad
}  // namespace s2gsl
