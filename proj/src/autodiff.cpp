#include "ba/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace ba::ad {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;

Eigen::Index numel(const Shape& s) {
  Eigen::Index n = 1;
  for (const auto d : s) n *= d;
  return n;
}

void check_finite(const char* kind, const Eigen::ArrayXd& v) {
  if (!v.allFinite()) {
    throw NumericError(std::string("non-finite value produced by op '") +
                       kind + "'");
  }
}

void check_same_shape(const char* kind, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string("op '") + kind + "': shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

NodePtr make_node(const char* kind, Shape shape, Eigen::ArrayXd value,
                  std::vector<NodePtr> parents,
                  std::function<void(Node&)> backprop) {
  check_finite(kind, value);
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->backprop = std::move(backprop);
  return n;
}

}  // namespace

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

void Node::accumulate(const Eigen::ArrayXd& g) {
  if (!has_grad) {
    grad = Eigen::ArrayXd::Zero(value.size());
    has_grad = true;
  }
  grad += g;
}

Tensor Tensor::leaf(Shape shape, Eigen::ArrayXd values) {
  if (numel(shape) != values.size()) {
    throw DimensionError("leaf: shape " + shape_str(shape) + " expects " +
                         std::to_string(numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v) {
  return leaf({}, Eigen::ArrayXd::Constant(1, v));
}

Tensor Tensor::zeros(Shape shape) {
  const auto n = numel(shape);
  return leaf(std::move(shape), Eigen::ArrayXd::Zero(n));
}

Tensor Tensor::ones(Shape shape) {
  const auto n = numel(shape);
  return leaf(std::move(shape), Eigen::ArrayXd::Ones(n));
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item(): tensor is not scalar, shape " +
                        shape_str(shape()));
  }
  return node_->value[0];
}

const Eigen::ArrayXd& Tensor::grad() const {
  if (!node_->has_grad) throw ContractError("grad(): gradient not populated");
  return node_->grad;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  auto n = make_node("add", a.shape(), a.values() + b.values(),
                     {a.node(), b.node()}, [](Node& self) {
                       self.parents[0]->accumulate(self.grad);
                       self.parents[1]->accumulate(self.grad);
                     });
  return Tensor(std::move(n));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("subtract", a, b);
  auto n = make_node("subtract", a.shape(), a.values() - b.values(),
                     {a.node(), b.node()}, [](Node& self) {
                       self.parents[0]->accumulate(self.grad);
                       self.parents[1]->accumulate(-self.grad);
                     });
  return Tensor(std::move(n));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("elementwise-multiply", a, b);
  auto n = make_node("elementwise-multiply", a.shape(),
                     a.values() * b.values(), {a.node(), b.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(self.grad *
                                                   self.parents[1]->value);
                       self.parents[1]->accumulate(self.grad *
                                                   self.parents[0]->value);
                     });
  return Tensor(std::move(n));
}

Tensor div(const Tensor& a, const Tensor& b) {
  const bool scalar_denom = b.size() == 1;
  if (!scalar_denom) check_same_shape("divide", a, b);
  if ((b.values() == 0.0).any()) {
    throw DomainError("divide: zero denominator entry");
  }
  Eigen::ArrayXd out =
      scalar_denom ? (a.values() / b.values()[0]).eval()
                   : (a.values() / b.values()).eval();
  auto n = make_node(
      "divide", a.shape(), std::move(out), {a.node(), b.node()},
      [scalar_denom](Node& self) {
        const auto& av = self.parents[0]->value;
        const auto& bv = self.parents[1]->value;
        if (scalar_denom) {
          const double d = bv[0];
          self.parents[0]->accumulate(self.grad / d);
          Eigen::ArrayXd gb(1);
          gb[0] = -(self.grad * av).sum() / (d * d);
          self.parents[1]->accumulate(gb);
        } else {
          self.parents[0]->accumulate(self.grad / bv);
          self.parents[1]->accumulate(-self.grad * av / (bv * bv));
        }
      });
  return Tensor(std::move(n));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || (b.rank() != 1 && b.rank() != 2)) {
    throw DimensionError("matrix-multiply: need (m,n) x (n[,p]), got " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const Eigen::Index m = a.shape()[0], k = a.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matrix-multiply: inner dimensions disagree, " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  CMapMat am(a.values().data(), m, k);
  if (b.rank() == 1) {
    CMapVec bv(b.values().data(), k);
    Eigen::ArrayXd out(m);
    MapVec(out.data(), m) = am * bv;
    auto n = make_node(
        "matrix-multiply", {m}, std::move(out), {a.node(), b.node()},
        [m, k](Node& self) {
          CMapMat A(self.parents[0]->value.data(), m, k);
          CMapVec x(self.parents[1]->value.data(), k);
          CMapVec g(self.grad.data(), m);
          Eigen::ArrayXd ga(m * k);
          MapMat(ga.data(), m, k) = g * x.transpose();
          self.parents[0]->accumulate(ga);
          Eigen::ArrayXd gb(k);
          MapVec(gb.data(), k) = A.transpose() * g;
          self.parents[1]->accumulate(gb);
        });
    return Tensor(std::move(n));
  }
  const Eigen::Index p = b.shape()[1];
  CMapMat bm(b.values().data(), k, p);
  Eigen::ArrayXd out(m * p);
  MapMat(out.data(), m, p) = am * bm;
  auto n = make_node(
      "matrix-multiply", {m, p}, std::move(out), {a.node(), b.node()},
      [m, k, p](Node& self) {
        CMapMat A(self.parents[0]->value.data(), m, k);
        CMapMat B(self.parents[1]->value.data(), k, p);
        CMapMat G(self.grad.data(), m, p);
        Eigen::ArrayXd ga(m * k);
        MapMat(ga.data(), m, k) = G * B.transpose();
        self.parents[0]->accumulate(ga);
        Eigen::ArrayXd gb(k * p);
        MapMat(gb.data(), k, p) = A.transpose() * G;
        self.parents[1]->accumulate(gb);
      });
  return Tensor(std::move(n));
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concatenate: no inputs");
  Eigen::Index total = 0;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    if (p.rank() > 1) {
      throw DimensionError("concatenate: only vectors supported, got " +
                           shape_str(p.shape()));
    }
    total += p.size();
    parents.push_back(p.node());
  }
  Eigen::ArrayXd out(total);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.segment(off, p.size()) = p.values();
    off += p.size();
  }
  auto n = make_node("concatenate", {total}, std::move(out),
                     std::move(parents), [](Node& self) {
                       Eigen::Index off = 0;
                       for (auto& p : self.parents) {
                         p->accumulate(self.grad.segment(off, p->size()));
                         off += p->size();
                       }
                     });
  return Tensor(std::move(n));
}

Tensor slice(const Tensor& x, Eigen::Index start, Eigen::Index len) {
  if (x.rank() != 1) {
    throw DimensionError("slice: only vectors supported, got " +
                         shape_str(x.shape()));
  }
  if (start < 0 || len < 0 || start + len > x.size()) {
    throw DimensionError("slice: range [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") out of bounds for " +
                         shape_str(x.shape()));
  }
  auto n = make_node("slice", {len}, x.values().segment(start, len),
                     {x.node()}, [start, len](Node& self) {
                       Eigen::ArrayXd g =
                           Eigen::ArrayXd::Zero(self.parents[0]->size());
                       g.segment(start, len) = self.grad;
                       self.parents[0]->accumulate(g);
                     });
  return Tensor(std::move(n));
}

Tensor tanh(const Tensor& x) {
  auto n = make_node("tanh", x.shape(), x.values().tanh(), {x.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(
                           self.grad * (1.0 - self.value.square()));
                     });
  return Tensor(std::move(n));
}

Tensor relu(const Tensor& x) {
  auto n = make_node("relu", x.shape(), x.values().max(0.0), {x.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(
                           self.grad *
                           (self.parents[0]->value > 0.0).cast<double>());
                     });
  return Tensor(std::move(n));
}

Tensor sigmoid(const Tensor& x) {
  Eigen::ArrayXd out = 1.0 / (1.0 + (-x.values()).exp());
  auto n = make_node("sigmoid", x.shape(), std::move(out), {x.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(
                           self.grad * self.value * (1.0 - self.value));
                     });
  return Tensor(std::move(n));
}

Tensor softmax(const Tensor& x) {
  if (x.rank() != 1) {
    throw DimensionError("softmax: expects a vector, got " +
                         shape_str(x.shape()));
  }
  Eigen::ArrayXd e = (x.values() - x.values().maxCoeff()).exp();
  e /= e.sum();
  auto n = make_node("softmax", x.shape(), std::move(e), {x.node()},
                     [](Node& self) {
                       const auto& p = self.value;
                       const double dot = (self.grad * p).sum();
                       self.parents[0]->accumulate(p * (self.grad - dot));
                     });
  return Tensor(std::move(n));
}

Tensor sum(const Tensor& x) {
  Eigen::ArrayXd out(1);
  out[0] = x.values().sum();
  auto n = make_node("sum", {}, std::move(out), {x.node()}, [](Node& self) {
    self.parents[0]->accumulate(Eigen::ArrayXd::Constant(
        self.parents[0]->size(), self.grad[0]));
  });
  return Tensor(std::move(n));
}

Tensor mean(const Tensor& x) {
  Eigen::ArrayXd out(1);
  out[0] = x.values().mean();
  auto n = make_node("mean", {}, std::move(out), {x.node()}, [](Node& self) {
    const double g = self.grad[0] / static_cast<double>(self.parents[0]->size());
    self.parents[0]->accumulate(
        Eigen::ArrayXd::Constant(self.parents[0]->size(), g));
  });
  return Tensor(std::move(n));
}

Tensor square(const Tensor& x) {
  auto n = make_node("square", x.shape(), x.values().square(), {x.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(self.grad * 2.0 *
                                                   self.parents[0]->value);
                     });
  return Tensor(std::move(n));
}

Tensor sqrt(const Tensor& x) {
  if ((x.values() < 0.0).any()) {
    throw DomainError("sqrt: negative entry");
  }
  auto n = make_node("sqrt", x.shape(), x.values().sqrt(), {x.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(self.grad /
                                                   (2.0 * self.value));
                     });
  return Tensor(std::move(n));
}

Tensor log(const Tensor& x) {
  if ((x.values() <= 0.0).any()) {
    throw DomainError("log: non-positive entry");
  }
  auto n = make_node("log", x.shape(), x.values().log(), {x.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(self.grad /
                                                   self.parents[0]->value);
                     });
  return Tensor(std::move(n));
}

Tensor l2_norm(const Tensor& x) {
  Eigen::ArrayXd out(1);
  out[0] = std::sqrt(x.values().square().sum());
  if (out[0] == 0.0) {
    throw DomainError("l2-norm: zero vector has no differentiable norm");
  }
  auto n = make_node("l2-norm", {}, std::move(out), {x.node()},
                     [](Node& self) {
                       self.parents[0]->accumulate(
                           self.grad[0] * self.parents[0]->value /
                           self.value[0]);
                     });
  return Tensor(std::move(n));
}

Tensor scale(const Tensor& x, double c) {
  auto n = make_node("scale", x.shape(), (x.values() * c).eval(), {x.node()},
                     [c](Node& self) {
                       self.parents[0]->accumulate(self.grad * c);
                     });
  return Tensor(std::move(n));
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

void backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, shape " +
                        shape_str(loss.shape()));
  }
  Node* root = loss.node().get();
  if (root->backward_done) {
    throw ContractError("backward: repeated backward without reset");
  }
  root->backward_done = true;

  // Iterative post-order DFS; reverse gives topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->accumulate(Eigen::ArrayXd::Ones(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backprop && node->has_grad) node->backprop(*node);
  }
}

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f,
                         const Tensor& x, double step) {
  if (step <= 0) throw ContractError("finite_diff_check: step must be > 0");
  Tensor xt = x;  // shared node; f re-evaluates on the same leaf
  xt.clear_grad();
  Tensor loss = f(xt);
  if (loss.size() != 1) {
    throw ContractError("finite_diff_check: f must return a scalar");
  }
  backward(loss);
  Eigen::ArrayXd g = xt.has_grad()
                         ? xt.grad()
                         : Eigen::ArrayXd::Zero(xt.size()).eval();

  double max_rel = 0.0;
  for (Eigen::Index i = 0; i < xt.size(); ++i) {
    const double orig = xt.values_mutable()[i];
    xt.values_mutable()[i] = orig + step;
    const double fp = f(xt).item();
    xt.values_mutable()[i] = orig - step;
    const double fm = f(xt).item();
    xt.values_mutable()[i] = orig;
    const double d = (fp - fm) / (2.0 * step);
    const double denom = std::max({std::abs(d), std::abs(g[i]), 1e-8});
    max_rel = std::max(max_rel, std::abs(g[i] - d) / denom);
  }
  return max_rel;
}

ComplexTensor make_complex(const Eigen::MatrixXcd& m) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  Eigen::ArrayXd re(rows * cols), im(rows * cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      re[r * cols + c] = m(r, c).real();
      im[r * cols + c] = m(r, c).imag();
    }
  }
  return {Tensor::leaf({rows, cols}, std::move(re)),
          Tensor::leaf({rows, cols}, std::move(im))};
}

ComplexTensor make_complex(const Eigen::VectorXcd& v) {
  const Eigen::Index n = v.size();
  Eigen::ArrayXd re(n), im(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return {Tensor::leaf({n}, std::move(re)), Tensor::leaf({n}, std::move(im))};
}

ComplexTensor complex_zeros(Shape shape) {
  return {Tensor::zeros(shape), Tensor::zeros(std::move(shape))};
}

ComplexTensor cadd(const ComplexTensor& a, const ComplexTensor& b) {
  return {add(a.re, b.re), add(a.im, b.im)};
}

ComplexTensor complex_matvec(const ComplexTensor& m, const ComplexTensor& v) {
  return {sub(matmul(m.re, v.re), matmul(m.im, v.im)),
          add(matmul(m.re, v.im), matmul(m.im, v.re))};
}

ComplexTensor cvdot(const ComplexTensor& w, const ComplexTensor& u) {
  // w^H u = sum(conj(w) .* u)
  Tensor re = add(sum(mul(w.re, u.re)), sum(mul(w.im, u.im)));
  Tensor im = sub(sum(mul(w.re, u.im)), sum(mul(w.im, u.re)));
  return {re, im};
}

Tensor cabs2(const ComplexTensor& z) {
  return add(square(z.re), square(z.im));
}

Eigen::VectorXcd to_eigen_vector(const ComplexTensor& z) {
  const Eigen::Index n = z.re.size();
  Eigen::VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = {z.re.values()[i], z.im.values()[i]};
  }
  return out;
}

Eigen::MatrixXcd to_eigen_matrix(const ComplexTensor& z) {
  if (z.re.rank() != 2) {
    throw DimensionError("to_eigen_matrix: expects rank-2, got " +
                         shape_str(z.re.shape()));
  }
  const Eigen::Index rows = z.re.shape()[0], cols = z.re.shape()[1];
  Eigen::MatrixXcd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = {z.re.values()[r * cols + c], z.im.values()[r * cols + c]};
    }
  }
  return out;
}

}  // namespace ba::ad
