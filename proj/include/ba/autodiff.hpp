#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ba/errors.hpp"

namespace ba::ad {

using Shape = std::vector<Eigen::Index>;

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the define-by-run computation graph. Values are stored
// flattened in row-major order; matrices are viewed through Eigen maps.
struct Node {
  Shape shape;
  Eigen::ArrayXd value;
  Eigen::ArrayXd grad;
  bool has_grad = false;
  bool backward_done = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backprop;  // pulls this->grad into parents
  const char* kind = "leaf";

  Eigen::Index size() const { return value.size(); }
  bool is_leaf() const { return parents.empty(); }
  void accumulate(const Eigen::ArrayXd& g);
};

// Value-semantics handle to a graph node. Copies share the node, so a leaf
// handed to several ops accumulates gradients additively.
class Tensor {
 public:
  Tensor() = default;

  static Tensor leaf(Shape shape, Eigen::ArrayXd values);
  static Tensor scalar(double v);
  static Tensor zeros(Shape shape);
  static Tensor ones(Shape shape);

  const Shape& shape() const { return node_->shape; }
  Eigen::Index size() const { return node_->value.size(); }
  Eigen::Index rank() const { return static_cast<Eigen::Index>(node_->shape.size()); }
  const Eigen::ArrayXd& values() const { return node_->value; }
  Eigen::ArrayXd& values_mutable() { return node_->value; }
  double item() const;

  bool has_grad() const { return node_->has_grad; }
  const Eigen::ArrayXd& grad() const;
  void clear_grad() {
    node_->has_grad = false;
    node_->grad.resize(0);
    node_->backward_done = false;
  }
  bool is_leaf() const { return node_->is_leaf(); }

  NodePtr node() const { return node_; }
  explicit Tensor(NodePtr n) : node_(std::move(n)) {}
  bool valid() const { return node_ != nullptr; }

 private:
  NodePtr node_;
};

// Elementwise and structural ops. All record the graph edge for backward().
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Elementwise division; a scalar (size-1) denominator broadcasts.
Tensor div(const Tensor& a, const Tensor& b);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor concat(const std::vector<Tensor>& parts);
Tensor slice(const Tensor& x, Eigen::Index start, Eigen::Index len);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softmax(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor square(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor log(const Tensor& x);
Tensor l2_norm(const Tensor& x);
Tensor scale(const Tensor& x, double c);  // constant multiply
Tensor neg(const Tensor& x);

// Reverse-mode sweep from a scalar loss. Populates grad on every reachable
// leaf; gradients of shared subexpressions accumulate. Calling twice on the
// same loss without clearing is an error.
void backward(const Tensor& loss);

// Max relative error between the autodiff gradient of f at x and a central
// finite difference with the given step.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f,
                         const Tensor& x, double step);

// Complex quantities as paired real/imaginary tensors.
struct ComplexTensor {
  Tensor re, im;

  Eigen::Index size() const { return re.size(); }
  bool valid() const { return re.valid() && im.valid(); }
};

ComplexTensor make_complex(const Eigen::MatrixXcd& m);
ComplexTensor make_complex(const Eigen::VectorXcd& v);
ComplexTensor complex_zeros(Shape shape);

ComplexTensor cadd(const ComplexTensor& a, const ComplexTensor& b);
// M v for complex M (m x n) and v (n).
ComplexTensor complex_matvec(const ComplexTensor& m, const ComplexTensor& v);
// w^H u for complex vectors; returns a complex scalar.
ComplexTensor cvdot(const ComplexTensor& w, const ComplexTensor& u);
// |z|^2 elementwise.
Tensor cabs2(const ComplexTensor& z);

Eigen::VectorXcd to_eigen_vector(const ComplexTensor& z);
Eigen::MatrixXcd to_eigen_matrix(const ComplexTensor& z);

std::string shape_str(const Shape& s);

}  // namespace ba::ad
