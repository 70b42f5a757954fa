#include "pasa/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "pasa/error.hpp"

namespace pasa {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

}  // namespace

namespace detail {
void ensure_grad(TensorNode& n) {
  if (n.grad.size() != n.values.size()) n.grad.assign(n.values.size(), 0.0);
}
}  // namespace detail

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  const std::size_t n = shape_product(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> values,
                    bool requires_grad) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor shape " + shape_to_str(shape) + " has a zero dimension");
  }
  if (shape_product(shape) != values.size()) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_to_str(shape));
  }
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

Tensor Tensor::row_vector(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return from({n}, std::move(values), requires_grad);
}

const std::vector<std::size_t>& Tensor::shape() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::size() const { return shape_product(shape()); }

std::size_t Tensor::rows() const {
  const auto& s = shape();
  return s.size() >= 2 ? s[0] : 1;
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  return s.size() >= 2 ? s[1] : s[0];
}

bool Tensor::is_vector() const { return shape().size() == 1; }
bool Tensor::is_matrix() const { return shape().size() == 2; }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::string Tensor::shape_str() const { return shape_to_str(shape()); }

std::vector<double>& Tensor::values() {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->values;
}

const std::vector<double>& Tensor::values() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->values;
}

std::vector<double>& Tensor::grad() {
  if (!node_) throw ContractError("use of an undefined tensor");
  detail::ensure_grad(*node_);
  return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  detail::ensure_grad(*node_);
  return node_->grad;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->values.size(); }

void Tensor::zero_grad() {
  if (!node_) return;
  node_->grad.assign(node_->values.size(), 0.0);
}

double Tensor::value() const {
  if (size() != 1) throw DimensionError("scalar access on tensor of shape " + shape_str());
  return values()[0];
}

double Tensor::at(std::size_t i) const {
  if (i >= size()) throw DimensionError("index " + std::to_string(i) + " out of range for " + shape_str());
  return values()[i];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (!is_matrix()) throw DimensionError("2-d access on tensor of shape " + shape_str());
  if (r >= rows() || c >= cols()) {
    throw DimensionError("index (" + std::to_string(r) + "," + std::to_string(c) +
                         ") out of range for " + shape_str());
  }
  return values()[r * cols() + c];
}

Tensor Tensor::detach() const {
  if (!node_) return Tensor();
  return from(node_->shape, node_->values, false);
}

Tensor Tensor::make(std::vector<std::size_t> shape, std::vector<double> values,
                    std::vector<Tensor> parents,
                    std::function<void(detail::TensorNode&)> backward_fn) {
  bool needs_grad = false;
  for (const Tensor& p : parents) needs_grad = needs_grad || p.requires_grad();
  Tensor out = from(std::move(shape), std::move(values), needs_grad);
  if (needs_grad) {
    out.node_->parents.reserve(parents.size());
    for (const Tensor& p : parents) out.node_->parents.push_back(p.node());
    out.node_->backward = std::move(backward_fn);
  }
  return out;
}

void Tensor::backward() const {
  if (!node_) throw ContractError("backward on an undefined tensor");
  if (size() != 1) throw DimensionError("backward requires a scalar root, got " + shape_str());
  if (!node_->requires_grad) return;

  // Iterative post-order topological sort over the tape.
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> visited;
  struct Frame {
    detail::TensorNode* node;
    std::size_t next_child;
  };
  std::vector<Frame> stack;
  stack.push_back({node_.get(), 0});
  visited.insert(node_.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_child < f.node->parents.size()) {
      detail::TensorNode* child = f.node->parents[f.next_child++].get();
      if (child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.push_back({child, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  detail::ensure_grad(*node_);
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* n = *it;
    if (n->backward) {
      for (auto& p : n->parents) {
        if (p->requires_grad) detail::ensure_grad(*p);
      }
      n->backward(*n);
    }
  }
}

}  // namespace pasa
