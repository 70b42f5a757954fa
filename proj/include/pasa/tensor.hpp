#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pasa {

class Tensor;

namespace detail {

struct TensorNode {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // allocated lazily; same length as values when present
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  // Propagates this node's grad into its parents' grad buffers.
  std::function<void(TensorNode&)> backward;
};

}  // namespace detail

// Row-major 64-bit float tensor with reverse-mode gradient support.
// Copies share the underlying buffer; ops record a tape of parent links.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor row_vector(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<std::size_t>& shape() const;
  std::size_t size() const;
  std::size_t rows() const;  // shape[0]; 1 for rank-1 tensors
  std::size_t cols() const;  // shape[1] for matrices, shape[0] for vectors
  bool is_vector() const;
  bool is_matrix() const;
  bool requires_grad() const;
  std::string shape_str() const;

  std::vector<double>& values();
  const std::vector<double>& values() const;

  // Gradient buffer; allocated zero-filled on first access.
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  bool has_grad() const;
  void zero_grad();

  double value() const;  // scalar accessor; throws DimensionError if size != 1
  double at(std::size_t i) const;
  double at(std::size_t r, std::size_t c) const;

  // Value copy with no graph history and no gradient requirement.
  Tensor detach() const;

  // Reverse-mode sweep from a scalar root. Accumulates into the grad buffers
  // of every reachable tensor that requires gradients.
  void backward() const;

  // Op construction; result requires grad iff any parent does.
  static Tensor make(std::vector<std::size_t> shape, std::vector<double> values,
                     std::vector<Tensor> parents,
                     std::function<void(detail::TensorNode&)> backward_fn);

  std::shared_ptr<detail::TensorNode> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;
};

namespace detail {
void ensure_grad(TensorNode& n);
}

}  // namespace pasa
