#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pasa/tensor.hpp"

namespace pasa {

// Named, ordered collection of trainable tensors. Initialization draws from
// a stream keyed by (seed, name), so two sets built with the same seed and
// shapes are bitwise identical regardless of registration order.
class ParamSet {
 public:
  explicit ParamSet(std::uint64_t rng_seed = 0) : seed_(rng_seed) {}

  // Copies duplicate the underlying buffers (Tensor handles alone would
  // alias the same storage); moves transfer ownership.
  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) = default;
  ParamSet& operator=(ParamSet&&) = default;

  std::uint64_t seed() const { return seed_; }

  Tensor& add(const std::string& name, Tensor t);
  Tensor& add_xavier(const std::string& name, std::size_t rows, std::size_t cols);
  Tensor& add_uniform(const std::string& name, std::vector<std::size_t> shape, double limit);
  Tensor& add_zeros(const std::string& name, std::vector<std::size_t> shape);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  void zero_grads();

  // Total number of scalar coordinates across all parameters.
  std::size_t coordinate_count() const;

 private:
  std::uint64_t seed_;
  std::vector<std::string> names_;
  std::vector<Tensor> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace pasa
