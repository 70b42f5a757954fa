#include "pasa/paramset.hpp"

#include <cmath>

#include "pasa/error.hpp"
#include "pasa/random.hpp"

namespace pasa {

ParamSet::ParamSet(const ParamSet& other)
    : seed_(other.seed_), names_(other.names_), index_(other.index_) {
  entries_.reserve(other.entries_.size());
  for (const Tensor& t : other.entries_) {
    entries_.push_back(Tensor::from(t.shape(), t.values(), t.requires_grad()));
  }
}

ParamSet& ParamSet::operator=(const ParamSet& other) {
  if (this != &other) {
    ParamSet copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor& ParamSet::add(const std::string& name, Tensor t) {
  if (contains(name)) throw ContractError("parameter '" + name + "' already registered");
  if (!t.defined()) throw ContractError("parameter '" + name + "' is undefined");
  index_[name] = entries_.size();
  names_.push_back(name);
  entries_.push_back(std::move(t));
  return entries_.back();
}

Tensor& ParamSet::add_xavier(const std::string& name, std::size_t rows, std::size_t cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return add_uniform(name, {rows, cols}, limit);
}

Tensor& ParamSet::add_uniform(const std::string& name, std::vector<std::size_t> shape,
                              double limit) {
  RandomStream rng(mix_seed(seed_, fnv1a64(name)));
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<double> values(n);
  for (double& v : values) v = rng.next_uniform(-limit, limit);
  return add(name, Tensor::from(std::move(shape), std::move(values), true));
}

Tensor& ParamSet::add_zeros(const std::string& name, std::vector<std::size_t> shape) {
  return add(name, Tensor::zeros(std::move(shape), true));
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return entries_[it->second];
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return entries_[it->second];
}

void ParamSet::zero_grads() {
  for (Tensor& t : entries_) t.zero_grad();
}

std::size_t ParamSet::coordinate_count() const {
  std::size_t n = 0;
  for (const Tensor& t : entries_) n += t.size();
  return n;
}

}  // namespace pasa
