#pragma once

#include <span>
#include <vector>

#include "pasa/random.hpp"
#include "pasa/tensor.hpp"

namespace pasa::ops {

// Matrix product input[n x a] * weight[a x b]. Gradients for both arguments.
Tensor affine(const Tensor& input, const Tensor& weight);

// v[a] * W[a x b] -> [b]
Tensor vecmat(const Tensor& v, const Tensor& weight);

// M[n x m] * v[m] -> [n]
Tensor matvec(const Tensor& m, const Tensor& v);

Tensor dot(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);

// Adds a constant offset (no gradient to the offset).
Tensor add_constant(const Tensor& a, const std::vector<double>& offset);

Tensor scale(const Tensor& a, double factor);

Tensor concat(const Tensor& a, const Tensor& b);  // rank-1 only

Tensor row(const Tensor& m, std::size_t index);

// Selects one entry of a vector as a scalar tensor.
Tensor element(const Tensor& v, std::size_t index);

Tensor slice_rows(const Tensor& m, std::size_t start, std::size_t count);

Tensor transpose(const Tensor& m);

Tensor stack_rows(std::span<const Tensor> rows);

// Gathers table rows by id; gradient scatter-adds into the table.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

Tensor tanh(const Tensor& a);

// Elementwise natural log; all entries must be strictly positive.
Tensor log(const Tensor& a);

// Row-wise temperature softmax with max-subtraction. temperature must be > 0.
Tensor softmax(const Tensor& logits, double temperature);

Tensor log_softmax(const Tensor& logits, double temperature);

// -sum_i target_i * log_prob_i. target_dist must be a probability vector.
Tensor cross_entropy(const Tensor& target_dist, const Tensor& log_probs);

// sum_i q_i log(q_i / p_i) with 0 log 0 := 0. Throws DivergenceError when
// p has a zero entry where q is positive.
Tensor kl_divergence(const Tensor& q, const Tensor& p);

Tensor mean_vectors(std::span<const Tensor> vectors);

Tensor mean_scalars(std::span<const Tensor> scalars);

// Forward: exact one-hot at argmax(soft). Backward: identity into soft.
Tensor straight_through_onehot(const Tensor& soft);

Tensor one_hot(std::size_t k, std::size_t index);

// Gumbel-Softmax sample from a strictly positive probability vector.
// soft mode: softmax((log probs + noise) / temperature); hard mode applies
// the straight-through one-hot on top.
Tensor gumbel_softmax_sample(const Tensor& probs, double temperature,
                             const std::vector<double>& gumbel_noise, bool hard);
Tensor gumbel_softmax_sample(const Tensor& probs, double temperature, RandomStream& rng,
                             bool hard);

std::vector<double> draw_gumbel_noise(RandomStream& rng, std::size_t k);

}  // namespace pasa::ops
