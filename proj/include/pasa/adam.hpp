#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pasa/paramset.hpp"

namespace pasa {

// Bias-corrected Adam. Moment buffers are keyed by parameter name and
// shape-checked against the parameters on every update.
struct AdamState {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  std::map<std::string, std::vector<double>> first_moment;
  std::map<std::string, std::vector<double>> second_moment;

  static AdamState for_params(const ParamSet& params, double learning_rate);
};

// One update over explicit gradient buffers. Throws ContractError naming the
// parameter when a gradient is missing or mis-shaped.
void adam_step(ParamSet& params, const std::map<std::string, std::vector<double>>& grads,
               AdamState& state);

// Convenience form reading the gradients attached to the parameters by a
// preceding backward() sweep.
void adam_step(ParamSet& params, AdamState& state);

}  // namespace pasa
