#include "pasa/adam.hpp"

#include <cmath>

#include "pasa/error.hpp"

namespace pasa {

AdamState AdamState::for_params(const ParamSet& params, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  for (const std::string& name : params.names()) {
    const std::size_t n = params.at(name).size();
    state.first_moment[name].assign(n, 0.0);
    state.second_moment[name].assign(n, 0.0);
  }
  return state;
}

namespace {

void apply_update(ParamSet& params, AdamState& state,
                  const std::function<const std::vector<double>*(const std::string&)>& grad_of) {
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (const std::string& name : params.names()) {
    Tensor& param = params.at(name);
    const std::vector<double>* g = grad_of(name);
    if (g == nullptr) {
      throw ContractError("adam_step: missing gradient for parameter '" + name + "'");
    }
    if (g->size() != param.size()) {
      throw ContractError("adam_step: gradient for '" + name + "' has " +
                          std::to_string(g->size()) + " entries, parameter has " +
                          std::to_string(param.size()));
    }
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.size() != param.size()) m.assign(param.size(), 0.0);
    if (v.size() != param.size()) v.assign(param.size(), 0.0);
    auto& theta = param.values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = (*g)[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace

void adam_step(ParamSet& params, const std::map<std::string, std::vector<double>>& grads,
               AdamState& state) {
  apply_update(params, state, [&grads](const std::string& name) -> const std::vector<double>* {
    auto it = grads.find(name);
    return it == grads.end() ? nullptr : &it->second;
  });
}

void adam_step(ParamSet& params, AdamState& state) {
  apply_update(params, state, [&params](const std::string& name) -> const std::vector<double>* {
    const Tensor& t = params.at(name);
    return t.has_grad() ? &t.grad() : nullptr;
  });
}

}  // namespace pasa
