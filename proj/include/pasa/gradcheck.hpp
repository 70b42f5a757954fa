#pragma once

#include <functional>
#include <string>

#include "pasa/paramset.hpp"
#include "pasa/tensor.hpp"

namespace pasa {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_coord = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares the reverse-mode gradient of loss_fn against central finite
// differences (f(t+e) - f(t-e)) / 2e for every parameter coordinate.
// loss_fn must rebuild the graph on each call and be deterministic (freeze
// any sampling noise). Relative error per coordinate is
// |a - n| / max(|a|, |n|, 1e-6). epsilon must lie in (0, 1e-2].
GradCheckReport grad_check(const std::function<Tensor(ParamSet&)>& loss_fn, ParamSet& params,
                           double epsilon);

}  // namespace pasa
