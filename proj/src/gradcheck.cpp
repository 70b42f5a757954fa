#include "pasa/gradcheck.hpp"

#include <cmath>
#include <vector>

#include "pasa/error.hpp"

namespace pasa {

GradCheckReport grad_check(const std::function<Tensor(ParamSet&)>& loss_fn, ParamSet& params,
                           double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1e-2) {
    throw ArgumentError("grad_check: epsilon must lie in (0, 1e-2], got " +
                        std::to_string(epsilon));
  }

  params.zero_grads();
  Tensor loss = loss_fn(params);
  if (!std::isfinite(loss.value())) {
    throw EvaluationError("grad_check: loss is not finite");
  }
  loss.backward();

  // Snapshot the analytic gradients before perturbing anything.
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.names().size());
  for (const std::string& name : params.names()) {
    analytic.push_back(params.at(name).grad());
  }

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.names().size(); ++pi) {
    const std::string& name = params.names()[pi];
    Tensor& param = params.at(name);
    auto& theta = param.values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double original = theta[i];
      theta[i] = original + epsilon;
      const double up = loss_fn(params).value();
      theta[i] = original - epsilon;
      const double down = loss_fn(params).value();
      theta[i] = original;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw EvaluationError("grad_check: perturbed loss is not finite at '" + name + "'[" +
                              std::to_string(i) + "]");
      }
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_coord = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace pasa
