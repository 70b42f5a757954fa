#include "pasa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pasa/error.hpp"

namespace pasa::ops {

namespace {

using detail::TensorNode;

void require_matrix(const Tensor& t, const char* op) {
  if (!t.is_matrix()) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + t.shape_str());
  }
}

void require_vector(const Tensor& t, const char* op) {
  if (!t.is_vector()) {
    throw DimensionError(std::string(op) + ": expected a vector, got " + t.shape_str());
  }
}

void require_probability_vector(const Tensor& t, const char* op) {
  require_vector(t, op);
  double sum = 0.0;
  for (double v : t.values()) {
    if (v < 0.0) throw ArgumentError(std::string(op) + ": negative probability entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError(std::string(op) + ": probabilities sum to " + std::to_string(sum) +
                        ", expected 1");
  }
}

}  // namespace

Tensor affine(const Tensor& input, const Tensor& weight) {
  require_matrix(input, "affine");
  require_matrix(weight, "affine");
  const std::size_t n = input.rows(), a = input.cols();
  const std::size_t wa = weight.rows(), b = weight.cols();
  if (a != wa) {
    throw DimensionError("affine: inner dimensions disagree, input " + input.shape_str() +
                         " vs weight " + weight.shape_str());
  }
  std::vector<double> out(n * b, 0.0);
  const auto& x = input.values();
  const auto& w = weight.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < a; ++k) {
      const double xv = x[i * a + k];
      if (xv == 0.0) continue;
      const double* wrow = w.data() + k * b;
      double* orow = out.data() + i * b;
      for (std::size_t j = 0; j < b; ++j) orow[j] += xv * wrow[j];
    }
  }
  return Tensor::make(
      {n, b}, std::move(out), {input, weight}, [n, a, b](TensorNode& o) {
        auto& pin = *o.parents[0];
        auto& pw = *o.parents[1];
        // dX += dC * W^T ; dW += X^T * dC
        if (pin.requires_grad) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < b; ++j) {
              const double g = o.grad[i * b + j];
              if (g == 0.0) continue;
              for (std::size_t k = 0; k < a; ++k) {
                pin.grad[i * a + k] += g * pw.values[k * b + j];
              }
            }
          }
        }
        if (pw.requires_grad) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < a; ++k) {
              const double xv = pin.values[i * a + k];
              if (xv == 0.0) continue;
              for (std::size_t j = 0; j < b; ++j) {
                pw.grad[k * b + j] += xv * o.grad[i * b + j];
              }
            }
          }
        }
      });
}

Tensor vecmat(const Tensor& v, const Tensor& weight) {
  require_vector(v, "vecmat");
  require_matrix(weight, "vecmat");
  const std::size_t a = v.size(), wa = weight.rows(), b = weight.cols();
  if (a != wa) {
    throw DimensionError("vecmat: inner dimensions disagree, vector " + v.shape_str() +
                         " vs weight " + weight.shape_str());
  }
  std::vector<double> out(b, 0.0);
  const auto& x = v.values();
  const auto& w = weight.values();
  for (std::size_t k = 0; k < a; ++k) {
    const double xv = x[k];
    if (xv == 0.0) continue;
    for (std::size_t j = 0; j < b; ++j) out[j] += xv * w[k * b + j];
  }
  return Tensor::make({b}, std::move(out), {v, weight}, [a, b](TensorNode& o) {
    auto& pv = *o.parents[0];
    auto& pw = *o.parents[1];
    if (pv.requires_grad) {
      for (std::size_t k = 0; k < a; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < b; ++j) acc += pw.values[k * b + j] * o.grad[j];
        pv.grad[k] += acc;
      }
    }
    if (pw.requires_grad) {
      for (std::size_t k = 0; k < a; ++k) {
        const double xv = pv.values[k];
        if (xv == 0.0) continue;
        for (std::size_t j = 0; j < b; ++j) pw.grad[k * b + j] += xv * o.grad[j];
      }
    }
  });
}

Tensor matvec(const Tensor& m, const Tensor& v) {
  require_matrix(m, "matvec");
  require_vector(v, "matvec");
  const std::size_t n = m.rows(), c = m.cols();
  if (c != v.size()) {
    throw DimensionError("matvec: inner dimensions disagree, matrix " + m.shape_str() +
                         " vs vector " + v.shape_str());
  }
  std::vector<double> out(n, 0.0);
  const auto& a = m.values();
  const auto& x = v.values();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += a[i * c + j] * x[j];
    out[i] = acc;
  }
  return Tensor::make({n}, std::move(out), {m, v}, [n, c](TensorNode& o) {
    auto& pm = *o.parents[0];
    auto& pv = *o.parents[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double g = o.grad[i];
      if (g == 0.0) continue;
      if (pm.requires_grad) {
        for (std::size_t j = 0; j < c; ++j) pm.grad[i * c + j] += g * pv.values[j];
      }
      if (pv.requires_grad) {
        for (std::size_t j = 0; j < c; ++j) pv.grad[j] += g * pm.values[i * c + j];
      }
    }
  });
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_vector(a, "dot");
  require_vector(b, "dot");
  if (a.size() != b.size()) {
    throw DimensionError("dot: lengths disagree, " + a.shape_str() + " vs " + b.shape_str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.values()[i] * b.values()[i];
  const std::size_t n = a.size();
  return Tensor::make({1}, {acc}, {a, b}, [n](TensorNode& o) {
    auto& pa = *o.parents[0];
    auto& pb = *o.parents[1];
    const double g = o.grad[0];
    for (std::size_t i = 0; i < n; ++i) {
      if (pa.requires_grad) pa.grad[i] += g * pb.values[i];
      if (pb.requires_grad) pb.grad[i] += g * pa.values[i];
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes disagree, " + a.shape_str() + " vs " + b.shape_str());
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return Tensor::make(a.shape(), std::move(out), {a, b}, [](TensorNode& o) {
    for (auto& p : o.parents) {
      if (!p->requires_grad) continue;
      for (std::size_t i = 0; i < o.grad.size(); ++i) p->grad[i] += o.grad[i];
    }
  });
}

Tensor add_constant(const Tensor& a, const std::vector<double>& offset) {
  if (a.size() != offset.size()) {
    throw DimensionError("add_constant: offset length " + std::to_string(offset.size()) +
                         " does not match tensor " + a.shape_str());
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + offset[i];
  return Tensor::make(a.shape(), std::move(out), {a}, [](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * a.values()[i];
  return Tensor::make(a.shape(), std::move(out), {a}, [factor](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += factor * o.grad[i];
  });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_vector(a, "concat");
  require_vector(b, "concat");
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  const std::size_t na = a.size();
  return Tensor::make({a.size() + b.size()}, std::move(out), {a, b}, [na](TensorNode& o) {
    auto& pa = *o.parents[0];
    auto& pb = *o.parents[1];
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < na; ++i) pa.grad[i] += o.grad[i];
    }
    if (pb.requires_grad) {
      for (std::size_t i = na; i < o.grad.size(); ++i) pb.grad[i - na] += o.grad[i];
    }
  });
}

Tensor row(const Tensor& m, std::size_t index) {
  require_matrix(m, "row");
  if (index >= m.rows()) {
    throw DimensionError("row: index " + std::to_string(index) + " out of range for " +
                         m.shape_str());
  }
  const std::size_t c = m.cols();
  std::vector<double> out(m.values().begin() + index * c, m.values().begin() + (index + 1) * c);
  return Tensor::make({c}, std::move(out), {m}, [index, c](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t j = 0; j < c; ++j) p.grad[index * c + j] += o.grad[j];
  });
}

Tensor element(const Tensor& v, std::size_t index) {
  require_vector(v, "element");
  if (index >= v.size()) {
    throw DimensionError("element: index " + std::to_string(index) + " out of range for " +
                         v.shape_str());
  }
  return Tensor::make({1}, {v.values()[index]}, {v}, [index](TensorNode& o) {
    auto& p = *o.parents[0];
    if (p.requires_grad) p.grad[index] += o.grad[0];
  });
}

Tensor slice_rows(const Tensor& m, std::size_t start, std::size_t count) {
  require_matrix(m, "slice_rows");
  if (start + count > m.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(start) + "," +
                         std::to_string(start + count) + ") out of range for " + m.shape_str());
  }
  const std::size_t c = m.cols();
  std::vector<double> out(m.values().begin() + start * c, m.values().begin() + (start + count) * c);
  return Tensor::make({count, c}, std::move(out), {m}, [start, c](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[start * c + i] += o.grad[i];
  });
}

Tensor transpose(const Tensor& m) {
  require_matrix(m, "transpose");
  const std::size_t n = m.rows(), c = m.cols();
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * n + i] = m.values()[i * c + j];
  }
  return Tensor::make({c, n}, std::move(out), {m}, [n, c](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += o.grad[j * n + i];
    }
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ArgumentError("stack_rows: empty row list");
  const std::size_t c = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * c);
  std::vector<Tensor> parents;
  parents.reserve(rows.size());
  for (const Tensor& r : rows) {
    if (!r.is_vector() || r.size() != c) {
      throw DimensionError("stack_rows: row of shape " + r.shape_str() +
                           " does not match width " + std::to_string(c));
    }
    out.insert(out.end(), r.values().begin(), r.values().end());
    parents.push_back(r);
  }
  return Tensor::make({rows.size(), c}, std::move(out), std::move(parents), [c](TensorNode& o) {
    for (std::size_t r = 0; r < o.parents.size(); ++r) {
      auto& p = *o.parents[r];
      if (!p.requires_grad) continue;
      for (std::size_t j = 0; j < c; ++j) p.grad[j] += o.grad[r * c + j];
    }
  });
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
  require_matrix(table, "embedding_rows");
  if (ids.empty()) throw ArgumentError("embedding_rows: empty id list");
  const std::size_t v = table.rows(), d = table.cols();
  std::vector<double> out;
  out.reserve(ids.size() * d);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= v) {
      throw ContractError("embedding_rows: id " + std::to_string(id) +
                          " out of vocabulary range [0," + std::to_string(v) + ")");
    }
    const double* src = table.values().data() + static_cast<std::size_t>(id) * d;
    out.insert(out.end(), src, src + d);
  }
  std::vector<int> ids_copy = ids;
  return Tensor::make({ids.size(), d}, std::move(out), {table},
                      [ids = std::move(ids_copy), d](TensorNode& o) {
                        auto& p = *o.parents[0];
                        if (!p.requires_grad) return;
                        for (std::size_t r = 0; r < ids.size(); ++r) {
                          double* dst = p.grad.data() + static_cast<std::size_t>(ids[r]) * d;
                          const double* g = o.grad.data() + r * d;
                          for (std::size_t j = 0; j < d; ++j) dst[j] += g[j];
                        }
                      });
}

Tensor tanh(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.values()[i]);
  return Tensor::make(a.shape(), std::move(out), {a}, [](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      p.grad[i] += o.grad[i] * (1.0 - o.values[i] * o.values[i]);
    }
  });
}

Tensor log(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = a.values()[i];
    if (v <= 0.0) throw ArgumentError("log: non-positive entry " + std::to_string(v));
    out[i] = std::log(v);
  }
  return Tensor::make(a.shape(), std::move(out), {a}, [](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i] / p.values[i];
  });
}

namespace {

Tensor softmax_impl(const Tensor& logits, double temperature, bool log_space) {
  if (temperature <= 0.0) {
    throw ArgumentError("softmax: temperature must be > 0, got " + std::to_string(temperature));
  }
  const std::size_t n = logits.is_matrix() ? logits.rows() : 1;
  const std::size_t k = logits.cols();
  std::vector<double> out(n * k);
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = logits.values().data() + r * k;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) mx = std::max(mx, x[j] / temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double e = std::exp(x[j] / temperature - mx);
      out[r * k + j] = e;
      sum += e;
    }
    if (log_space) {
      const double lse = mx + std::log(sum);
      for (std::size_t j = 0; j < k; ++j) out[r * k + j] = x[j] / temperature - lse;
    } else {
      for (std::size_t j = 0; j < k; ++j) out[r * k + j] /= sum;
    }
  }
  const double inv_t = 1.0 / temperature;
  if (log_space) {
    return Tensor::make(logits.shape(), std::move(out), {logits}, [n, k, inv_t](TensorNode& o) {
      auto& p = *o.parents[0];
      if (!p.requires_grad) return;
      for (std::size_t r = 0; r < n; ++r) {
        double gsum = 0.0;
        for (std::size_t j = 0; j < k; ++j) gsum += o.grad[r * k + j];
        for (std::size_t j = 0; j < k; ++j) {
          const double sj = std::exp(o.values[r * k + j]);
          p.grad[r * k + j] += inv_t * (o.grad[r * k + j] - sj * gsum);
        }
      }
    });
  }
  return Tensor::make(logits.shape(), std::move(out), {logits}, [n, k, inv_t](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t r = 0; r < n; ++r) {
      double dotg = 0.0;
      for (std::size_t j = 0; j < k; ++j) dotg += o.grad[r * k + j] * o.values[r * k + j];
      for (std::size_t j = 0; j < k; ++j) {
        const double yj = o.values[r * k + j];
        p.grad[r * k + j] += inv_t * yj * (o.grad[r * k + j] - dotg);
      }
    }
  });
}

}  // namespace

Tensor softmax(const Tensor& logits, double temperature) {
  return softmax_impl(logits, temperature, false);
}

Tensor log_softmax(const Tensor& logits, double temperature) {
  return softmax_impl(logits, temperature, true);
}

Tensor cross_entropy(const Tensor& target_dist, const Tensor& log_probs) {
  require_vector(log_probs, "cross_entropy");
  if (target_dist.size() != log_probs.size()) {
    throw DimensionError("cross_entropy: lengths disagree, target " + target_dist.shape_str() +
                         " vs log_probs " + log_probs.shape_str());
  }
  require_probability_vector(target_dist, "cross_entropy");
  double acc = 0.0;
  const std::size_t k = log_probs.size();
  for (std::size_t i = 0; i < k; ++i) acc -= target_dist.values()[i] * log_probs.values()[i];
  return Tensor::make({1}, {acc}, {target_dist, log_probs}, [k](TensorNode& o) {
    auto& pt = *o.parents[0];
    auto& pl = *o.parents[1];
    const double g = o.grad[0];
    for (std::size_t i = 0; i < k; ++i) {
      if (pt.requires_grad) pt.grad[i] -= g * pl.values[i];
      if (pl.requires_grad) pl.grad[i] -= g * pt.values[i];
    }
  });
}

Tensor kl_divergence(const Tensor& q, const Tensor& p) {
  require_probability_vector(q, "kl_divergence");
  require_probability_vector(p, "kl_divergence");
  if (q.size() != p.size()) {
    throw DimensionError("kl_divergence: lengths disagree, q " + q.shape_str() + " vs p " +
                         p.shape_str());
  }
  const std::size_t k = q.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double qi = q.values()[i], pi = p.values()[i];
    if (qi == 0.0) continue;
    if (pi == 0.0) {
      throw DivergenceError("kl_divergence: p has a zero entry at index " + std::to_string(i) +
                            " where q is positive");
    }
    acc += qi * std::log(qi / pi);
  }
  return Tensor::make({1}, {acc}, {q, p}, [k](TensorNode& o) {
    auto& pq = *o.parents[0];
    auto& pp = *o.parents[1];
    const double g = o.grad[0];
    for (std::size_t i = 0; i < k; ++i) {
      const double qi = pq.values[i], pi = pp.values[i];
      if (qi == 0.0) continue;
      if (pq.requires_grad) pq.grad[i] += g * (std::log(qi / pi) + 1.0);
      if (pp.requires_grad) pp.grad[i] -= g * qi / pi;
    }
  });
}

Tensor mean_vectors(std::span<const Tensor> vectors) {
  if (vectors.empty()) throw ArgumentError("mean_vectors: empty list");
  const std::size_t k = vectors.front().size();
  std::vector<double> out(k, 0.0);
  std::vector<Tensor> parents;
  parents.reserve(vectors.size());
  for (const Tensor& v : vectors) {
    if (!v.is_vector() || v.size() != k) {
      throw ContractError("mean_vectors: vector of shape " + v.shape_str() +
                          " does not match length " + std::to_string(k));
    }
    for (std::size_t i = 0; i < k; ++i) out[i] += v.values()[i];
    parents.push_back(v);
  }
  const double inv_n = 1.0 / static_cast<double>(vectors.size());
  for (double& v : out) v *= inv_n;
  return Tensor::make({k}, std::move(out), std::move(parents), [inv_n](TensorNode& o) {
    for (auto& p : o.parents) {
      if (!p->requires_grad) continue;
      for (std::size_t i = 0; i < o.grad.size(); ++i) p->grad[i] += inv_n * o.grad[i];
    }
  });
}

Tensor mean_scalars(std::span<const Tensor> scalars) {
  if (scalars.empty()) throw ArgumentError("mean_scalars: empty list");
  double acc = 0.0;
  std::vector<Tensor> parents;
  parents.reserve(scalars.size());
  for (const Tensor& s : scalars) {
    acc += s.value();
    parents.push_back(s);
  }
  const double inv_n = 1.0 / static_cast<double>(scalars.size());
  return Tensor::make({1}, {acc * inv_n}, std::move(parents), [inv_n](TensorNode& o) {
    for (auto& p : o.parents) {
      if (p->requires_grad) p->grad[0] += inv_n * o.grad[0];
    }
  });
}

Tensor straight_through_onehot(const Tensor& soft) {
  require_vector(soft, "straight_through_onehot");
  const std::size_t k = soft.size();
  std::size_t arg = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (soft.values()[i] > soft.values()[arg]) arg = i;
  }
  std::vector<double> out(k, 0.0);
  out[arg] = 1.0;
  return Tensor::make({k}, std::move(out), {soft}, [](TensorNode& o) {
    auto& p = *o.parents[0];
    if (!p.requires_grad) return;
    for (std::size_t i = 0; i < o.grad.size(); ++i) p.grad[i] += o.grad[i];
  });
}

Tensor one_hot(std::size_t k, std::size_t index) {
  if (index >= k) {
    throw ArgumentError("one_hot: index " + std::to_string(index) + " out of range for k=" +
                        std::to_string(k));
  }
  std::vector<double> v(k, 0.0);
  v[index] = 1.0;
  return Tensor::from({k}, std::move(v));
}

Tensor gumbel_softmax_sample(const Tensor& probs, double temperature,
                             const std::vector<double>& gumbel_noise, bool hard) {
  require_probability_vector(probs, "gumbel_softmax_sample");
  if (temperature <= 0.0) {
    throw ArgumentError("gumbel_softmax_sample: temperature must be > 0, got " +
                        std::to_string(temperature));
  }
  for (double v : probs.values()) {
    if (v <= 0.0) {
      throw ArgumentError("gumbel_softmax_sample: zero probability entry, log undefined");
    }
  }
  if (gumbel_noise.size() != probs.size()) {
    throw DimensionError("gumbel_softmax_sample: noise length " +
                         std::to_string(gumbel_noise.size()) + " does not match " +
                         probs.shape_str());
  }
  Tensor perturbed = add_constant(log(probs), gumbel_noise);
  Tensor soft = softmax(perturbed, temperature);
  return hard ? straight_through_onehot(soft) : soft;
}

Tensor gumbel_softmax_sample(const Tensor& probs, double temperature, RandomStream& rng,
                             bool hard) {
  return gumbel_softmax_sample(probs, temperature, draw_gumbel_noise(rng, probs.size()), hard);
}

std::vector<double> draw_gumbel_noise(RandomStream& rng, std::size_t k) {
  std::vector<double> g(k);
  for (double& v : g) v = rng.next_gumbel();
  return g;
}

}  // namespace pasa::ops
