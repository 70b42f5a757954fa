#include "pasa/encoder.hpp"

#include <cmath>

#include "pasa/error.hpp"
#include "pasa/ops.hpp"

namespace pasa {

namespace {

std::string blk(const std::string& prefix, std::size_t i, const char* name) {
  return prefix + "blk" + std::to_string(i) + "." + name;
}

}  // namespace

void add_encoder_params(ParamSet& params, const std::string& prefix, const EncoderConfig& cfg,
                        std::size_t vocab_size) {
  if (cfg.dim == 0 || cfg.depth == 0) {
    throw ArgumentError("encoder config requires dim > 0 and depth > 0");
  }
  // Small embedding scale keeps initial pooled vectors near zero, so fresh
  // models score candidates close to uniformly.
  params.add_uniform(prefix + "emb.tok", {vocab_size, cfg.dim}, 0.05);
  params.add_uniform(prefix + "emb.pos", {cfg.max_seq_len(), cfg.dim}, 0.05);
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    params.add_xavier(blk(prefix, i, "wq"), cfg.dim, cfg.dim);
    params.add_xavier(blk(prefix, i, "wk"), cfg.dim, cfg.dim);
    params.add_xavier(blk(prefix, i, "wv"), cfg.dim, cfg.dim);
    params.add_xavier(blk(prefix, i, "wo"), cfg.dim, cfg.dim);
    params.add_xavier(blk(prefix, i, "wff"), cfg.dim, cfg.dim);
    if (cfg.use_bias) {
      params.add_zeros(blk(prefix, i, "bq"), {cfg.dim});
      params.add_zeros(blk(prefix, i, "bk"), {cfg.dim});
      params.add_zeros(blk(prefix, i, "bv"), {cfg.dim});
      params.add_zeros(blk(prefix, i, "bo"), {cfg.dim});
      params.add_zeros(blk(prefix, i, "bff"), {cfg.dim});
    }
  }
}

void add_model_encoder_params(ParamSet& params, const EncoderConfig& cfg,
                              std::size_t vocab_size) {
  if (cfg.share_encoders) {
    add_encoder_params(params, cfg.prefix_for(TextRole::context), cfg, vocab_size);
  } else {
    add_encoder_params(params, cfg.prefix_for(TextRole::context), cfg, vocab_size);
    add_encoder_params(params, cfg.prefix_for(TextRole::action), cfg, vocab_size);
  }
}

namespace {

// Broadcasts a bias vector across the rows of h.
Tensor add_row_bias(const Tensor& h, const Tensor& bias) {
  if (bias.size() != h.cols()) {
    throw DimensionError("bias length " + bias.shape_str() + " does not match " + h.shape_str());
  }
  const std::size_t n = h.rows(), c = h.cols();
  std::vector<double> out(h.values());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] += bias.values()[j];
  }
  return Tensor::make(h.shape(), std::move(out), {h, bias}, [n, c](detail::TensorNode& o) {
    auto& ph = *o.parents[0];
    auto& pb = *o.parents[1];
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < c; ++j) {
        const double g = o.grad[r * c + j];
        if (ph.requires_grad) ph.grad[r * c + j] += g;
        if (pb.requires_grad) pb.grad[j] += g;
      }
    }
  });
}

Tensor project(const Tensor& h, const ParamSet& params, const std::string& wname,
               const std::string& bname, bool use_bias) {
  Tensor out = ops::affine(h, params.at(wname));
  if (use_bias) out = add_row_bias(out, params.at(bname));
  return out;
}

}  // namespace

EncodedText encode(const std::vector<int>& ids, const ParamSet& params, const EncoderConfig& cfg,
                   TextRole role) {
  if (ids.empty() || ids.front() != Vocabulary::kCls) {
    throw ContractError("encode: id sequence must be non-empty and start with [CLS]");
  }
  if (ids.size() > cfg.max_seq_len()) {
    throw ContractError("encode: sequence length " + std::to_string(ids.size()) +
                        " exceeds maximum " + std::to_string(cfg.max_seq_len()));
  }
  const std::string prefix = cfg.prefix_for(role);
  const std::size_t len = ids.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));

  Tensor h = ops::add(ops::embedding_rows(params.at(prefix + "emb.tok"), ids),
                      ops::slice_rows(params.at(prefix + "emb.pos"), 0, len));
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    Tensor q = project(h, params, blk(prefix, i, "wq"), blk(prefix, i, "bq"), cfg.use_bias);
    Tensor k = project(h, params, blk(prefix, i, "wk"), blk(prefix, i, "bk"), cfg.use_bias);
    Tensor v = project(h, params, blk(prefix, i, "wv"), blk(prefix, i, "bv"), cfg.use_bias);
    Tensor attn = ops::softmax(ops::scale(ops::affine(q, ops::transpose(k)), scale), 1.0);
    Tensor mixed = project(ops::affine(attn, v), params, blk(prefix, i, "wo"),
                           blk(prefix, i, "bo"), cfg.use_bias);
    h = ops::add(h, mixed);
    Tensor ff = ops::tanh(
        project(h, params, blk(prefix, i, "wff"), blk(prefix, i, "bff"), cfg.use_bias));
    h = ops::add(h, ff);
  }
  return EncodedText{ops::row(h, 0), role};
}

}  // namespace pasa
