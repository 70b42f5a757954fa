#pragma once

#include <string>
#include <vector>

#include "pasa/paramset.hpp"
#include "pasa/tensor.hpp"
#include "pasa/vocab.hpp"

namespace pasa {

// Compact trainable text encoder: token + position embeddings, `depth`
// self-attention blocks with a feed-forward layer each, CLS pooling at
// position 0.
struct EncoderConfig {
  std::size_t dim = 64;   // d
  std::size_t depth = 1;  // attention blocks
  std::size_t max_context_tokens = 128;
  std::size_t max_action_tokens = 8;
  bool share_encoders = true;  // one encoder instance for contexts and actions
  bool use_bias = false;       // bias terms on all affine layers

  // 1 CLS slot + context cap.
  std::size_t max_seq_len() const { return max_context_tokens + 1; }

  std::string prefix_for(TextRole role) const {
    if (share_encoders) return "enc.";
    return role == TextRole::context ? "enc_ctx." : "enc_act.";
  }
};

struct EncodedText {
  Tensor vector;  // pooled [d]
  TextRole role = TextRole::context;
};

// Registers embeddings and attention-block weights under `prefix`.
void add_encoder_params(ParamSet& params, const std::string& prefix, const EncoderConfig& cfg,
                        std::size_t vocab_size);

// Registers the encoder parameter set(s) implied by cfg.share_encoders.
void add_model_encoder_params(ParamSet& params, const EncoderConfig& cfg,
                              std::size_t vocab_size);

// Runs the encoder and pools the position-0 output vector. ids must be
// non-empty, start with [CLS], and fit within max_seq_len.
EncodedText encode(const std::vector<int>& ids, const ParamSet& params, const EncoderConfig& cfg,
                   TextRole role);

}  // namespace pasa
