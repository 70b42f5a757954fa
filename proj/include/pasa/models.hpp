#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pasa/alignment.hpp"
#include "pasa/encoder.hpp"
#include "pasa/paramset.hpp"
#include "pasa/vocab.hpp"

namespace pasa {

struct GumbelConfig {
  double temperature = 1.0;
  bool hard = true;  // straight-through
};

// Bi-encoder student: scores candidates by dot product with the context.
struct StudentModel {
  EncoderConfig encoder;
  Vocabulary vocab;
  ParamSet params;

  static StudentModel init(const EncoderConfig& encoder, const Vocabulary& vocab,
                           std::uint64_t seed);
  EncodedText encode_text(const std::string& text, TextRole role) const;
};

// Teacher: student encoder plus a recognition network q(z|x,c) (two affine
// layers, 2d -> d -> K, softmax) and a prediction layer mapping [h_c; z]
// back to a d-dimensional scoring vector.
struct TeacherModel {
  EncoderConfig encoder;
  LatentConfig latent;
  Vocabulary vocab;
  ParamSet params;

  static TeacherModel init(const EncoderConfig& encoder, const LatentConfig& latent,
                           const Vocabulary& vocab, std::uint64_t seed);
  EncodedText encode_text(const std::string& text, TextRole role) const;
};

struct PosteriorDistribution {
  Tensor probs;   // [K]
  Tensor sample;  // [K], one-hot or soft
};

// logit_i = h_c . h_{x_i}
Tensor student_scores(const EncodedText& context, std::span<const EncodedText> candidates);

// Posterior probabilities q(z | x, c).
Tensor recognition_probs(const EncodedText& context, const EncodedText& action,
                         const ParamSet& params, const LatentConfig& latent);

// Posterior with a deterministic MAP (argmax) sample.
PosteriorDistribution recognition_posterior(const EncodedText& context,
                                            const EncodedText& action, const ParamSet& params,
                                            const LatentConfig& latent);

// Posterior with a Gumbel-Softmax sample under the given frozen noise.
PosteriorDistribution recognition_posterior_sampled(const EncodedText& context,
                                                    const EncodedText& action,
                                                    const ParamSet& params,
                                                    const LatentConfig& latent,
                                                    const GumbelConfig& gumbel,
                                                    const std::vector<double>& noise);

// h_{c,z} = pred([h_c; z]); logit_i = h_{c,z} . h_{x_i}
Tensor teacher_scores(const EncodedText& context, const Tensor& z_sample,
                      std::span<const EncodedText> candidates, const ParamSet& params);

// One already-encoded training item.
struct EncodedSample {
  EncodedText context;
  std::vector<EncodedText> candidates;
  std::size_t gold_index = 0;
  std::optional<int> label;          // alignment label, when the mode uses one
  std::vector<double> gumbel_noise;  // frozen per-sample noise for teacher losses
};

// Mean cross-entropy against the gold index over the batch.
Tensor student_loss(std::span<const EncodedSample> batch);

// L_pred through the sampled z' of each gold pair, plus rec_weight * L_rec.
// latent mode uses batch prior regularization over the posteriors;
// persona/intent use label cross-entropy over the labelled subset (exactly
// zero when no sample in the batch carries a label).
Tensor teacher_loss(std::span<const EncodedSample> batch, const ParamSet& params,
                    const LatentConfig& latent, double rec_weight, const GumbelConfig& gumbel);

// Checkpoints: ParamSet container tagged with a model kind, the latent
// configuration and the embedded vocabulary.
void save_student(const std::string& path, const StudentModel& model);
void save_teacher(const std::string& path, const TeacherModel& model);

struct LoadedModel {
  std::string kind;  // "student" | "teacher"
  std::optional<StudentModel> student;
  std::optional<TeacherModel> teacher;
};

LoadedModel load_model(const std::string& path);

}  // namespace pasa
