#include "pasa/models.hpp"

#include <sstream>

#include "pasa/error.hpp"
#include "pasa/ops.hpp"
#include "pasa/serialize.hpp"

namespace pasa {

namespace {

constexpr const char* kRecInner = "rec.inner";
constexpr const char* kRecOuter = "rec.outer";
constexpr const char* kPred = "pred.w";

void add_teacher_heads(ParamSet& params, const EncoderConfig& enc, const LatentConfig& latent) {
  params.add_xavier(kRecInner, 2 * enc.dim, enc.dim);
  params.add_xavier(kRecOuter, enc.dim, latent.K);
  params.add_xavier(kPred, enc.dim + latent.K, enc.dim);
}

}  // namespace

StudentModel StudentModel::init(const EncoderConfig& encoder, const Vocabulary& vocab,
                                std::uint64_t seed) {
  StudentModel m{encoder, vocab, ParamSet(seed)};
  add_model_encoder_params(m.params, encoder, vocab.size());
  return m;
}

EncodedText StudentModel::encode_text(const std::string& text, TextRole role) const {
  return encode(vocab.tokenize(text, role, encoder.max_context_tokens, encoder.max_action_tokens),
                params, encoder, role);
}

TeacherModel TeacherModel::init(const EncoderConfig& encoder, const LatentConfig& latent,
                                const Vocabulary& vocab, std::uint64_t seed) {
  latent.validate();
  TeacherModel m{encoder, latent, vocab, ParamSet(seed)};
  add_model_encoder_params(m.params, encoder, vocab.size());
  add_teacher_heads(m.params, encoder, latent);
  return m;
}

EncodedText TeacherModel::encode_text(const std::string& text, TextRole role) const {
  return encode(vocab.tokenize(text, role, encoder.max_context_tokens, encoder.max_action_tokens),
                params, encoder, role);
}

Tensor student_scores(const EncodedText& context, std::span<const EncodedText> candidates) {
  if (candidates.empty()) throw ArgumentError("student_scores: empty candidate list");
  std::vector<Tensor> rows;
  rows.reserve(candidates.size());
  for (const EncodedText& c : candidates) rows.push_back(c.vector);
  return ops::matvec(ops::stack_rows(rows), context.vector);
}

Tensor recognition_probs(const EncodedText& context, const EncodedText& action,
                         const ParamSet& params, const LatentConfig& latent) {
  Tensor joint = ops::concat(action.vector, context.vector);  // [h_x; h_c]
  Tensor hidden = ops::vecmat(joint, params.at(kRecInner));
  Tensor logits = ops::vecmat(hidden, params.at(kRecOuter));
  if (logits.size() != latent.K) {
    throw DimensionError("recognition head produces " + std::to_string(logits.size()) +
                         " classes, latent config has K = " + std::to_string(latent.K));
  }
  return ops::softmax(logits, 1.0);
}

PosteriorDistribution recognition_posterior(const EncodedText& context,
                                            const EncodedText& action, const ParamSet& params,
                                            const LatentConfig& latent) {
  Tensor probs = recognition_probs(context, action, params, latent);
  std::size_t arg = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs.at(i) > probs.at(arg)) arg = i;
  }
  return PosteriorDistribution{probs, ops::one_hot(probs.size(), arg)};
}

PosteriorDistribution recognition_posterior_sampled(const EncodedText& context,
                                                    const EncodedText& action,
                                                    const ParamSet& params,
                                                    const LatentConfig& latent,
                                                    const GumbelConfig& gumbel,
                                                    const std::vector<double>& noise) {
  Tensor probs = recognition_probs(context, action, params, latent);
  Tensor sample = ops::gumbel_softmax_sample(probs, gumbel.temperature, noise, gumbel.hard);
  return PosteriorDistribution{probs, sample};
}

Tensor teacher_scores(const EncodedText& context, const Tensor& z_sample,
                      std::span<const EncodedText> candidates, const ParamSet& params) {
  if (candidates.empty()) throw ArgumentError("teacher_scores: empty candidate list");
  Tensor h_cz = ops::vecmat(ops::concat(context.vector, z_sample), params.at(kPred));
  std::vector<Tensor> rows;
  rows.reserve(candidates.size());
  for (const EncodedText& c : candidates) rows.push_back(c.vector);
  return ops::matvec(ops::stack_rows(rows), h_cz);
}

Tensor student_loss(std::span<const EncodedSample> batch) {
  if (batch.empty()) throw ArgumentError("student_loss: empty batch");
  std::vector<Tensor> terms;
  terms.reserve(batch.size());
  for (const EncodedSample& s : batch) {
    if (s.gold_index >= s.candidates.size()) {
      throw ContractError("student_loss: gold index " + std::to_string(s.gold_index) +
                          " outside candidate list of size " +
                          std::to_string(s.candidates.size()));
    }
    Tensor scores = student_scores(s.context, s.candidates);
    terms.push_back(ops::cross_entropy(ops::one_hot(s.candidates.size(), s.gold_index),
                                       ops::log_softmax(scores, 1.0)));
  }
  return ops::mean_scalars(terms);
}

Tensor teacher_loss(std::span<const EncodedSample> batch, const ParamSet& params,
                    const LatentConfig& latent, double rec_weight, const GumbelConfig& gumbel) {
  if (batch.empty()) throw ArgumentError("teacher_loss: empty batch");
  std::vector<Tensor> pred_terms;
  std::vector<Tensor> posteriors;
  std::vector<Tensor> labelled;
  std::vector<int> labels;
  pred_terms.reserve(batch.size());
  posteriors.reserve(batch.size());
  for (const EncodedSample& s : batch) {
    if (s.gold_index >= s.candidates.size()) {
      throw ContractError("teacher_loss: gold index " + std::to_string(s.gold_index) +
                          " outside candidate list of size " +
                          std::to_string(s.candidates.size()));
    }
    if (s.gumbel_noise.size() != latent.K) {
      throw ContractError("teacher_loss: sample carries " +
                          std::to_string(s.gumbel_noise.size()) + " gumbel draws, need K = " +
                          std::to_string(latent.K));
    }
    // z' is sampled from the posterior of the gold (context, action) pair.
    PosteriorDistribution post = recognition_posterior_sampled(
        s.context, s.candidates[s.gold_index], params, latent, gumbel, s.gumbel_noise);
    Tensor scores = teacher_scores(s.context, post.sample, s.candidates, params);
    pred_terms.push_back(ops::cross_entropy(ops::one_hot(s.candidates.size(), s.gold_index),
                                            ops::log_softmax(scores, 1.0)));
    posteriors.push_back(post.probs);
    if (s.label) {
      labelled.push_back(post.probs);
      labels.push_back(*s.label);
    }
  }
  Tensor loss = ops::mean_scalars(pred_terms);
  if (rec_weight == 0.0) return loss;
  Tensor rec;
  switch (latent.mode) {
    case LatentMode::latent:
      rec = bpr_loss(posteriors);
      break;
    case LatentMode::persona:
    case LatentMode::intent:
      if (labelled.empty()) {
        return loss;  // no labelled samples: the alignment term is exactly zero
      }
      rec = label_ce_loss(labelled, labels);
      break;
  }
  return ops::add(loss, ops::scale(rec, rec_weight));
}

namespace {

std::map<std::string, std::string> common_metadata(const EncoderConfig& enc,
                                                   const Vocabulary& vocab) {
  std::ostringstream vocab_blob;
  for (const std::string& tok : vocab.lines()) vocab_blob << tok << '\n';
  return {
      {"d", std::to_string(enc.dim)},
      {"depth", std::to_string(enc.depth)},
      {"max_context_tokens", std::to_string(enc.max_context_tokens)},
      {"max_action_tokens", std::to_string(enc.max_action_tokens)},
      {"share_encoders", enc.share_encoders ? "1" : "0"},
      {"use_bias", enc.use_bias ? "1" : "0"},
      {"vocab", vocab_blob.str()},
  };
}

EncoderConfig encoder_from_metadata(const std::map<std::string, std::string>& meta) {
  EncoderConfig enc;
  enc.dim = std::stoul(meta.at("d"));
  enc.depth = std::stoul(meta.at("depth"));
  enc.max_context_tokens = std::stoul(meta.at("max_context_tokens"));
  enc.max_action_tokens = std::stoul(meta.at("max_action_tokens"));
  enc.share_encoders = meta.at("share_encoders") == "1";
  enc.use_bias = meta.at("use_bias") == "1";
  return enc;
}

Vocabulary vocab_from_metadata(const std::map<std::string, std::string>& meta) {
  std::vector<std::string> lines;
  std::istringstream is(meta.at("vocab"));
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return Vocabulary::from_lines(lines);
}

}  // namespace

void save_student(const std::string& path, const StudentModel& model) {
  auto meta = common_metadata(model.encoder, model.vocab);
  meta["kind"] = "student";
  save_paramset(path, model.params, meta);
}

void save_teacher(const std::string& path, const TeacherModel& model) {
  auto meta = common_metadata(model.encoder, model.vocab);
  meta["kind"] = "teacher";
  meta["latent_mode"] = latent_mode_name(model.latent.mode);
  meta["latent_k"] = std::to_string(model.latent.K);
  save_paramset(path, model.params, meta);
}

LoadedModel load_model(const std::string& path) {
  LoadedParamSet loaded = load_paramset(path);
  const auto& meta = loaded.metadata;
  if (!meta.count("kind")) throw ParseError(path + ": checkpoint is missing the model kind");
  LoadedModel out;
  out.kind = meta.at("kind");
  if (out.kind == "student") {
    out.student = StudentModel{encoder_from_metadata(meta), vocab_from_metadata(meta),
                               std::move(loaded.params)};
  } else if (out.kind == "teacher") {
    LatentConfig latent;
    latent.mode = latent_mode_from_name(meta.at("latent_mode"));
    latent.K = std::stoul(meta.at("latent_k"));
    out.teacher = TeacherModel{encoder_from_metadata(meta), latent, vocab_from_metadata(meta),
                               std::move(loaded.params)};
  } else {
    throw ParseError(path + ": unknown model kind '" + out.kind + "'");
  }
  return out;
}

}  // namespace pasa
