#include "pasa/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "pasa/adam.hpp"
#include "pasa/error.hpp"
#include "pasa/ops.hpp"

namespace pasa {

using nlohmann::json;

int TrainConfig::resolved_epochs(int for_stage) const {
  if (epochs) return *epochs;
  return for_stage <= 2 ? 1 : 3;
}

void TrainConfig::validate() const {
  if (stage < 1 || stage > 4) throw ArgumentError("config: stage must be 1..4");
  if (!(learning_rate > 0.0)) throw ArgumentError("config: learning_rate must be positive");
  if (epochs && *epochs < 1) throw ArgumentError("config: epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("config: batch_size must be >= 1");
  if (!(kd_temperature > 0.0)) throw ArgumentError("config: kd_temperature must be positive");
  if (beta < 0.0) throw ArgumentError("config: beta must be >= 0");
  if (rec_weight < 0.0) throw ArgumentError("config: rec_weight must be >= 0");
  if (!(gumbel.temperature > 0.0)) {
    throw ArgumentError("config: gumbel temperature must be positive");
  }
  if (encoder.dim == 0 || encoder.depth == 0) {
    throw ArgumentError("config: encoder d and depth must be >= 1");
  }
  latent.validate();
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&key](const char* k) { return key == k; }) == known.end()) {
      throw ParseError("config: unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

TrainConfig TrainConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file '" + path + "'");
  json root;
  try {
    is >> root;
  } catch (const json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  if (!root.is_object()) throw ParseError("config '" + path + "': expected a JSON object");
  reject_unknown_keys(root,
                      {"stage", "latent", "learning_rate", "epochs", "batch_size",
                       "kd_temperature", "beta", "rec_weight", "gumbel", "seed", "encoder",
                       "min_token_freq", "kd_t2_scaling", "kd_marginalize_z"},
                      "top level");
  TrainConfig cfg;
  try {
    cfg.stage = root.value("stage", cfg.stage);
    if (root.contains("latent")) {
      const json& l = root.at("latent");
      reject_unknown_keys(l, {"mode", "K"}, "latent");
      cfg.latent.mode = latent_mode_from_name(l.value("mode", latent_mode_name(cfg.latent.mode)));
      cfg.latent.K = l.value("K", cfg.latent.K);
      if (cfg.latent.mode == LatentMode::intent && !l.contains("K")) {
        cfg.latent.K = kIntentClassCount;
      }
    }
    cfg.learning_rate = root.value("learning_rate", cfg.learning_rate);
    if (root.contains("epochs")) cfg.epochs = root.at("epochs").get<int>();
    cfg.batch_size = root.value("batch_size", cfg.batch_size);
    cfg.kd_temperature = root.value("kd_temperature", cfg.kd_temperature);
    cfg.beta = root.value("beta", cfg.beta);
    cfg.rec_weight = root.value("rec_weight", cfg.rec_weight);
    if (root.contains("gumbel")) {
      const json& g = root.at("gumbel");
      reject_unknown_keys(g, {"temperature", "hard"}, "gumbel");
      cfg.gumbel.temperature = g.value("temperature", cfg.gumbel.temperature);
      cfg.gumbel.hard = g.value("hard", cfg.gumbel.hard);
    }
    cfg.seed = root.value("seed", cfg.seed);
    if (root.contains("encoder")) {
      const json& e = root.at("encoder");
      reject_unknown_keys(
          e, {"d", "depth", "share", "bias", "max_context_tokens", "max_action_tokens"},
          "encoder");
      cfg.encoder.dim = e.value("d", cfg.encoder.dim);
      cfg.encoder.depth = e.value("depth", cfg.encoder.depth);
      cfg.encoder.share_encoders = e.value("share", cfg.encoder.share_encoders);
      cfg.encoder.use_bias = e.value("bias", cfg.encoder.use_bias);
      cfg.encoder.max_context_tokens =
          e.value("max_context_tokens", cfg.encoder.max_context_tokens);
      cfg.encoder.max_action_tokens = e.value("max_action_tokens", cfg.encoder.max_action_tokens);
    }
    cfg.min_token_freq = root.value("min_token_freq", cfg.min_token_freq);
    cfg.kd_t2_scaling = root.value("kd_t2_scaling", cfg.kd_t2_scaling);
    cfg.kd_marginalize_z = root.value("kd_marginalize_z", cfg.kd_marginalize_z);
  } catch (const json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string StageReport::to_json_line() const {
  return json{{"stage", stage},
              {"epochs_run", epochs_run},
              {"optimizer_steps", optimizer_steps},
              {"final_train_loss", final_train_loss},
              {"wall_time_sec", wall_time_sec},
              {"checkpoint_path", checkpoint_path}}
      .dump();
}

void append_run_log(const std::string& path, const StageReport& report) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot open run log '" + path + "' for appending");
  os << report.to_json_line() << '\n';
}

Vocabulary build_vocabulary(const std::vector<Sample>& samples, std::size_t min_freq) {
  std::vector<std::string> texts;
  texts.reserve(samples.size() * 2);
  for (const Sample& s : samples) {
    texts.push_back(s.context);
    texts.push_back(s.gold_action);
  }
  return Vocabulary::build(texts, min_freq);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size,
                                                    RandomStream& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

// Candidate lists per batch sample. In-batch policy degenerates to the gold
// alone for a trailing batch of one.
std::vector<CandidateSet> batch_candidates(const std::vector<Sample>& samples,
                                           const std::vector<std::size_t>& batch,
                                           NegativesPolicy policy) {
  std::vector<Sample> view;
  view.reserve(batch.size());
  for (std::size_t idx : batch) view.push_back(samples[idx]);
  if (policy == NegativesPolicy::in_batch && view.size() == 1) {
    return {CandidateSet{{view[0].gold_action}, 0}};
  }
  return sample_negatives(view, policy);
}

// Per-batch action-encoding cache; encoding is pure given fixed parameters.
class ActionEncodeCache {
 public:
  ActionEncodeCache(const ParamSet& params, const EncoderConfig& enc, const Vocabulary& vocab)
      : params_(params), enc_(enc), vocab_(vocab) {}

  const EncodedText& get(const std::string& action) {
    auto it = cache_.find(action);
    if (it != cache_.end()) return it->second;
    EncodedText enc = encode(
        vocab_.tokenize(action, TextRole::action, enc_.max_context_tokens, enc_.max_action_tokens),
        params_, enc_, TextRole::action);
    return cache_.emplace(action, std::move(enc)).first->second;
  }

 private:
  const ParamSet& params_;
  const EncoderConfig& enc_;
  const Vocabulary& vocab_;
  std::map<std::string, EncodedText> cache_;
};

EncodedText encode_context(const std::string& text, const ParamSet& params,
                           const EncoderConfig& enc, const Vocabulary& vocab) {
  return encode(vocab.tokenize(text, TextRole::context, enc.max_context_tokens,
                               enc.max_action_tokens),
                params, enc, TextRole::context);
}

struct EpochStats {
  double loss_sum = 0.0;
  std::size_t samples = 0;
  int steps = 0;
  double mean() const { return samples ? loss_sum / static_cast<double>(samples) : 0.0; }
};

ParamSet detached_copy(const ParamSet& params) {
  ParamSet out(params.seed());
  for (const std::string& name : params.names()) {
    out.add(name, params.at(name).detach());
  }
  return out;
}

std::size_t draw_categorical(const std::vector<double>& probs, RandomStream& rng) {
  double r = rng.next_unit();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    r -= probs[i];
    if (r <= 0.0) return i;
  }
  return probs.size() - 1;
}

}  // namespace

std::pair<StudentModel, StageReport> run_stage1_student_pretrain(
    const TrainConfig& config, const std::vector<Sample>& samples) {
  config.validate();
  if (samples.empty()) throw ArgumentError("stage 1: empty dataset");
  const auto start = Clock::now();

  Vocabulary vocab = build_vocabulary(samples, config.min_token_freq);
  StudentModel student =
      StudentModel::init(config.encoder, vocab, mix_seed(config.seed, fnv1a64("stage1-init")));
  AdamState adam = AdamState::for_params(student.params, config.learning_rate);
  RandomStream rng(mix_seed(config.seed, fnv1a64("stage1-train")));

  const int epochs = config.resolved_epochs(1);
  EpochStats stats;
  int steps = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    stats = EpochStats{};
    for (const auto& batch : epoch_batches(samples.size(), config.batch_size, rng)) {
      const auto candidates = batch_candidates(samples, batch, NegativesPolicy::in_batch);
      ActionEncodeCache actions(student.params, student.encoder, student.vocab);
      std::vector<EncodedSample> encoded;
      encoded.reserve(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        EncodedSample es;
        es.context = encode_context(samples[batch[i]].context, student.params, student.encoder,
                                    student.vocab);
        for (const std::string& cand : candidates[i].candidates) {
          es.candidates.push_back(actions.get(cand));
        }
        es.gold_index = candidates[i].gold_index;
        encoded.push_back(std::move(es));
      }
      Tensor loss = student_loss(encoded);
      student.params.zero_grads();
      loss.backward();
      adam_step(student.params, adam);
      ++steps;
      stats.loss_sum += loss.value() * static_cast<double>(batch.size());
      stats.samples += batch.size();
    }
  }

  StageReport report;
  report.stage = 1;
  report.epochs_run = epochs;
  report.optimizer_steps = steps;
  report.final_train_loss = stats.mean();
  report.wall_time_sec = seconds_since(start);
  return {std::move(student), report};
}

namespace {

// Shared inner loop for teacher training (stages 2 and 3).
EpochStats teacher_epoch(TeacherModel& teacher, AdamState& adam,
                         const std::vector<Sample>& samples,
                         const std::vector<std::optional<int>>& labels,
                         const TrainConfig& config, NegativesPolicy policy, RandomStream& rng) {
  EpochStats stats;
  for (const auto& batch : epoch_batches(samples.size(), config.batch_size, rng)) {
    const auto candidates = batch_candidates(samples, batch, policy);
    ActionEncodeCache actions(teacher.params, teacher.encoder, teacher.vocab);
    std::vector<EncodedSample> encoded;
    encoded.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      EncodedSample es;
      es.context = encode_context(samples[batch[i]].context, teacher.params, teacher.encoder,
                                  teacher.vocab);
      for (const std::string& cand : candidates[i].candidates) {
        es.candidates.push_back(actions.get(cand));
      }
      es.gold_index = candidates[i].gold_index;
      es.label = labels[batch[i]];
      es.gumbel_noise = ops::draw_gumbel_noise(rng, teacher.latent.K);
      encoded.push_back(std::move(es));
    }
    Tensor loss =
        teacher_loss(encoded, teacher.params, teacher.latent, config.rec_weight, config.gumbel);
    teacher.params.zero_grads();
    loss.backward();
    adam_step(teacher.params, adam);
    ++stats.steps;
    stats.loss_sum += loss.value() * static_cast<double>(batch.size());
    stats.samples += batch.size();
  }
  return stats;
}

std::vector<std::optional<int>> stage_labels(const std::vector<Sample>& samples,
                                             const LatentConfig& latent,
                                             const PosLexicon* lexicon, int stage) {
  if (latent.mode == LatentMode::intent) {
    if (lexicon == nullptr) {
      throw ContractError("stage " + std::to_string(stage) + ": intent mode needs a lexicon");
    }
    return assign_labels(samples, latent, *lexicon);
  }
  if (latent.mode == LatentMode::persona && stage == 2) {
    PosLexicon unused;
    return assign_labels(samples, latent, unused);
  }
  // latent mode (BPR only), and persona outside pre-training.
  return std::vector<std::optional<int>>(samples.size());
}

}  // namespace

std::pair<TeacherModel, StageReport> run_stage2_teacher_pretrain(
    const TrainConfig& config, const std::vector<Sample>& samples, const PosLexicon* lexicon) {
  config.validate();
  if (samples.empty()) throw ArgumentError("stage 2: empty dataset");
  const auto start = Clock::now();

  LatentConfig latent = config.latent;
  if (latent.mode == LatentMode::persona) {
    const std::size_t speakers = speaker_order(samples).size();
    if (speakers < 1) throw ContractError("stage 2: persona mode requires speaker ids");
    latent.K = speakers;
  }
  latent.validate();

  Vocabulary vocab = build_vocabulary(samples, config.min_token_freq);
  TeacherModel teacher = TeacherModel::init(config.encoder, latent, vocab,
                                            mix_seed(config.seed, fnv1a64("stage2-init")));
  AdamState adam = AdamState::for_params(teacher.params, config.learning_rate);
  RandomStream rng(mix_seed(config.seed, fnv1a64("stage2-train")));
  const auto labels = stage_labels(samples, latent, lexicon, 2);

  const int epochs = config.resolved_epochs(2);
  EpochStats stats;
  int steps = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    stats = teacher_epoch(teacher, adam, samples, labels, config, NegativesPolicy::in_batch, rng);
    steps += stats.steps;
  }

  StageReport report;
  report.stage = 2;
  report.epochs_run = epochs;
  report.optimizer_steps = steps;
  report.final_train_loss = stats.mean();
  report.wall_time_sec = seconds_since(start);
  return {std::move(teacher), report};
}

StageReport run_stage3_teacher_finetune(const TrainConfig& config,
                                        const std::vector<Sample>& samples,
                                        TeacherModel& teacher, const PosLexicon* lexicon) {
  config.validate();
  if (samples.empty()) throw ArgumentError("stage 3: empty dataset");
  for (const Sample& s : samples) {
    if (!s.valid_actions) {
      throw ContractError("stage 3: walkthrough sample is missing valid_actions");
    }
  }
  const auto start = Clock::now();

  AdamState adam = AdamState::for_params(teacher.params, config.learning_rate);
  RandomStream rng(mix_seed(config.seed, fnv1a64("stage3-train")));
  // Persona alignment is a pre-training-only loss; latent and intent stay on.
  const auto labels = stage_labels(samples, teacher.latent, lexicon, 3);

  const int epochs = config.resolved_epochs(3);
  EpochStats stats;
  int steps = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    stats = teacher_epoch(teacher, adam, samples, labels, config, NegativesPolicy::valid_actions,
                          rng);
    steps += stats.steps;
  }

  StageReport report;
  report.stage = 3;
  report.epochs_run = epochs;
  report.optimizer_steps = steps;
  report.final_train_loss = stats.mean();
  report.wall_time_sec = seconds_since(start);
  return report;
}

Tensor kd_loss(const Tensor& student_logits, const std::vector<double>& teacher_logits,
               std::size_t gold_index, double temperature, double beta, bool t2_scaling) {
  if (!student_logits.is_vector()) {
    throw DimensionError("kd_loss: student logits must be a vector, got " +
                         student_logits.shape_str());
  }
  if (student_logits.size() != teacher_logits.size()) {
    throw ContractError("kd_loss: student has " + std::to_string(student_logits.size()) +
                        " logits, teacher has " + std::to_string(teacher_logits.size()));
  }
  if (gold_index >= student_logits.size()) {
    throw ContractError("kd_loss: gold index " + std::to_string(gold_index) + " out of range");
  }
  if (!(temperature > 0.0)) {
    throw ArgumentError("kd_loss: temperature must be positive");
  }
  // Teacher soft targets are plain values: no gradient flows to the teacher.
  const std::size_t m = teacher_logits.size();
  const double mx = *std::max_element(teacher_logits.begin(), teacher_logits.end()) / temperature;
  std::vector<double> soft_targets(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    soft_targets[i] = std::exp(teacher_logits[i] / temperature - mx);
    sum += soft_targets[i];
  }
  for (double& v : soft_targets) v /= sum;

  Tensor soft = ops::cross_entropy(Tensor::row_vector(std::move(soft_targets)),
                                   ops::log_softmax(student_logits, temperature));
  if (t2_scaling) soft = ops::scale(soft, temperature * temperature);
  Tensor hard = ops::cross_entropy(ops::one_hot(m, gold_index),
                                   ops::log_softmax(student_logits, 1.0));
  return ops::add(soft, ops::scale(hard, beta));
}

namespace {

// Teacher candidate logits with z from the gold pair's posterior; pure
// value computation on a detached parameter copy.
std::vector<double> teacher_soft_logits(const TeacherModel& teacher, const ParamSet& frozen,
                                        const Sample& sample, const CandidateSet& candidates,
                                        bool marginalize, double kd_temperature,
                                        RandomStream& rng) {
  EncodedText ctx =
      encode_context(sample.context, frozen, teacher.encoder, teacher.vocab);
  ActionEncodeCache actions(frozen, teacher.encoder, teacher.vocab);
  std::vector<EncodedText> cands;
  cands.reserve(candidates.candidates.size());
  for (const std::string& c : candidates.candidates) cands.push_back(actions.get(c));

  Tensor probs = recognition_probs(ctx, cands[candidates.gold_index], frozen, teacher.latent);
  if (!marginalize) {
    const std::size_t z_index = draw_categorical(probs.values(), rng);
    Tensor z = ops::one_hot(teacher.latent.K, z_index);
    return teacher_scores(ctx, z, cands, frozen).values();
  }
  // Marginal soft targets: sum_k q(k) * softmax(scores_k / T), folded back
  // into log space so kd_loss can re-apply its softmax.
  const std::size_t m = cands.size();
  std::vector<double> mixture(m, 0.0);
  for (std::size_t k = 0; k < teacher.latent.K; ++k) {
    Tensor z = ops::one_hot(teacher.latent.K, k);
    Tensor sm = ops::softmax(teacher_scores(ctx, z, cands, frozen), kd_temperature);
    for (std::size_t i = 0; i < m; ++i) mixture[i] += probs.at(k) * sm.at(i);
  }
  std::vector<double> logits(m);
  for (std::size_t i = 0; i < m; ++i) {
    logits[i] = kd_temperature * std::log(std::max(mixture[i], 1e-300));
  }
  return logits;
}

// Shared loop for stage 4 and the hard-label ablation. When `teacher` is
// null the soft term is dropped and the loss is plain L_pred.
StageReport student_finetune_loop(const TrainConfig& config, const std::vector<Sample>& samples,
                                  const TeacherModel* teacher, StudentModel& student,
                                  int stage_id) {
  config.validate();
  if (samples.empty()) throw ArgumentError("stage 4: empty dataset");
  for (const Sample& s : samples) {
    if (!s.valid_actions) {
      throw ContractError("stage 4: walkthrough sample is missing valid_actions");
    }
  }
  const auto start = Clock::now();

  AdamState adam = AdamState::for_params(student.params, config.learning_rate);
  RandomStream rng(mix_seed(config.seed, fnv1a64("stage4-train")));
  ParamSet frozen = teacher ? detached_copy(teacher->params) : ParamSet(0);

  const int epochs = config.resolved_epochs(4);
  EpochStats stats;
  int steps = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    stats = EpochStats{};
    for (const auto& batch : epoch_batches(samples.size(), config.batch_size, rng)) {
      const auto candidates = batch_candidates(samples, batch, NegativesPolicy::valid_actions);
      ActionEncodeCache actions(student.params, student.encoder, student.vocab);
      std::vector<Tensor> terms;
      terms.reserve(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const Sample& sample = samples[batch[i]];
        EncodedText ctx =
            encode_context(sample.context, student.params, student.encoder, student.vocab);
        std::vector<EncodedText> cands;
        cands.reserve(candidates[i].candidates.size());
        for (const std::string& c : candidates[i].candidates) cands.push_back(actions.get(c));
        Tensor logits = student_scores(ctx, cands);
        if (teacher) {
          const std::vector<double> tlogits =
              teacher_soft_logits(*teacher, frozen, sample, candidates[i],
                                  config.kd_marginalize_z, config.kd_temperature, rng);
          terms.push_back(kd_loss(logits, tlogits, candidates[i].gold_index,
                                  config.kd_temperature, config.beta, config.kd_t2_scaling));
        } else {
          terms.push_back(
              ops::cross_entropy(ops::one_hot(cands.size(), candidates[i].gold_index),
                                 ops::log_softmax(logits, 1.0)));
        }
      }
      Tensor loss = ops::mean_scalars(terms);
      student.params.zero_grads();
      loss.backward();
      adam_step(student.params, adam);
      ++steps;
      stats.loss_sum += loss.value() * static_cast<double>(batch.size());
      stats.samples += batch.size();
    }
  }

  StageReport report;
  report.stage = stage_id;
  report.epochs_run = epochs;
  report.optimizer_steps = steps;
  report.final_train_loss = stats.mean();
  report.wall_time_sec = seconds_since(start);
  return report;
}

}  // namespace

StageReport run_stage4_distill(const TrainConfig& config, const std::vector<Sample>& samples,
                               const TeacherModel& teacher, StudentModel& student) {
  return student_finetune_loop(config, samples, &teacher, student, 4);
}

StageReport run_hard_label_finetune(const TrainConfig& config,
                                    const std::vector<Sample>& samples, StudentModel& student) {
  return student_finetune_loop(config, samples, nullptr, student, 4);
}

}  // namespace pasa
