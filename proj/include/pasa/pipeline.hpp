#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pasa/alignment.hpp"
#include "pasa/data.hpp"
#include "pasa/models.hpp"

namespace pasa {

// Training settings. The defaults are the published hyperparameters:
// learning rate 5e-5 for both corpora, 1 pre-training epoch, 3 fine-tuning
// epochs, batch size 8, context/action caps 128/8 tokens, distillation
// temperature 20, beta 1.
struct TrainConfig {
  int stage = 1;
  LatentConfig latent;
  double learning_rate = 5e-5;
  std::optional<int> epochs;  // per-stage default when unset: 1 (1-2), 3 (3-4)
  int batch_size = 8;
  double kd_temperature = 20.0;
  double beta = 1.0;
  double rec_weight = 1.0;
  GumbelConfig gumbel;  // temperature 1.0, hard straight-through
  std::uint64_t seed = 1;
  EncoderConfig encoder;
  std::size_t min_token_freq = 1;
  bool kd_t2_scaling = false;     // multiply the soft term by T^2
  bool kd_marginalize_z = false;  // marginalize teacher targets over z

  int resolved_epochs(int for_stage) const;
  void validate() const;

  // JSON file with the documented key-value schema; unknown keys are
  // rejected. Missing keys keep their defaults.
  static TrainConfig from_json_file(const std::string& path);
};

struct StageReport {
  int stage = 0;
  int epochs_run = 0;
  int optimizer_steps = 0;
  double final_train_loss = 0.0;
  double wall_time_sec = 0.0;
  std::string checkpoint_path;

  std::string to_json_line() const;
};

// Appends one machine-readable record per stage run.
void append_run_log(const std::string& path, const StageReport& report);

// Stage 1: student pre-training on transcript samples with in-batch
// negatives.
std::pair<StudentModel, StageReport> run_stage1_student_pretrain(
    const TrainConfig& config, const std::vector<Sample>& samples);

// Stage 2: teacher pre-training; adds the alignment loss of the configured
// mode. Intent mode needs a lexicon; persona mode derives K from the
// distinct speakers in the data.
std::pair<TeacherModel, StageReport> run_stage2_teacher_pretrain(
    const TrainConfig& config, const std::vector<Sample>& samples,
    const PosLexicon* lexicon = nullptr);

// Stage 3: teacher fine-tuning on walkthrough samples with valid-action
// negatives. The persona alignment loss is disabled here.
StageReport run_stage3_teacher_finetune(const TrainConfig& config,
                                        const std::vector<Sample>& samples,
                                        TeacherModel& teacher, const PosLexicon* lexicon = nullptr);

// Soft distillation term at `temperature` plus beta times the hard
// cross-entropy at temperature 1. Teacher logits are constants: no gradient
// reaches the teacher.
Tensor kd_loss(const Tensor& student_logits, const std::vector<double>& teacher_logits,
               std::size_t gold_index, double temperature, double beta,
               bool t2_scaling = false);

// Stage 4: distills the frozen fine-tuned teacher into the stage-1 student
// on walkthrough samples. The teacher's z is drawn from the posterior of
// each gold pair with the stage seed (or marginalized over z when
// configured).
StageReport run_stage4_distill(const TrainConfig& config, const std::vector<Sample>& samples,
                               const TeacherModel& teacher, StudentModel& student);

// The hard-label-only counterpart of stage 4 (the "student-only" ablation):
// same batching, seeds and epochs, but trained on L_pred alone.
StageReport run_hard_label_finetune(const TrainConfig& config,
                                    const std::vector<Sample>& samples, StudentModel& student);

// Deterministic vocabulary over the contexts and gold actions of a sample
// set (used by both pre-training stages).
Vocabulary build_vocabulary(const std::vector<Sample>& samples, std::size_t min_freq);

}  // namespace pasa
