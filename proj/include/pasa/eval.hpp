#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pasa/data.hpp"
#include "pasa/models.hpp"

namespace pasa {

struct GameEvalRow {
  std::string game_id;
  std::optional<Difficulty> difficulty;
  std::size_t n_samples = 0;
  double mean_valid_actions = 0.0;
  double recall_at_1 = 0.0;
};

struct EvalResult {
  std::vector<GameEvalRow> per_game;  // sorted by game_id
  double overall_recall = 0.0;        // mean of per_sample_correct
  std::vector<std::uint8_t> per_sample_correct;
  double candidate_count_mean = 0.0;
};

// Recall@1 over the valid-action pools: per sample, the argmax of the
// student scores (ties broken by the lowest candidate index) must be the
// gold action. Samples must carry valid_actions.
EvalResult eval_recall_at_1(const StudentModel& student, const std::vector<Sample>& samples);

// Teacher analogue with posterior (gold-pair) access: z is the MAP sample
// of q(z | x_gold, c).
EvalResult eval_recall_at_1_teacher(const TeacherModel& teacher,
                                    const std::vector<Sample>& samples);

// Validation protocol without valid actions: each gold is ranked against 9
// distinct distractor golds drawn (seeded, without replacement) from the
// other samples. Distractors never equal the gold string.
double eval_validation_9neg(const StudentModel& student, const std::vector<Sample>& samples,
                            std::uint64_t seed);
double eval_validation_9neg(const TeacherModel& teacher, const std::vector<Sample>& samples,
                            std::uint64_t seed);

// Pluggable-scorer forms of the two protocols (scores per candidate, same
// argmax and aggregation rules); used for baselines and harness checks.
using ScoreFunction =
    std::function<std::vector<double>(const Sample&, const std::vector<std::string>&)>;
EvalResult eval_recall_at_1_scores(const ScoreFunction& scorer,
                                   const std::vector<Sample>& samples);
double eval_validation_9neg_scores(const ScoreFunction& scorer,
                                   const std::vector<Sample>& samples, std::uint64_t seed);

struct SignificanceReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

// Welch two-sample t-test (unequal variances) on per-sample correctness,
// two-sided p-value. When both sides have zero variance: p = 1 for equal
// means, p = 0 otherwise.
SignificanceReport t_test(const std::vector<std::uint8_t>& correctness_a,
                          const std::vector<std::uint8_t>& correctness_b);

// Paired one-sided t-test of H1: mean(a - b) > 0.
SignificanceReport paired_t_test_one_sided(const std::vector<double>& a,
                                           const std::vector<double>& b);

struct CorpusStats {
  std::size_t unique_games = 0;
  std::size_t transcripts = 0;
  std::size_t samples = 0;  // total steps
  std::size_t vocab_size = 0;
  double vocab_size_game_avg = 0.0;
  std::size_t reward_transcripts = 0;  // with at least one score increase
  std::optional<double> steps_per_reward_avg;
  // (transcript id "game_id/ordinal", normalized final score), file order.
  std::vector<std::pair<std::string, double>> normalized_scores;
  // (rank fraction, normalized score) sorted ascending by score.
  std::vector<std::pair<double, double>> score_cdf;
};

CorpusStats corpus_stats(const std::vector<Transcript>& transcripts,
                         const ScorePatterns& patterns);

}  // namespace pasa
