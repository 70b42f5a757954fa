#include "pasa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "pasa/error.hpp"
#include "pasa/ops.hpp"
#include "pasa/vocab.hpp"

namespace pasa {

namespace {

ParamSet detached_copy(const ParamSet& params) {
  ParamSet out(params.seed());
  for (const std::string& name : params.names()) out.add(name, params.at(name).detach());
  return out;
}

struct FrozenScorer {
  const EncoderConfig& enc;
  const Vocabulary& vocab;
  ParamSet frozen;
  std::map<std::string, EncodedText> action_cache;

  EncodedText context(const std::string& text) {
    return encode(vocab.tokenize(text, TextRole::context, enc.max_context_tokens,
                                 enc.max_action_tokens),
                  frozen, enc, TextRole::context);
  }
  const EncodedText& action(const std::string& text) {
    auto it = action_cache.find(text);
    if (it != action_cache.end()) return it->second;
    EncodedText e = encode(vocab.tokenize(text, TextRole::action, enc.max_context_tokens,
                                          enc.max_action_tokens),
                           frozen, enc, TextRole::action);
    return action_cache.emplace(text, std::move(e)).first->second;
  }
};

std::size_t argmax_lowest_index_values(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

// Shared recall@1 harness; score_fn maps (sample, candidates, gold_index)
// to one score per candidate.
template <typename ScoreFn>
EvalResult recall_harness(const std::vector<Sample>& samples, ScoreFn&& score_fn) {
  EvalResult result;
  result.per_sample_correct.reserve(samples.size());
  struct GameAgg {
    std::optional<Difficulty> difficulty;
    std::size_t n = 0;
    std::size_t correct = 0;
    double candidates = 0.0;
  };
  std::map<std::string, GameAgg> games;
  double candidate_total = 0.0;
  for (const Sample& s : samples) {
    if (!s.valid_actions) {
      throw ContractError("eval_recall_at_1: sample is missing valid_actions");
    }
    const auto it = std::find(s.valid_actions->begin(), s.valid_actions->end(), s.gold_action);
    if (it == s.valid_actions->end()) {
      throw ContractError("eval_recall_at_1: gold action '" + s.gold_action +
                          "' missing from valid actions");
    }
    const std::size_t gold_index =
        static_cast<std::size_t>(it - s.valid_actions->begin());
    const std::vector<double> scores = score_fn(s, *s.valid_actions, gold_index);
    if (scores.size() != s.valid_actions->size()) {
      throw ContractError("eval_recall_at_1: scorer returned " +
                          std::to_string(scores.size()) + " scores for " +
                          std::to_string(s.valid_actions->size()) + " candidates");
    }
    const bool correct = argmax_lowest_index_values(scores) == gold_index;
    result.per_sample_correct.push_back(correct ? 1 : 0);
    GameAgg& agg = games[s.game_id];
    agg.difficulty = s.difficulty;
    agg.n += 1;
    agg.correct += correct ? 1 : 0;
    agg.candidates += static_cast<double>(s.valid_actions->size());
    candidate_total += static_cast<double>(s.valid_actions->size());
  }
  std::size_t correct_total = 0;
  for (std::uint8_t c : result.per_sample_correct) correct_total += c;
  result.overall_recall = samples.empty()
                              ? 0.0
                              : static_cast<double>(correct_total) /
                                    static_cast<double>(samples.size());
  result.candidate_count_mean =
      samples.empty() ? 0.0 : candidate_total / static_cast<double>(samples.size());
  for (const auto& [game_id, agg] : games) {
    GameEvalRow row;
    row.game_id = game_id;
    row.difficulty = agg.difficulty;
    row.n_samples = agg.n;
    row.mean_valid_actions = agg.candidates / static_cast<double>(agg.n);
    row.recall_at_1 = static_cast<double>(agg.correct) / static_cast<double>(agg.n);
    result.per_game.push_back(std::move(row));
  }
  return result;
}

}  // namespace

EvalResult eval_recall_at_1(const StudentModel& student, const std::vector<Sample>& samples) {
  FrozenScorer scorer{student.encoder, student.vocab, detached_copy(student.params), {}};
  return recall_harness(samples, [&scorer](const Sample& s, const std::vector<std::string>& cands,
                                           std::size_t) {
    EncodedText ctx = scorer.context(s.context);
    std::vector<EncodedText> enc;
    enc.reserve(cands.size());
    for (const std::string& a : cands) enc.push_back(scorer.action(a));
    return student_scores(ctx, enc).values();
  });
}

EvalResult eval_recall_at_1_teacher(const TeacherModel& teacher,
                                    const std::vector<Sample>& samples) {
  FrozenScorer scorer{teacher.encoder, teacher.vocab, detached_copy(teacher.params), {}};
  const LatentConfig latent = teacher.latent;
  return recall_harness(samples, [&scorer, &latent](const Sample& s,
                                                    const std::vector<std::string>& cands,
                                                    std::size_t gold_index) {
    EncodedText ctx = scorer.context(s.context);
    std::vector<EncodedText> enc;
    enc.reserve(cands.size());
    for (const std::string& a : cands) enc.push_back(scorer.action(a));
    PosteriorDistribution post = recognition_posterior(ctx, enc[gold_index], scorer.frozen, latent);
    return teacher_scores(ctx, post.sample, enc, scorer.frozen).values();
  });
}

EvalResult eval_recall_at_1_scores(const ScoreFunction& scorer,
                                   const std::vector<Sample>& samples) {
  return recall_harness(samples, [&scorer](const Sample& s, const std::vector<std::string>& cands,
                                           std::size_t) { return scorer(s, cands); });
}

namespace {

template <typename ScoreFn>
double nine_negative_harness(const std::vector<Sample>& samples, std::uint64_t seed,
                             ScoreFn&& score_fn) {
  if (samples.empty()) throw ArgumentError("eval_validation_9neg: empty sample list");
  std::set<std::string> distinct;
  for (const Sample& s : samples) distinct.insert(s.gold_action);
  if (distinct.size() < 10) {
    throw ArgumentError("eval_validation_9neg: need at least 10 distinct actions, got " +
                        std::to_string(distinct.size()));
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    std::vector<std::string> pool;
    pool.reserve(distinct.size());
    for (const std::string& a : distinct) {
      if (a != s.gold_action) pool.push_back(a);
    }
    RandomStream rng(mix_seed(seed, i));
    // Partial Fisher-Yates: the first 9 slots become the distractors.
    for (std::size_t j = 0; j < 9; ++j) {
      const std::size_t k = j + rng.next_index(pool.size() - j);
      std::swap(pool[j], pool[k]);
    }
    std::vector<std::string> candidates(pool.begin(), pool.begin() + 9);
    const std::size_t gold_pos = rng.next_index(10);
    candidates.insert(candidates.begin() + static_cast<std::ptrdiff_t>(gold_pos),
                      s.gold_action);
    const std::vector<double> scores = score_fn(s, candidates, gold_pos);
    if (argmax_lowest_index_values(scores) == gold_pos) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace

double eval_validation_9neg(const StudentModel& student, const std::vector<Sample>& samples,
                            std::uint64_t seed) {
  FrozenScorer scorer{student.encoder, student.vocab, detached_copy(student.params), {}};
  return nine_negative_harness(
      samples, seed,
      [&scorer](const Sample& s, const std::vector<std::string>& cands, std::size_t) {
        EncodedText ctx = scorer.context(s.context);
        std::vector<EncodedText> enc;
        enc.reserve(cands.size());
        for (const std::string& a : cands) enc.push_back(scorer.action(a));
        return student_scores(ctx, enc).values();
      });
}

double eval_validation_9neg(const TeacherModel& teacher, const std::vector<Sample>& samples,
                            std::uint64_t seed) {
  FrozenScorer scorer{teacher.encoder, teacher.vocab, detached_copy(teacher.params), {}};
  const LatentConfig latent = teacher.latent;
  return nine_negative_harness(
      samples, seed,
      [&scorer, &latent](const Sample& s, const std::vector<std::string>& cands,
                         std::size_t gold_pos) {
        EncodedText ctx = scorer.context(s.context);
        std::vector<EncodedText> enc;
        enc.reserve(cands.size());
        for (const std::string& a : cands) enc.push_back(scorer.action(a));
        PosteriorDistribution post =
            recognition_posterior(ctx, enc[gold_pos], scorer.frozen, latent);
        return teacher_scores(ctx, post.sample, enc, scorer.frozen).values();
      });
}

double eval_validation_9neg_scores(const ScoreFunction& scorer,
                                   const std::vector<Sample>& samples, std::uint64_t seed) {
  return nine_negative_harness(samples, seed,
                               [&scorer](const Sample& s, const std::vector<std::string>& cands,
                                         std::size_t) { return scorer(s, cands); });
}

namespace {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  std::size_t n = 0;
};

template <typename T>
MeanVar mean_var(const std::vector<T>& v) {
  MeanVar out;
  out.n = v.size();
  for (T x : v) out.mean += static_cast<double>(x);
  out.mean /= static_cast<double>(out.n);
  if (out.n > 1) {
    for (T x : v) {
      const double d = static_cast<double>(x) - out.mean;
      out.var += d * d;
    }
    out.var /= static_cast<double>(out.n - 1);
  }
  return out;
}

double student_t_sf(double t, double df) {
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace

SignificanceReport t_test(const std::vector<std::uint8_t>& correctness_a,
                          const std::vector<std::uint8_t>& correctness_b) {
  if (correctness_a.empty() || correctness_b.empty()) {
    throw ArgumentError("t_test: both samples must be non-empty");
  }
  const MeanVar a = mean_var(correctness_a);
  const MeanVar b = mean_var(correctness_b);
  SignificanceReport report;
  report.n_a = a.n;
  report.n_b = b.n;
  const double se2 = a.var / static_cast<double>(a.n) + b.var / static_cast<double>(b.n);
  if (se2 == 0.0) {
    // Degenerate: constant vectors on both sides.
    report.statistic = 0.0;
    report.p_value = (a.mean == b.mean) ? 1.0 : 0.0;
    return report;
  }
  report.statistic = (a.mean - b.mean) / std::sqrt(se2);
  const double va = a.var / static_cast<double>(a.n);
  const double vb = b.var / static_cast<double>(b.n);
  const double df = (va + vb) * (va + vb) /
                    (va * va / static_cast<double>(a.n - 1) +
                     vb * vb / static_cast<double>(b.n - 1));
  report.p_value = 2.0 * student_t_sf(std::abs(report.statistic), df);
  report.p_value = std::min(1.0, report.p_value);
  return report;
}

SignificanceReport paired_t_test_one_sided(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw ArgumentError("paired_t_test: samples must be non-empty and equal-length");
  }
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const MeanVar d = mean_var(diff);
  SignificanceReport report;
  report.n_a = a.size();
  report.n_b = b.size();
  if (d.var == 0.0 || a.size() < 2) {
    report.statistic = d.mean > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    report.p_value = d.mean > 0.0 ? 0.0 : 1.0;
    return report;
  }
  report.statistic = d.mean / std::sqrt(d.var / static_cast<double>(d.n));
  report.p_value = student_t_sf(report.statistic, static_cast<double>(d.n - 1));
  return report;
}

CorpusStats corpus_stats(const std::vector<Transcript>& transcripts,
                         const ScorePatterns& patterns) {
  CorpusStats stats;
  stats.transcripts = transcripts.size();
  std::set<std::string> games;
  std::set<std::string> global_vocab;
  std::map<std::string, std::set<std::string>> per_game_vocab;
  std::map<std::string, std::size_t> game_ordinal;
  double spr_sum = 0.0;
  std::vector<double> normalized;
  for (const Transcript& t : transcripts) {
    games.insert(t.game_id);
    stats.samples += t.steps.size();
    auto& game_vocab = per_game_vocab[t.game_id];
    for (const Step& s : t.steps) {
      for (const std::string& tok : split_words(s.observation)) {
        global_vocab.insert(tok);
        game_vocab.insert(tok);
      }
      for (const std::string& tok : split_words(s.action)) {
        global_vocab.insert(tok);
        game_vocab.insert(tok);
      }
    }
    if (const auto spr = steps_per_reward(t)) {
      stats.reward_transcripts += 1;
      spr_sum += *spr;
    }
    const std::size_t ordinal = game_ordinal[t.game_id]++;
    if (const auto scores = extract_scores(t, patterns)) {
      const double norm = normalize_score(scores->first, scores->second);
      stats.normalized_scores.emplace_back(t.game_id + "/" + std::to_string(ordinal), norm);
      normalized.push_back(norm);
    }
  }
  stats.unique_games = games.size();
  stats.vocab_size = global_vocab.size();
  if (!per_game_vocab.empty()) {
    double sum = 0.0;
    for (const auto& [game, vocab] : per_game_vocab) sum += static_cast<double>(vocab.size());
    stats.vocab_size_game_avg = sum / static_cast<double>(per_game_vocab.size());
  }
  if (stats.reward_transcripts > 0) {
    stats.steps_per_reward_avg = spr_sum / static_cast<double>(stats.reward_transcripts);
  }
  std::sort(normalized.begin(), normalized.end());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    stats.score_cdf.emplace_back(
        static_cast<double>(i + 1) / static_cast<double>(normalized.size()), normalized[i]);
  }
  return stats;
}

}  // namespace pasa
