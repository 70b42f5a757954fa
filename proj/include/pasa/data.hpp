#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pasa {

struct Step {
  std::string observation;
  std::string action;
  std::optional<int> score;  // cumulative game score after the action
};

struct Transcript {
  std::string game_id;
  std::string speaker_id;
  bool jericho = false;
  std::vector<Step> steps;
  std::optional<int> final_score;
  std::optional<int> max_score;
};

enum class Difficulty { possible, difficult };

std::string difficulty_name(Difficulty d);
Difficulty difficulty_from_name(const std::string& name);

struct WalkthroughStep {
  std::string observation;
  std::string action;
  std::vector<std::string> valid_actions;
};

struct Walkthrough {
  std::string game_id;
  Difficulty difficulty = Difficulty::possible;
  std::vector<WalkthroughStep> steps;
};

// One (context, gold action, candidates, labels) training or evaluation unit.
struct Sample {
  std::string context;
  std::string gold_action;
  std::optional<std::vector<std::string>> valid_actions;
  std::optional<std::string> speaker_id;
  std::string game_id;
  std::optional<Difficulty> difficulty;
};

// Line-delimited JSON records; one transcript per line:
//   {"game_id", "speaker_id", "jericho": bool,
//    "steps": [{"observation", "action", "score"?}, ...]}
// Records flagged jericho are excluded. Malformed lines raise ParseError
// naming the line number.
std::vector<Transcript> load_transcripts(const std::string& path);
void save_transcripts(const std::string& path, const std::vector<Transcript>& transcripts);

// One walkthrough per line:
//   {"game_id", "difficulty": "possible"|"difficult",
//    "steps": [{"observation", "action", "valid_actions": [...]}, ...]}
std::vector<Walkthrough> load_walkthroughs(const std::string& path);
void save_walkthroughs(const std::string& path, const std::vector<Walkthrough>& walkthroughs);

// Score-report patterns scanned over observations. The defaults cover
//   "score is N out of M", "N out of a possible M", "Score: N/M"
// (case-insensitive). Extra patterns may be appended from a file with one
// ECMAScript regex per line; each needs two capture groups (final, max).
struct ScorePatterns {
  std::vector<std::string> patterns;
  static ScorePatterns defaults();
  static ScorePatterns load(const std::string& path);  // defaults + file-provided
};

// Scans all observations in order and returns the last (final, max) match.
std::optional<std::pair<int, int>> extract_scores(const Transcript& transcript,
                                                  const ScorePatterns& patterns);

// final / max clamped to [0, 1]; max must be positive.
double normalize_score(int final_score, int max_score);

// steps / score-increase events, where an event is a step whose cumulative
// score exceeds the previously reported score (starting from 0). Returns
// nullopt when no event occurs.
std::optional<double> steps_per_reward(const Transcript& transcript);

// Deterministic transcript-level split; the validation half receives
// ceil(fraction * n) transcripts. Original relative order is preserved
// within each half.
std::pair<std::vector<Transcript>, std::vector<Transcript>> split_by_transcript(
    const std::vector<Transcript>& transcripts, double fraction, std::uint64_t seed);

// Deterministic game-level split of walkthroughs (no game in both halves).
std::pair<std::vector<Walkthrough>, std::vector<Walkthrough>> split_by_game(
    const std::vector<Walkthrough>& walkthroughs, double fraction, std::uint64_t seed);

std::vector<Sample> make_samples(const std::vector<Transcript>& transcripts);
std::vector<Sample> make_samples(const std::vector<Walkthrough>& walkthroughs);

enum class NegativesPolicy { in_batch, valid_actions };

struct CandidateSet {
  std::vector<std::string> candidates;
  std::size_t gold_index = 0;
};

// in_batch: candidates are the batch's gold actions, deduplicated with the
// first occurrence kept and each sample's target index adjusted.
// valid_actions: each sample's full valid set.
std::vector<CandidateSet> sample_negatives(std::span<const Sample> batch,
                                           NegativesPolicy policy);

}  // namespace pasa
