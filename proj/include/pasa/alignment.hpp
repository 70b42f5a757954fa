#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pasa/data.hpp"
#include "pasa/tensor.hpp"

namespace pasa {

enum class LatentMode { latent, persona, intent };

std::string latent_mode_name(LatentMode mode);
LatentMode latent_mode_from_name(const std::string& name);

struct LatentConfig {
  LatentMode mode = LatentMode::latent;
  std::size_t K = 8;

  // intent forces K = 5; latent defaults to 8; persona's K equals the number
  // of distinct speakers in the training data.
  void validate() const;
};

constexpr std::size_t kIntentClassCount = 5;

enum class IntentLabel { navigate = 0, examine = 1, hoard = 2, interact = 3, other = 4 };

std::string intent_label_name(IntentLabel label);

// Keyword lexicon standing in for a part-of-speech tagger. Files live in a
// directory with one lowercase token per line:
//   directions.txt verbs.txt nouns.txt examine.txt hoard.txt go_verbs.txt
struct PosLexicon {
  std::set<std::string> directions;
  std::set<std::string> verbs;
  std::set<std::string> nouns;
  std::set<std::string> examine_keywords;
  std::set<std::string> hoard_keywords;
  std::set<std::string> go_verbs;

  static PosLexicon load(const std::string& dir);
};

// Rule cascade, first match wins:
//   1. the whole action is a single direction token (or a go-verb followed
//      by exactly one direction) -> navigate
//   2. first token in {examine, x, look, l} -> examine
//   3. first token in {take, get, inventory, i, pick} -> hoard
//   4. contains at least one verb and one noun -> interact (a final token
//      unknown to every category counts as a noun)
//   5. other
IntentLabel classify_intent(const std::string& action, const PosLexicon& lexicon);

// KL(mean posterior || uniform K); differentiable through every posterior.
Tensor bpr_loss(std::span<const Tensor> posteriors);

// Mean cross-entropy of posterior probabilities against hard class labels.
Tensor label_ce_loss(std::span<const Tensor> posteriors, std::span<const int> labels);

// Per-sample alignment targets: latent -> none; intent -> classify the gold
// action; persona -> speaker index by order of first appearance, none for
// samples without a speaker id (fine-tuning data).
std::vector<std::optional<int>> assign_labels(const std::vector<Sample>& samples,
                                              const LatentConfig& config,
                                              const PosLexicon& lexicon);

// Distinct speaker ids in order of first appearance.
std::vector<std::string> speaker_order(const std::vector<Sample>& samples);

}  // namespace pasa
