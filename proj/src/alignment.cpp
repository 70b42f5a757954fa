#include "pasa/alignment.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "pasa/error.hpp"
#include "pasa/ops.hpp"
#include "pasa/vocab.hpp"

namespace pasa {

std::string latent_mode_name(LatentMode mode) {
  switch (mode) {
    case LatentMode::latent: return "latent";
    case LatentMode::persona: return "persona";
    case LatentMode::intent: return "intent";
  }
  return "latent";
}

LatentMode latent_mode_from_name(const std::string& name) {
  if (name == "latent") return LatentMode::latent;
  if (name == "persona") return LatentMode::persona;
  if (name == "intent") return LatentMode::intent;
  throw ParseError("unknown latent mode '" + name + "'");
}

void LatentConfig::validate() const {
  if (K == 0) throw ArgumentError("latent config requires K >= 1");
  if (mode == LatentMode::intent && K != kIntentClassCount) {
    throw ArgumentError("intent mode requires K = 5, got " + std::to_string(K));
  }
}

std::string intent_label_name(IntentLabel label) {
  switch (label) {
    case IntentLabel::navigate: return "navigate";
    case IntentLabel::examine: return "examine";
    case IntentLabel::hoard: return "hoard";
    case IntentLabel::interact: return "interact";
    case IntentLabel::other: return "other";
  }
  return "other";
}

namespace {

std::set<std::string> load_token_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open lexicon file '" + path + "'");
  std::set<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    for (char c : line) {
      if (std::isupper(static_cast<unsigned char>(c))) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": lexicon entries must be lowercase");
      }
    }
    if (!out.insert(line).second) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": duplicate entry '" + line + "'");
    }
  }
  return out;
}

}  // namespace

PosLexicon PosLexicon::load(const std::string& dir) {
  PosLexicon lx;
  lx.directions = load_token_file(dir + "/directions.txt");
  lx.verbs = load_token_file(dir + "/verbs.txt");
  lx.nouns = load_token_file(dir + "/nouns.txt");
  lx.examine_keywords = load_token_file(dir + "/examine.txt");
  lx.hoard_keywords = load_token_file(dir + "/hoard.txt");
  lx.go_verbs = load_token_file(dir + "/go_verbs.txt");
  return lx;
}

IntentLabel classify_intent(const std::string& action, const PosLexicon& lexicon) {
  const std::vector<std::string> tokens = split_words(action);
  if (tokens.empty()) return IntentLabel::other;

  // Rule 1: the whole action is one direction, or go-verb + direction.
  if (tokens.size() == 1 && lexicon.directions.count(tokens[0])) {
    return IntentLabel::navigate;
  }
  if (tokens.size() == 2 && lexicon.go_verbs.count(tokens[0]) &&
      lexicon.directions.count(tokens[1])) {
    return IntentLabel::navigate;
  }
  // Rule 2: examine-style first token.
  if (lexicon.examine_keywords.count(tokens[0])) return IntentLabel::examine;
  // Rule 3: hoard-style first token.
  if (lexicon.hoard_keywords.count(tokens[0])) return IntentLabel::hoard;
  // Rule 4: contains a verb and a noun.
  bool has_verb = false, has_noun = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (lexicon.verbs.count(tok) || lexicon.go_verbs.count(tok)) has_verb = true;
    if (lexicon.nouns.count(tok)) {
      has_noun = true;
    } else if (i + 1 == tokens.size() && !lexicon.verbs.count(tok) &&
               !lexicon.directions.count(tok) && !lexicon.examine_keywords.count(tok) &&
               !lexicon.hoard_keywords.count(tok) && !lexicon.go_verbs.count(tok)) {
      // Unknown final token counts as a noun.
      has_noun = true;
    }
  }
  if (has_verb && has_noun) return IntentLabel::interact;
  return IntentLabel::other;
}

Tensor bpr_loss(std::span<const Tensor> posteriors) {
  if (posteriors.empty()) throw ArgumentError("bpr_loss: empty posterior list");
  const std::size_t k = posteriors.front().size();
  for (const Tensor& p : posteriors) {
    if (p.size() != k) {
      throw ContractError("bpr_loss: mixed posterior lengths " + std::to_string(k) + " and " +
                          std::to_string(p.size()));
    }
  }
  Tensor mean = ops::mean_vectors(posteriors);
  Tensor uniform = Tensor::from({k}, std::vector<double>(k, 1.0 / static_cast<double>(k)));
  return ops::kl_divergence(mean, uniform);
}

Tensor label_ce_loss(std::span<const Tensor> posteriors, std::span<const int> labels) {
  if (posteriors.size() != labels.size()) {
    throw ContractError("label_ce_loss: " + std::to_string(posteriors.size()) +
                        " posteriors vs " + std::to_string(labels.size()) + " labels");
  }
  if (posteriors.empty()) throw ArgumentError("label_ce_loss: empty batch");
  std::vector<Tensor> terms;
  terms.reserve(posteriors.size());
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    const Tensor& p = posteriors[i];
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= p.size()) {
      throw ContractError("label_ce_loss: label " + std::to_string(label) +
                          " out of range [0," + std::to_string(p.size()) + ")");
    }
    terms.push_back(
        ops::scale(ops::log(ops::element(p, static_cast<std::size_t>(label))), -1.0));
  }
  return ops::mean_scalars(terms);
}

std::vector<std::string> speaker_order(const std::vector<Sample>& samples) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> seen;
  for (const Sample& s : samples) {
    if (!s.speaker_id || s.speaker_id->empty()) continue;
    if (seen.emplace(*s.speaker_id, order.size()).second) order.push_back(*s.speaker_id);
  }
  return order;
}

std::vector<std::optional<int>> assign_labels(const std::vector<Sample>& samples,
                                              const LatentConfig& config,
                                              const PosLexicon& lexicon) {
  std::vector<std::optional<int>> out(samples.size());
  switch (config.mode) {
    case LatentMode::latent:
      break;  // BPR only, no labels
    case LatentMode::intent:
      for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = static_cast<int>(classify_intent(samples[i].gold_action, lexicon));
      }
      break;
    case LatentMode::persona: {
      std::unordered_map<std::string, int> index;
      const std::vector<std::string> order = speaker_order(samples);
      for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = static_cast<int>(i);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        if (!s.speaker_id || s.speaker_id->empty()) continue;  // fine-tuning data
        auto it = index.find(*s.speaker_id);
        if (it == index.end()) {
          throw ContractError("persona mode: unmapped speaker '" + *s.speaker_id + "'");
        }
        if (static_cast<std::size_t>(it->second) >= config.K) {
          throw ContractError("persona mode: speaker index " + std::to_string(it->second) +
                              " exceeds K = " + std::to_string(config.K));
        }
        out[i] = it->second;
      }
      break;
    }
  }
  return out;
}

}  // namespace pasa
