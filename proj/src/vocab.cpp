#include "pasa/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "pasa/error.hpp"

namespace pasa {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      if (!current.empty()) {
        out.push_back(current);
        current.clear();
      }
      if (!std::isspace(c) && std::ispunct(c)) {
        out.push_back(std::string(1, raw));
      }
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

Vocabulary::Vocabulary() {
  id_to_token_ = {"[PAD]", "[UNK]", "[CLS]"};
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    token_to_id_[id_to_token_[i]] = static_cast<int>(i);
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> texts, std::size_t min_freq) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (const std::string& tok : split_words(text)) counts[tok] += 1;
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [tok, freq] : ranked) {
    if (freq < min_freq) continue;
    v.token_to_id_[tok] = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_lines(const std::vector<std::string>& lines) {
  if (lines.size() < 3 || lines[0] != "[PAD]" || lines[1] != "[UNK]" || lines[2] != "[CLS]") {
    throw ParseError("vocabulary is missing the [PAD]/[UNK]/[CLS] header");
  }
  Vocabulary v;
  for (std::size_t i = 3; i < lines.size(); ++i) {
    if (v.token_to_id_.count(lines[i])) {
      throw ParseError("vocabulary line " + std::to_string(i + 1) + ": duplicate token '" +
                       lines[i] + "'");
    }
    v.token_to_id_[lines[i]] = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back(lines[i]);
  }
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open vocabulary file '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return from_lines(lines);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open vocabulary file '" + path + "' for writing");
  for (const std::string& tok : id_to_token_) os << tok << '\n';
  if (!os) throw IoError("write failed for '" + path + "'");
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw ContractError("token id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::tokenize(const std::string& text, TextRole role,
                                      std::size_t max_context_tokens,
                                      std::size_t max_action_tokens) const {
  const std::size_t cap = role == TextRole::context ? max_context_tokens : max_action_tokens;
  std::vector<int> ids;
  ids.push_back(kCls);
  for (const std::string& tok : split_words(text)) {
    if (ids.size() >= cap + 1) break;
    ids.push_back(id_of(tok));
  }
  return ids;
}

std::string context_window(std::span<const std::string> observations,
                           std::span<const std::string> actions, std::size_t t) {
  if (observations.empty()) throw ArgumentError("context_window: empty trajectory");
  if (t >= observations.size()) {
    throw ContractError("context_window: step " + std::to_string(t) + " out of range for " +
                        std::to_string(observations.size()) + " observations");
  }
  std::string out;
  if (t >= 1) {
    out += observations[t - 1];
    out += " | ";
    if (t - 1 < actions.size()) {
      out += actions[t - 1];
      out += " | ";
    }
  }
  out += observations[t];
  return out;
}

}  // namespace pasa
