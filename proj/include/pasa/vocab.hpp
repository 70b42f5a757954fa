#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pasa {

enum class TextRole { context, action };

// Lowercases and splits into word tokens; punctuation characters become
// single-character tokens so that separators like "|" survive.
std::vector<std::string> split_words(const std::string& text);

// Token ids with three reserved entries. Built deterministically from token
// frequencies: sort by (frequency desc, lexicographic asc), drop tokens below
// min_freq. File format: one token per line, line number = id, with the
// reserved [PAD]/[UNK]/[CLS] tokens as a 3-line header.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;

  Vocabulary();

  static Vocabulary build(std::span<const std::string> texts, std::size_t min_freq = 1);
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  // Rebuild from the full id-ordered token list (including the header).
  static Vocabulary from_lines(const std::vector<std::string>& lines);
  const std::vector<std::string>& lines() const { return id_to_token_; }

  int id_of(const std::string& token) const;  // kUnk when absent
  const std::string& token_of(int id) const;
  std::size_t size() const { return id_to_token_.size(); }

  // [CLS] plus word-token ids, truncated to max_tokens words after [CLS].
  std::vector<int> tokenize(const std::string& text, TextRole role,
                            std::size_t max_context_tokens = 128,
                            std::size_t max_action_tokens = 8) const;

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

// Context window over a trajectory: the concatenation of o_{t-1}, x_{t-1},
// o_t joined with the literal separator token "|"; elements before the start
// are omitted. Throws ArgumentError on an empty trajectory and ContractError
// when t is out of range.
std::string context_window(std::span<const std::string> observations,
                           std::span<const std::string> actions, std::size_t t);

}  // namespace pasa
