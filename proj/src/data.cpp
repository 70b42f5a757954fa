#include "pasa/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include <json.hpp>

#include "pasa/error.hpp"
#include "pasa/random.hpp"
#include "pasa/vocab.hpp"

namespace pasa {

using nlohmann::json;

std::string difficulty_name(Difficulty d) {
  return d == Difficulty::possible ? "possible" : "difficult";
}

Difficulty difficulty_from_name(const std::string& name) {
  if (name == "possible") return Difficulty::possible;
  if (name == "difficult") return Difficulty::difficult;
  throw ParseError("unknown difficulty '" + name + "'");
}

namespace {

json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
  }
}

template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(parse_line(line, path, line_no), line_no);
  }
}

[[noreturn]] void record_error(const std::string& path, std::size_t line_no,
                               const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<Transcript> load_transcripts(const std::string& path) {
  std::vector<Transcript> out;
  for_each_record(path, [&](const json& rec, std::size_t line_no) {
    if (!rec.is_object()) record_error(path, line_no, "expected a JSON object");
    Transcript t;
    try {
      t.game_id = rec.at("game_id").get<std::string>();
      t.speaker_id = rec.value("speaker_id", std::string{});
      t.jericho = rec.value("jericho", false);
      const auto& steps = rec.at("steps");
      if (!steps.is_array() || steps.empty()) {
        record_error(path, line_no, "'steps' must be a non-empty array");
      }
      for (const auto& s : steps) {
        Step step;
        step.observation = s.at("observation").get<std::string>();
        step.action = s.at("action").get<std::string>();
        if (step.action.empty()) record_error(path, line_no, "step has an empty action");
        if (s.contains("score") && !s.at("score").is_null()) {
          step.score = s.at("score").get<int>();
        }
        t.steps.push_back(std::move(step));
      }
    } catch (const json::exception& e) {
      record_error(path, line_no, std::string("schema violation: ") + e.what());
    }
    if (!t.jericho) out.push_back(std::move(t));
  });
  return out;
}

void save_transcripts(const std::string& path, const std::vector<Transcript>& transcripts) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (const Transcript& t : transcripts) {
    json steps = json::array();
    for (const Step& s : t.steps) {
      json rec{{"observation", s.observation}, {"action", s.action}};
      if (s.score) rec["score"] = *s.score;
      steps.push_back(std::move(rec));
    }
    os << json{{"game_id", t.game_id},
               {"speaker_id", t.speaker_id},
               {"jericho", t.jericho},
               {"steps", std::move(steps)}}
              .dump()
       << '\n';
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

std::vector<Walkthrough> load_walkthroughs(const std::string& path) {
  std::vector<Walkthrough> out;
  for_each_record(path, [&](const json& rec, std::size_t line_no) {
    if (!rec.is_object()) record_error(path, line_no, "expected a JSON object");
    Walkthrough w;
    try {
      w.game_id = rec.at("game_id").get<std::string>();
      w.difficulty = difficulty_from_name(rec.at("difficulty").get<std::string>());
      const auto& steps = rec.at("steps");
      if (!steps.is_array() || steps.empty()) {
        record_error(path, line_no, "'steps' must be a non-empty array");
      }
      for (const auto& s : steps) {
        WalkthroughStep step;
        step.observation = s.at("observation").get<std::string>();
        step.action = s.at("action").get<std::string>();
        if (!s.contains("valid_actions")) {
          record_error(path, line_no, "walkthrough step missing valid_actions");
        }
        step.valid_actions = s.at("valid_actions").get<std::vector<std::string>>();
        if (std::find(step.valid_actions.begin(), step.valid_actions.end(), step.action) ==
            step.valid_actions.end()) {
          record_error(path, line_no,
                       "gold action '" + step.action + "' missing from valid_actions");
        }
        w.steps.push_back(std::move(step));
      }
    } catch (const json::exception& e) {
      record_error(path, line_no, std::string("schema violation: ") + e.what());
    }
    out.push_back(std::move(w));
  });
  return out;
}

void save_walkthroughs(const std::string& path, const std::vector<Walkthrough>& walkthroughs) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (const Walkthrough& w : walkthroughs) {
    json steps = json::array();
    for (const WalkthroughStep& s : w.steps) {
      steps.push_back(json{{"observation", s.observation},
                           {"action", s.action},
                           {"valid_actions", s.valid_actions}});
    }
    os << json{{"game_id", w.game_id},
               {"difficulty", difficulty_name(w.difficulty)},
               {"steps", std::move(steps)}}
              .dump()
       << '\n';
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

ScorePatterns ScorePatterns::defaults() {
  return ScorePatterns{{
      R"(score is ([0-9]+) out of (?:a possible )?([0-9]+))",
      R"(([0-9]+) out of a possible ([0-9]+))",
      R"(score:\s*([0-9]+)\s*/\s*([0-9]+))",
  }};
}

ScorePatterns ScorePatterns::load(const std::string& path) {
  ScorePatterns out = defaults();
  std::ifstream is(path);
  if (!is) throw IoError("cannot open score-pattern file '" + path + "'");
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.patterns.push_back(line);
  }
  return out;
}

std::optional<std::pair<int, int>> extract_scores(const Transcript& transcript,
                                                  const ScorePatterns& patterns) {
  std::vector<std::regex> compiled;
  compiled.reserve(patterns.patterns.size());
  for (const std::string& p : patterns.patterns) {
    try {
      compiled.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw ArgumentError("invalid score pattern '" + p + "': " + e.what());
    }
  }
  std::optional<std::pair<int, int>> last;
  for (const Step& step : transcript.steps) {
    for (const std::regex& re : compiled) {
      auto begin = std::sregex_iterator(step.observation.begin(), step.observation.end(), re);
      for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        if (m.size() >= 3) {
          last = std::make_pair(std::stoi(m[1].str()), std::stoi(m[2].str()));
        }
      }
    }
  }
  return last;
}

double normalize_score(int final_score, int max_score) {
  if (max_score <= 0) {
    throw ArgumentError("normalize_score: max score must be positive, got " +
                        std::to_string(max_score));
  }
  const double v = static_cast<double>(final_score) / static_cast<double>(max_score);
  return std::clamp(v, 0.0, 1.0);
}

std::optional<double> steps_per_reward(const Transcript& transcript) {
  int previous = 0;
  std::size_t events = 0;
  for (const Step& step : transcript.steps) {
    if (step.score) {
      if (*step.score > previous) ++events;
      previous = *step.score;
    }
  }
  if (events == 0) return std::nullopt;
  return static_cast<double>(transcript.steps.size()) / static_cast<double>(events);
}

namespace {

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_items(const std::vector<T>& items,
                                                      double fraction, std::uint64_t seed) {
  if (items.empty()) throw ArgumentError("split: empty input");
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw ArgumentError("split: fraction must lie in (0, 1), got " + std::to_string(fraction));
  }
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomStream rng(seed);
  rng.shuffle(order);
  const std::size_t n_val = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(items.size())));
  std::vector<bool> in_val(items.size(), false);
  for (std::size_t i = 0; i < n_val && i < order.size(); ++i) in_val[order[i]] = true;
  std::pair<std::vector<T>, std::vector<T>> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    (in_val[i] ? out.second : out.first).push_back(items[i]);
  }
  return out;
}

}  // namespace

std::pair<std::vector<Transcript>, std::vector<Transcript>> split_by_transcript(
    const std::vector<Transcript>& transcripts, double fraction, std::uint64_t seed) {
  return split_items(transcripts, fraction, seed);
}

std::pair<std::vector<Walkthrough>, std::vector<Walkthrough>> split_by_game(
    const std::vector<Walkthrough>& walkthroughs, double fraction, std::uint64_t seed) {
  return split_items(walkthroughs, fraction, seed);
}

std::vector<Sample> make_samples(const std::vector<Transcript>& transcripts) {
  std::vector<Sample> out;
  for (const Transcript& t : transcripts) {
    std::vector<std::string> observations, actions;
    observations.reserve(t.steps.size());
    actions.reserve(t.steps.size());
    for (const Step& s : t.steps) {
      observations.push_back(s.observation);
      actions.push_back(s.action);
    }
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      Sample sample;
      sample.context = context_window(observations, actions, i);
      sample.gold_action = t.steps[i].action;
      sample.speaker_id = t.speaker_id;
      sample.game_id = t.game_id;
      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::vector<Sample> make_samples(const std::vector<Walkthrough>& walkthroughs) {
  std::vector<Sample> out;
  for (const Walkthrough& w : walkthroughs) {
    std::vector<std::string> observations, actions;
    observations.reserve(w.steps.size());
    actions.reserve(w.steps.size());
    for (const WalkthroughStep& s : w.steps) {
      observations.push_back(s.observation);
      actions.push_back(s.action);
    }
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
      const WalkthroughStep& s = w.steps[i];
      if (s.valid_actions.empty()) {
        throw ContractError("walkthrough step of game '" + w.game_id +
                            "' is missing valid actions");
      }
      Sample sample;
      sample.context = context_window(observations, actions, i);
      sample.gold_action = s.action;
      sample.valid_actions = s.valid_actions;
      sample.game_id = w.game_id;
      sample.difficulty = w.difficulty;
      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::vector<CandidateSet> sample_negatives(std::span<const Sample> batch,
                                           NegativesPolicy policy) {
  std::vector<CandidateSet> out;
  out.reserve(batch.size());
  if (policy == NegativesPolicy::in_batch) {
    if (batch.size() < 2) {
      throw ContractError("in-batch negatives require a batch of at least 2 samples");
    }
    std::vector<std::string> pool;
    for (const Sample& s : batch) {
      if (std::find(pool.begin(), pool.end(), s.gold_action) == pool.end()) {
        pool.push_back(s.gold_action);
      }
    }
    for (const Sample& s : batch) {
      CandidateSet cs;
      cs.candidates = pool;
      cs.gold_index = static_cast<std::size_t>(
          std::find(pool.begin(), pool.end(), s.gold_action) - pool.begin());
      out.push_back(std::move(cs));
    }
    return out;
  }
  for (const Sample& s : batch) {
    if (!s.valid_actions) {
      throw ContractError("valid-action negatives require Sample.valid_actions");
    }
    const auto it = std::find(s.valid_actions->begin(), s.valid_actions->end(), s.gold_action);
    if (it == s.valid_actions->end()) {
      throw ContractError("gold action '" + s.gold_action + "' missing from valid actions");
    }
    CandidateSet cs;
    cs.candidates = *s.valid_actions;
    cs.gold_index = static_cast<std::size_t>(it - s.valid_actions->begin());
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace pasa
