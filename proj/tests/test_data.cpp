#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "pasa/data.hpp"
#include "pasa/error.hpp"
#include "pasa/synth.hpp"

using namespace pasa;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream os(path);
  os << content;
  return path.string();
}

Transcript with_scores(std::vector<std::pair<std::string, std::optional<int>>> rows) {
  Transcript t;
  t.game_id = "g";
  for (auto& [obs, score] : rows) t.steps.push_back(Step{obs, "wait", score});
  return t;
}

}  // namespace

TEST_CASE("load_transcripts: empty file gives an empty list") {
  const auto path = write_temp("pasa_empty.jsonl", "");
  CHECK(load_transcripts(path).empty());
}

TEST_CASE("load_transcripts: jericho-flagged records are excluded") {
  const std::string content =
      R"({"game_id":"a","speaker_id":"s1","jericho":false,"steps":[{"observation":"o","action":"x"}]})"
      "\n"
      R"({"game_id":"b","speaker_id":"s2","jericho":true,"steps":[{"observation":"o","action":"x"}]})"
      "\n"
      R"({"game_id":"c","speaker_id":"s3","steps":[{"observation":"o","action":"x","score":2}]})"
      "\n";
  const auto path = write_temp("pasa_jericho.jsonl", content);
  auto transcripts = load_transcripts(path);
  REQUIRE(transcripts.size() == 2);
  CHECK(transcripts[0].game_id == "a");
  CHECK(transcripts[1].game_id == "c");
  CHECK(transcripts[1].steps[0].score == 2);
}

TEST_CASE("load_transcripts: malformed line reports its number") {
  const std::string content =
      R"({"game_id":"a","steps":[{"observation":"o","action":"x"}]})"
      "\n"
      "{not json}\n";
  const auto path = write_temp("pasa_malformed.jsonl", content);
  CHECK_THROWS_WITH_AS(load_transcripts(path), doctest::Contains(":2:"), ParseError);

  const std::string empty_steps = R"({"game_id":"a","steps":[]})" "\n";
  CHECK_THROWS_AS(load_transcripts(write_temp("pasa_es.jsonl", empty_steps)), ParseError);

  const std::string empty_action =
      R"({"game_id":"a","steps":[{"observation":"o","action":""}]})" "\n";
  CHECK_THROWS_AS(load_transcripts(write_temp("pasa_ea.jsonl", empty_action)), ParseError);
}

TEST_CASE("load_walkthroughs: schema checks") {
  const std::string good =
      R"({"game_id":"g","difficulty":"possible","steps":[{"observation":"o","action":"x","valid_actions":["x","y"]}]})"
      "\n";
  auto walks = load_walkthroughs(write_temp("pasa_wg.jsonl", good));
  REQUIRE(walks.size() == 1);
  CHECK(walks[0].difficulty == Difficulty::possible);

  const std::string missing =
      R"({"game_id":"g","difficulty":"possible","steps":[{"observation":"o","action":"x"}]})" "\n";
  CHECK_THROWS_WITH_AS(load_walkthroughs(write_temp("pasa_wm.jsonl", missing)),
                       doctest::Contains("valid_actions"), ParseError);

  const std::string gold_missing =
      R"({"game_id":"g","difficulty":"difficult","steps":[{"observation":"o","action":"x","valid_actions":["y"]}]})"
      "\n";
  CHECK_THROWS_AS(load_walkthroughs(write_temp("pasa_wgm.jsonl", gold_missing)), ParseError);
}

TEST_CASE("extract_scores: default patterns") {
  const ScorePatterns patterns = ScorePatterns::defaults();
  auto scores = extract_scores(
      with_scores({{"Your score is 45 out of a possible 100.", {}}}), patterns);
  REQUIRE(scores.has_value());
  CHECK(scores->first == 45);
  CHECK(scores->second == 100);

  CHECK(!extract_scores(with_scores({{"nothing here", {}}}), patterns).has_value());

  auto last = extract_scores(with_scores({{"score is 1 out of 10", {}},
                                          {"Score: 7/10", {}}}),
                             patterns);
  REQUIRE(last.has_value());
  CHECK(last->first == 7);

  auto alt = extract_scores(with_scores({{"you got 3 out of a possible 9 points", {}}}),
                            patterns);
  REQUIRE(alt.has_value());
  CHECK(alt->first == 3);
  CHECK(alt->second == 9);
}

TEST_CASE("normalize_score") {
  CHECK(normalize_score(45, 100) == doctest::Approx(0.45));
  CHECK(normalize_score(100, 100) == doctest::Approx(1.0));
  CHECK(normalize_score(0, 350) == doctest::Approx(0.0));
  CHECK(normalize_score(500, 100) == doctest::Approx(1.0));  // clamped
  CHECK_THROWS_AS(normalize_score(1, 0), ArgumentError);
}

TEST_CASE("steps_per_reward") {
  Transcript t;
  t.game_id = "g";
  for (int i = 1; i <= 20; ++i) {
    Step s{"o", "a", {}};
    if (i == 5) s.score = 1;
    if (i == 15) s.score = 2;
    t.steps.push_back(s);
  }
  auto spr = steps_per_reward(t);
  REQUIRE(spr.has_value());
  CHECK(*spr == doctest::Approx(10.0));

  Transcript flat = with_scores({{"o", 0}, {"o", 0}, {"o", 0}});
  CHECK(!steps_per_reward(flat).has_value());
}

TEST_CASE("split_by_transcript: deterministic partition") {
  std::vector<Transcript> transcripts;
  for (int i = 0; i < 10; ++i) {
    Transcript t;
    t.game_id = "g" + std::to_string(i);
    t.steps.push_back(Step{"o", "a", {}});
    transcripts.push_back(t);
  }
  auto [train, val] = split_by_transcript(transcripts, 0.1, 99);
  CHECK(train.size() == 9);
  CHECK(val.size() == 1);

  auto [train2, val2] = split_by_transcript(transcripts, 0.1, 99);
  CHECK(val2[0].game_id == val[0].game_id);

  std::set<std::string> all;
  for (const auto& t : train) all.insert(t.game_id);
  for (const auto& t : val) all.insert(t.game_id);
  CHECK(all.size() == 10);

  CHECK_THROWS_AS(split_by_transcript({}, 0.1, 1), ArgumentError);
  CHECK_THROWS_AS(split_by_transcript(transcripts, 0.0, 1), ArgumentError);
}

TEST_CASE("make_samples: windows and boundaries") {
  Transcript t;
  t.game_id = "g";
  t.speaker_id = "alice";
  for (int i = 0; i < 5; ++i) {
    t.steps.push_back(Step{"o" + std::to_string(i), "x" + std::to_string(i), {}});
  }
  auto samples = make_samples(std::vector<Transcript>{t});
  REQUIRE(samples.size() == 5);
  CHECK(samples[0].context == "o0");
  CHECK(samples[1].context == "o0 | x0 | o1");
  CHECK(samples[2].context == "o1 | x1 | o2");
  CHECK(samples[0].speaker_id == "alice");
  CHECK(!samples[0].valid_actions.has_value());

  // The gold action never appears in its own context window.
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].context.find(samples[i].gold_action) == std::string::npos);
  }
}

TEST_CASE("sample_negatives: in-batch dedup and target adjustment") {
  std::vector<Sample> batch;
  for (int i = 0; i < 8; ++i) {
    Sample s;
    s.gold_action = "act" + std::to_string(i);
    s.game_id = "g";
    batch.push_back(s);
  }
  auto sets = sample_negatives(batch, NegativesPolicy::in_batch);
  REQUIRE(sets.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(sets[i].candidates.size() == 8);
    CHECK(sets[i].candidates[sets[i].gold_index] == batch[i].gold_action);
  }

  batch[3].gold_action = "act0";  // duplicate
  auto dedup = sample_negatives(batch, NegativesPolicy::in_batch);
  CHECK(dedup[3].candidates.size() == 7);
  CHECK(dedup[3].candidates[dedup[3].gold_index] == "act0");
  CHECK(dedup[3].gold_index == dedup[0].gold_index);

  std::vector<Sample> tiny = {batch[0]};
  CHECK_THROWS_AS(sample_negatives(tiny, NegativesPolicy::in_batch), ContractError);
}

TEST_CASE("sample_negatives: valid-action policy") {
  Sample s;
  s.gold_action = "take coal";
  s.valid_actions = std::vector<std::string>{"north", "take coal", "look"};
  s.game_id = "g";
  auto sets = sample_negatives(std::vector<Sample>{s, s}, NegativesPolicy::valid_actions);
  CHECK(sets[0].candidates.size() == 3);
  CHECK(sets[0].gold_index == 1);

  Sample missing = s;
  missing.valid_actions.reset();
  CHECK_THROWS_AS(
      sample_negatives(std::vector<Sample>{missing, s}, NegativesPolicy::valid_actions),
      ContractError);

  Sample bad_gold = s;
  bad_gold.gold_action = "dance";
  CHECK_THROWS_AS(
      sample_negatives(std::vector<Sample>{bad_gold, s}, NegativesPolicy::valid_actions),
      ContractError);
}

namespace {

SynthGameSpec small_spec() {
  SynthGameSpec spec;
  spec.seed = 13;
  spec.games = 6;
  spec.grid_size = 3;
  spec.object_count = 2;
  spec.mode_count = 4;
  spec.transcripts_per_game = 2;
  spec.max_transcript_steps = 30;
  return spec;
}

}  // namespace

TEST_CASE("generate_synthetic: bitwise deterministic per seed") {
  SynthGameSpec spec = small_spec();
  SynthCorpus a = generate_synthetic(spec);
  SynthCorpus b = generate_synthetic(spec);
  REQUIRE(a.transcripts.size() == b.transcripts.size());
  REQUIRE(a.walkthroughs.size() == b.walkthroughs.size());
  for (std::size_t i = 0; i < a.transcripts.size(); ++i) {
    CHECK(a.transcripts[i].speaker_id == b.transcripts[i].speaker_id);
    REQUIRE(a.transcripts[i].steps.size() == b.transcripts[i].steps.size());
    for (std::size_t j = 0; j < a.transcripts[i].steps.size(); ++j) {
      CHECK(a.transcripts[i].steps[j].observation == b.transcripts[i].steps[j].observation);
      CHECK(a.transcripts[i].steps[j].action == b.transcripts[i].steps[j].action);
    }
  }
}

TEST_CASE("generate_synthetic: every walkthrough replays to max score") {
  SynthGameSpec spec = small_spec();
  SynthCorpus corpus = generate_synthetic(spec);
  REQUIRE(corpus.walkthroughs.size() == 6);
  for (int g = 0; g < spec.games; ++g) {
    SynthWorld world(spec, g);
    const Walkthrough& walk = corpus.walkthroughs[static_cast<std::size_t>(g)];
    REQUIRE(walk.game_id == world.game_id());
    world.reset();
    for (const WalkthroughStep& step : walk.steps) {
      const auto valid = world.valid_actions();
      CHECK(valid == step.valid_actions);
      CHECK(std::find(valid.begin(), valid.end(), step.action) != valid.end());
      world.step(step.action);
    }
    CHECK(world.score() == world.max_score());
    CHECK(world.done());
  }
}

TEST_CASE("generate_synthetic: gold is always among the valid actions") {
  SynthCorpus corpus = generate_synthetic(small_spec());
  for (const auto& walk : corpus.walkthroughs) {
    for (const auto& step : walk.steps) {
      CHECK(std::find(step.valid_actions.begin(), step.valid_actions.end(), step.action) !=
            step.valid_actions.end());
    }
  }
}

TEST_CASE("generate_synthetic: walkthroughs need fewer steps per reward") {
  SynthGameSpec spec = small_spec();
  spec.games = 100;
  spec.transcripts_per_game = 1;
  SynthCorpus corpus = generate_synthetic(spec);

  double walk_spr = 0.0;
  std::size_t walk_n = 0;
  for (const auto& w : corpus.walkthroughs) {
    walk_spr += static_cast<double>(w.steps.size()) / static_cast<double>(spec.object_count);
    ++walk_n;
  }
  walk_spr /= static_cast<double>(walk_n);

  double transcript_spr = 0.0;
  std::size_t transcript_n = 0;
  for (const auto& t : corpus.transcripts) {
    if (const auto spr = steps_per_reward(t)) {
      transcript_spr += *spr;
      ++transcript_n;
    }
  }
  REQUIRE(transcript_n > 0);
  transcript_spr /= static_cast<double>(transcript_n);

  CHECK(walk_spr < transcript_spr);
}

TEST_CASE("generate_synthetic: mode mixture matches the weights within 3 sigma") {
  SynthGameSpec spec = small_spec();
  spec.games = 150;
  spec.transcripts_per_game = 2;
  spec.mode_weights = {0.4, 0.3, 0.2, 0.1};
  const int n = spec.games * spec.transcripts_per_game;
  std::vector<int> counts(4, 0);
  for (int g = 0; g < spec.games; ++g) {
    for (int j = 0; j < spec.transcripts_per_game; ++j) {
      counts[static_cast<std::size_t>(synth_mode_for_transcript(spec, g, j))] += 1;
    }
  }
  for (std::size_t m = 0; m < 4; ++m) {
    const double expected = spec.mode_weights[m] * n;
    const double sigma = std::sqrt(n * spec.mode_weights[m] * (1.0 - spec.mode_weights[m]));
    CHECK(std::abs(counts[m] - expected) <= 3.0 * sigma);
  }
}

TEST_CASE("generate_synthetic: transcripts carry score reports the extractor can read") {
  SynthCorpus corpus = generate_synthetic(small_spec());
  const ScorePatterns patterns = ScorePatterns::defaults();
  std::size_t extracted = 0;
  for (const auto& t : corpus.transcripts) {
    if (const auto scores = extract_scores(t, patterns)) {
      CHECK(scores->second == 2);  // object_count
      ++extracted;
    }
  }
  CHECK(extracted > 0);
}

TEST_CASE("split_by_game keeps game ids disjoint") {
  SynthCorpus corpus = generate_synthetic(small_spec());
  auto [train, held] = split_by_game(corpus.walkthroughs, 0.33, 3);
  CHECK(train.size() == 4);
  CHECK(held.size() == 2);
  std::set<std::string> train_ids, held_ids;
  for (const auto& w : train) train_ids.insert(w.game_id);
  for (const auto& w : held) held_ids.insert(w.game_id);
  for (const auto& id : held_ids) CHECK(train_ids.count(id) == 0);
}

TEST_CASE("transcript and walkthrough files round-trip") {
  SynthCorpus corpus = generate_synthetic(small_spec());
  const auto tpath = std::filesystem::temp_directory_path() / "pasa_synth_t.jsonl";
  const auto wpath = std::filesystem::temp_directory_path() / "pasa_synth_w.jsonl";
  save_transcripts(tpath.string(), corpus.transcripts);
  save_walkthroughs(wpath.string(), corpus.walkthroughs);
  auto transcripts = load_transcripts(tpath.string());
  auto walkthroughs = load_walkthroughs(wpath.string());
  CHECK(transcripts.size() == corpus.transcripts.size());
  CHECK(walkthroughs.size() == corpus.walkthroughs.size());
  CHECK(transcripts[0].steps[0].observation == corpus.transcripts[0].steps[0].observation);
  CHECK(walkthroughs[0].steps[0].valid_actions == corpus.walkthroughs[0].steps[0].valid_actions);
  std::filesystem::remove(tpath);
  std::filesystem::remove(wpath);
}
