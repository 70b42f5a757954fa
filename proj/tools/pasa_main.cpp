#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pasa/alignment.hpp"
#include "pasa/data.hpp"
#include "pasa/error.hpp"
#include "pasa/eval.hpp"
#include "pasa/gradcheck.hpp"
#include "pasa/models.hpp"
#include "pasa/ops.hpp"
#include "pasa/pipeline.hpp"
#include "pasa/synth.hpp"

namespace {

using namespace pasa;

struct CommonTrainArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string runlog;
};

void add_common_train(CLI::App* cmd, CommonTrainArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config overriding the defaults");
  cmd->add_option("--seed", args.seed, "RNG seed override")->each([&args](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--runlog", args.runlog, "append the stage report to this JSONL file");
}

TrainConfig load_config(const CommonTrainArgs& args, int stage) {
  TrainConfig cfg;
  if (!args.config_path.empty()) cfg = TrainConfig::from_json_file(args.config_path);
  cfg.stage = stage;
  if (args.seed_set) cfg.seed = args.seed;
  cfg.validate();
  return cfg;
}

void finish_stage(StageReport report, const std::string& checkpoint,
                  const CommonTrainArgs& args) {
  report.checkpoint_path = checkpoint;
  if (!args.runlog.empty()) append_run_log(args.runlog, report);
  std::cout << report.to_json_line() << "\n";
}

StudentModel require_student(const std::string& path) {
  LoadedModel m = load_model(path);
  if (!m.student) throw ContractError(path + ": expected a student checkpoint, got " + m.kind);
  return std::move(*m.student);
}

TeacherModel require_teacher(const std::string& path) {
  LoadedModel m = load_model(path);
  if (!m.teacher) throw ContractError(path + ": expected a teacher checkpoint, got " + m.kind);
  return std::move(*m.teacher);
}

std::vector<Sample> samples_for_split(const std::vector<Transcript>& transcripts,
                                      const std::string& split, double fraction,
                                      std::uint64_t split_seed) {
  if (split == "all") return make_samples(transcripts);
  auto [train, validation] = split_by_transcript(transcripts, fraction, split_seed);
  return make_samples(split == "train" ? train : validation);
}

int run_gen_synth(const SynthGameSpec& spec, int heldout, const std::string& out_transcripts,
                  const std::string& out_walkthroughs, const std::string& out_heldout) {
  if (heldout < 0 || heldout >= spec.games) {
    throw ArgumentError("gen-synth: --heldout must lie in [0, games)");
  }
  SynthCorpus corpus = generate_synthetic(spec);
  const int train_games = spec.games - heldout;
  auto is_train_game = [&](const std::string& game_id) {
    for (int g = 0; g < train_games; ++g) {
      if (SynthWorld(spec, g).game_id() == game_id) return true;
    }
    return false;
  };
  (void)is_train_game;

  std::vector<Transcript> train_transcripts;
  for (auto& t : corpus.transcripts) {
    // Transcripts of held-out games are dropped so evaluation games stay unseen.
    bool train = false;
    for (int g = 0; g < train_games; ++g) {
      if (t.game_id == corpus.walkthroughs[static_cast<std::size_t>(g)].game_id) {
        train = true;
        break;
      }
    }
    if (train) train_transcripts.push_back(std::move(t));
  }
  save_transcripts(out_transcripts, train_transcripts);

  std::vector<Walkthrough> train_walks(corpus.walkthroughs.begin(),
                                       corpus.walkthroughs.begin() + train_games);
  save_walkthroughs(out_walkthroughs, train_walks);
  if (heldout > 0) {
    if (out_heldout.empty()) {
      throw ArgumentError("gen-synth: --out-heldout is required when --heldout > 0");
    }
    std::vector<Walkthrough> held(corpus.walkthroughs.begin() + train_games,
                                  corpus.walkthroughs.end());
    save_walkthroughs(out_heldout, held);
  }
  std::cerr << "gen-synth: " << train_transcripts.size() << " transcripts, " << train_games
            << " train games, " << heldout << " held-out games\n";
  return 0;
}

int run_stats(const std::string& in, const std::string& patterns_path,
              const std::string& scores_out, const std::string& cdf_out) {
  const auto transcripts = load_transcripts(in);
  const ScorePatterns patterns =
      patterns_path.empty() ? ScorePatterns::defaults() : ScorePatterns::load(patterns_path);
  const CorpusStats stats = corpus_stats(transcripts, patterns);
  std::cout << "metric,value\n";
  std::cout << "unique_games," << stats.unique_games << "\n";
  std::cout << "transcripts," << stats.transcripts << "\n";
  std::cout << "samples," << stats.samples << "\n";
  std::cout << "vocab_size," << stats.vocab_size << "\n";
  std::cout << "vocab_size_game_avg," << stats.vocab_size_game_avg << "\n";
  std::cout << "scored_transcripts," << stats.normalized_scores.size() << "\n";
  std::cout << "reward_transcripts," << stats.reward_transcripts << "\n";
  std::cout << "steps_per_reward_avg,"
            << (stats.steps_per_reward_avg ? std::to_string(*stats.steps_per_reward_avg) : "")
            << "\n";
  if (!scores_out.empty()) {
    std::ofstream os(scores_out, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + scores_out + "' for writing");
    os << "transcript_id,normalized_score\n";
    for (const auto& [id, score] : stats.normalized_scores) os << id << "," << score << "\n";
  }
  if (!cdf_out.empty()) {
    std::ofstream os(cdf_out, std::ios::trunc);
    if (!os) throw IoError("cannot open '" + cdf_out + "' for writing");
    os << "rank_fraction,normalized_score\n";
    for (const auto& [rank, score] : stats.score_cdf) os << rank << "," << score << "\n";
  }
  return 0;
}

int run_eval(const std::string& model_path, const std::string& in) {
  const auto samples = make_samples(load_walkthroughs(in));
  LoadedModel model = load_model(model_path);
  EvalResult result = model.student ? eval_recall_at_1(*model.student, samples)
                                    : eval_recall_at_1_teacher(*model.teacher, samples);
  std::cout << "game_id,difficulty,n_samples,mean_valid_actions,recall_at_1\n";
  for (const auto& row : result.per_game) {
    std::cout << row.game_id << ","
              << (row.difficulty ? difficulty_name(*row.difficulty) : "") << ","
              << row.n_samples << "," << row.mean_valid_actions << "," << row.recall_at_1
              << "\n";
  }
  std::cout << "overall,," << result.per_sample_correct.size() << ","
            << result.candidate_count_mean << "," << result.overall_recall << "\n";
  return 0;
}

int run_gradcheck(std::size_t d, std::size_t k, std::size_t batch, double eps) {
  std::vector<std::string> corpus = {"go north to the cellar", "take the lamp",
                                     "put coal in furnace",    "look around the room",
                                     "open the chest",         "wait"};
  Vocabulary vocab = Vocabulary::build(corpus, 1);
  EncoderConfig enc;
  enc.dim = d;
  bool all_ok = true;
  auto report_line = [&](const std::string& name, const GradCheckReport& rep) {
    const bool ok = rep.max_rel_error < 1e-4;
    all_ok = all_ok && ok;
    std::cout << name << ",max_rel_error=" << rep.max_rel_error << ","
              << (ok ? "pass" : "fail") << "\n";
  };

  auto encode_batch = [&](ParamSet& p, std::size_t n) {
    std::vector<EncodedSample> items;
    for (std::size_t i = 0; i < n; ++i) {
      EncodedSample s;
      s.context = encode(vocab.tokenize(corpus[i % corpus.size()], TextRole::context), p, enc,
                         TextRole::context);
      for (std::size_t c = 0; c < 3; ++c) {
        s.candidates.push_back(encode(vocab.tokenize(corpus[(i + c + 1) % corpus.size()],
                                                     TextRole::action),
                                      p, enc, TextRole::action));
      }
      s.gold_index = i % 3;
      items.push_back(std::move(s));
    }
    return items;
  };

  {
    StudentModel student = StudentModel::init(enc, vocab, 11);
    auto loss = [&](ParamSet& p) { return student_loss(encode_batch(p, batch)); };
    report_line("student_L_pred", grad_check(loss, student.params, eps));
  }
  for (LatentMode mode : {LatentMode::latent, LatentMode::persona, LatentMode::intent}) {
    LatentConfig latent{mode, mode == LatentMode::intent ? kIntentClassCount : k};
    TeacherModel teacher = TeacherModel::init(enc, latent, vocab, 13);
    GumbelConfig gumbel{1.0, false};
    RandomStream rng(5);
    std::vector<std::vector<double>> noise;
    for (std::size_t i = 0; i < batch; ++i) {
      noise.push_back(ops::draw_gumbel_noise(rng, latent.K));
    }
    auto loss = [&](ParamSet& p) {
      auto items = encode_batch(p, batch);
      for (std::size_t i = 0; i < items.size(); ++i) {
        items[i].gumbel_noise = noise[i];
        if (mode != LatentMode::latent) items[i].label = static_cast<int>(i % latent.K);
      }
      return teacher_loss(items, p, latent, 1.0, gumbel);
    };
    TeacherModel* t = &teacher;
    report_line("teacher_L_pred+L_rec_" + latent_mode_name(mode),
                grad_check(loss, t->params, eps));
  }
  {
    StudentModel student = StudentModel::init(enc, vocab, 17);
    std::vector<double> teacher_logits = {0.4, -0.2, 0.9};
    auto loss = [&](ParamSet& p) {
      auto items = encode_batch(p, 1);
      Tensor logits = student_scores(items[0].context, items[0].candidates);
      return kd_loss(logits, teacher_logits, items[0].gold_index, 20.0, 1.0);
    };
    report_line("kd_loss", grad_check(loss, student.params, eps));
  }
  return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PASA: posterior action selection with teacher-student distillation"};
  app.require_subcommand(1);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic game corpus");
  SynthGameSpec spec;
  int heldout = 0;
  std::string out_transcripts = "transcripts.jsonl";
  std::string out_walkthroughs = "walkthroughs.jsonl";
  std::string out_heldout;
  gen->add_option("--seed", spec.seed);
  gen->add_option("--games", spec.games);
  gen->add_option("--heldout", heldout, "trailing games kept out of the transcript corpus");
  gen->add_option("--grid", spec.grid_size);
  gen->add_option("--objects", spec.object_count);
  gen->add_option("--modes", spec.mode_count);
  gen->add_option("--weights", spec.mode_weights, "mode mixture weights");
  gen->add_option("--vocab", spec.vocab_size);
  gen->add_option("--transcripts-per-game", spec.transcripts_per_game);
  gen->add_option("--max-steps", spec.max_transcript_steps);
  gen->add_option("--out-transcripts", out_transcripts);
  gen->add_option("--out-walkthroughs", out_walkthroughs);
  gen->add_option("--out-heldout", out_heldout);

  // stats
  auto* stats = app.add_subcommand("stats", "corpus analytics for a transcript file");
  std::string stats_in, stats_patterns, stats_scores_out, stats_cdf_out;
  stats->add_option("--in", stats_in)->required();
  stats->add_option("--patterns", stats_patterns, "extra score patterns, one regex per line");
  stats->add_option("--scores-out", stats_scores_out, "per-transcript normalized score CSV");
  stats->add_option("--cdf-out", stats_cdf_out, "cumulative-frequency CSV");

  // pretrain-student
  auto* s1 = app.add_subcommand("pretrain-student", "stage 1: student pre-training");
  CommonTrainArgs s1_args;
  std::string s1_in, s1_out = "student.ckpt", s1_vocab_out;
  s1->add_option("--in", s1_in, "transcripts file")->required();
  s1->add_option("--out", s1_out);
  s1->add_option("--vocab-out", s1_vocab_out, "also write the vocabulary as a text file");
  add_common_train(s1, s1_args);

  // pretrain-teacher
  auto* s2 = app.add_subcommand("pretrain-teacher", "stage 2: teacher pre-training");
  CommonTrainArgs s2_args;
  std::string s2_in, s2_out = "teacher.ckpt", s2_mode, s2_lexicon = "data/lexicon";
  std::size_t s2_k = 0;
  s2->add_option("--in", s2_in, "transcripts file")->required();
  s2->add_option("--out", s2_out);
  s2->add_option("--mode", s2_mode, "latent | persona | intent (overrides config)");
  s2->add_option("--K", s2_k, "latent classes (overrides config)");
  s2->add_option("--lexicon", s2_lexicon, "lexicon directory for intent mode");
  add_common_train(s2, s2_args);

  // finetune-teacher
  auto* s3 = app.add_subcommand("finetune-teacher", "stage 3: teacher fine-tuning");
  CommonTrainArgs s3_args;
  std::string s3_in, s3_teacher, s3_out = "teacher_ft.ckpt", s3_lexicon = "data/lexicon";
  s3->add_option("--in", s3_in, "walkthroughs file")->required();
  s3->add_option("--teacher", s3_teacher)->required();
  s3->add_option("--out", s3_out);
  s3->add_option("--lexicon", s3_lexicon);
  add_common_train(s3, s3_args);

  // distill
  auto* s4 = app.add_subcommand("distill", "stage 4: teacher-student distillation");
  CommonTrainArgs s4_args;
  std::string s4_in, s4_teacher, s4_student, s4_out = "student_distilled.ckpt";
  bool s4_hard_only = false;
  s4->add_option("--in", s4_in, "walkthroughs file")->required();
  s4->add_option("--teacher", s4_teacher);
  s4->add_option("--student", s4_student)->required();
  s4->add_option("--out", s4_out);
  s4->add_flag("--hard-only", s4_hard_only,
               "train on hard labels only (the student-only ablation)");
  add_common_train(s4, s4_args);

  // eval
  auto* ev = app.add_subcommand("eval", "recall@1 over walkthrough valid actions");
  std::string ev_model, ev_in;
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--in", ev_in, "walkthroughs file")->required();

  // validate-9neg
  auto* v9 = app.add_subcommand("validate-9neg", "9-random-negative validation recall@1");
  std::string v9_model, v9_in, v9_split = "all";
  std::uint64_t v9_seed = 1, v9_split_seed = 1;
  double v9_fraction = 0.1;
  v9->add_option("--model", v9_model)->required();
  v9->add_option("--in", v9_in, "transcripts file")->required();
  v9->add_option("--seed", v9_seed);
  v9->add_option("--split", v9_split)->check(CLI::IsMember({"all", "train", "validation"}));
  v9->add_option("--fraction", v9_fraction);
  v9->add_option("--split-seed", v9_split_seed);

  // intent-tag
  auto* tag = app.add_subcommand("intent-tag", "classify actions into intent classes");
  std::string tag_in, tag_lexicon = "data/lexicon";
  tag->add_option("--in", tag_in, "file with one action per line (default: stdin)");
  tag->add_option("--lexicon", tag_lexicon);

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference checks for every loss");
  std::size_t gc_d = 8, gc_k = 6, gc_batch = 2;
  double gc_eps = 1e-5;
  gc->add_option("--d", gc_d);
  gc->add_option("--K", gc_k);
  gc->add_option("--batch", gc_batch);
  gc->add_option("--eps", gc_eps);

  if (argc <= 1) {
    std::cerr << app.help() << "\n";
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      return run_gen_synth(spec, heldout, out_transcripts, out_walkthroughs, out_heldout);
    }
    if (stats->parsed()) {
      return run_stats(stats_in, stats_patterns, stats_scores_out, stats_cdf_out);
    }
    if (s1->parsed()) {
      TrainConfig cfg = load_config(s1_args, 1);
      const auto samples = make_samples(load_transcripts(s1_in));
      auto [student, report] = run_stage1_student_pretrain(cfg, samples);
      save_student(s1_out, student);
      if (!s1_vocab_out.empty()) student.vocab.save(s1_vocab_out);
      finish_stage(report, s1_out, s1_args);
      return 0;
    }
    if (s2->parsed()) {
      TrainConfig cfg = load_config(s2_args, 2);
      if (!s2_mode.empty()) {
        cfg.latent.mode = latent_mode_from_name(s2_mode);
        if (cfg.latent.mode == LatentMode::intent) cfg.latent.K = kIntentClassCount;
      }
      if (s2_k > 0) cfg.latent.K = s2_k;
      const auto samples = make_samples(load_transcripts(s2_in));
      PosLexicon lexicon;
      const PosLexicon* lexicon_ptr = nullptr;
      if (cfg.latent.mode == LatentMode::intent) {
        lexicon = PosLexicon::load(s2_lexicon);
        lexicon_ptr = &lexicon;
      }
      auto [teacher, report] = run_stage2_teacher_pretrain(cfg, samples, lexicon_ptr);
      save_teacher(s2_out, teacher);
      finish_stage(report, s2_out, s2_args);
      return 0;
    }
    if (s3->parsed()) {
      TrainConfig cfg = load_config(s3_args, 3);
      TeacherModel teacher = require_teacher(s3_teacher);
      const auto samples = make_samples(load_walkthroughs(s3_in));
      PosLexicon lexicon;
      const PosLexicon* lexicon_ptr = nullptr;
      if (teacher.latent.mode == LatentMode::intent) {
        lexicon = PosLexicon::load(s3_lexicon);
        lexicon_ptr = &lexicon;
      }
      StageReport report = run_stage3_teacher_finetune(cfg, samples, teacher, lexicon_ptr);
      save_teacher(s3_out, teacher);
      finish_stage(report, s3_out, s3_args);
      return 0;
    }
    if (s4->parsed()) {
      TrainConfig cfg = load_config(s4_args, 4);
      StudentModel student = require_student(s4_student);
      const auto samples = make_samples(load_walkthroughs(s4_in));
      StageReport report;
      if (s4_hard_only) {
        report = run_hard_label_finetune(cfg, samples, student);
      } else {
        if (s4_teacher.empty()) {
          throw ArgumentError("distill: --teacher is required unless --hard-only is set");
        }
        TeacherModel teacher = require_teacher(s4_teacher);
        report = run_stage4_distill(cfg, samples, teacher, student);
      }
      save_student(s4_out, student);
      finish_stage(report, s4_out, s4_args);
      return 0;
    }
    if (ev->parsed()) {
      return run_eval(ev_model, ev_in);
    }
    if (v9->parsed()) {
      const auto transcripts = load_transcripts(v9_in);
      const auto samples = samples_for_split(transcripts, v9_split, v9_fraction, v9_split_seed);
      LoadedModel model = load_model(v9_model);
      const double recall = model.student
                                ? eval_validation_9neg(*model.student, samples, v9_seed)
                                : eval_validation_9neg(*model.teacher, samples, v9_seed);
      std::cout << "recall_at_1," << recall << "\n";
      return 0;
    }
    if (tag->parsed()) {
      const PosLexicon lexicon = PosLexicon::load(tag_lexicon);
      std::istream* in = &std::cin;
      std::ifstream file;
      if (!tag_in.empty()) {
        file.open(tag_in);
        if (!file) throw IoError("cannot open '" + tag_in + "'");
        in = &file;
      }
      std::string line;
      while (std::getline(*in, line)) {
        if (line.empty()) continue;
        std::cout << line << "\t" << intent_label_name(classify_intent(line, lexicon)) << "\n";
      }
      return 0;
    }
    if (gc->parsed()) {
      return run_gradcheck(gc_d, gc_k, gc_batch, gc_eps);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
