#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pasa/encoder.hpp"
#include "pasa/error.hpp"
#include "pasa/gradcheck.hpp"
#include "pasa/ops.hpp"
#include "pasa/random.hpp"
#include "pasa/vocab.hpp"

using namespace pasa;

namespace {

Vocabulary tiny_vocab() {
  std::vector<std::string> texts = {"put coal in furnace", "go north", "you are in the cellar",
                                    "take lamp", "the | separator"};
  return Vocabulary::build(texts, 1);
}

}  // namespace

TEST_CASE("split_words lowercases and splits punctuation into tokens") {
  auto words = split_words("Put coal, in furnace!");
  CHECK(words == std::vector<std::string>{"put", "coal", ",", "in", "furnace", "!"});
  CHECK(split_words("  ") == std::vector<std::string>{});
  CHECK(split_words("a|b") == std::vector<std::string>{"a", "|", "b"});
}

TEST_CASE("tokenize: empty string is just [CLS]") {
  Vocabulary v = tiny_vocab();
  auto ids = v.tokenize("", TextRole::context);
  CHECK(ids == std::vector<int>{Vocabulary::kCls});
}

TEST_CASE("tokenize: known sentence maps to its token ids") {
  Vocabulary v = tiny_vocab();
  auto ids = v.tokenize("Put coal in furnace", TextRole::action);
  REQUIRE(ids.size() == 5);
  CHECK(ids[0] == Vocabulary::kCls);
  CHECK(ids[1] == v.id_of("put"));
  CHECK(ids[2] == v.id_of("coal"));
  CHECK(ids[3] == v.id_of("in"));
  CHECK(ids[4] == v.id_of("furnace"));
  for (std::size_t i = 1; i < ids.size(); ++i) CHECK(ids[i] != Vocabulary::kUnk);
}

TEST_CASE("tokenize: unknown words map to [UNK]") {
  Vocabulary v = tiny_vocab();
  auto ids = v.tokenize("zorkmid", TextRole::action);
  REQUIRE(ids.size() == 2);
  CHECK(ids[1] == Vocabulary::kUnk);
}

TEST_CASE("tokenize: long context truncates to exactly 129 ids") {
  Vocabulary v = tiny_vocab();
  std::string text;
  for (int i = 0; i < 200; ++i) text += "coal ";
  CHECK(v.tokenize(text, TextRole::context).size() == 129);
  CHECK(v.tokenize(text, TextRole::action).size() == 9);
}

TEST_CASE("tokenize caps hold for adversarial inputs") {
  RandomStream rng(3);
  const std::string alphabet = "abc de.f!g  hi\tjk|l";
  for (int trial = 0; trial < 60; ++trial) {
    std::string text;
    const std::size_t len = rng.next_index(10000);
    for (std::size_t j = 0; j < len; ++j) text += alphabet[rng.next_index(alphabet.size())];
    Vocabulary v = tiny_vocab();
    auto ctx = v.tokenize(text, TextRole::context);
    auto act = v.tokenize(text, TextRole::action);
    CHECK(ctx.size() <= 129);
    CHECK(act.size() <= 9);
    CHECK(ctx.front() == Vocabulary::kCls);
    // purity
    CHECK(v.tokenize(text, TextRole::context) == ctx);
  }
}

TEST_CASE("vocabulary orders tokens by frequency then lexicographically") {
  std::vector<std::string> texts = {"b b b", "a a", "c a"};
  Vocabulary v = Vocabulary::build(texts, 1);
  // freq: b=3, a=3, c=1 -> a before b (tie, lex), then c
  CHECK(v.id_of("a") == 3);
  CHECK(v.id_of("b") == 4);
  CHECK(v.id_of("c") == 5);
  Vocabulary cut = Vocabulary::build(texts, 2);
  CHECK(cut.id_of("c") == Vocabulary::kUnk);
}

TEST_CASE("vocabulary save/load round trip with reserved header") {
  Vocabulary v = tiny_vocab();
  const auto path = std::filesystem::temp_directory_path() / "pasa_vocab_test.txt";
  v.save(path.string());
  Vocabulary loaded = Vocabulary::load(path.string());
  CHECK(loaded.size() == v.size());
  CHECK(loaded.id_of("coal") == v.id_of("coal"));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(Vocabulary::from_lines({"coal", "lamp"}), ParseError);
}

TEST_CASE("context_window boundary and windowing") {
  std::vector<std::string> obs = {"o0", "o1", "o2", "o3"};
  std::vector<std::string> acts = {"x0", "x1", "x2", "x3"};
  CHECK(context_window(obs, acts, 0) == "o0");
  CHECK(context_window(obs, acts, 2) == "o1 | x1 | o2");

  // History before t-1's observation does not matter.
  std::vector<std::string> obs2 = {"DIFFERENT", "o1", "o2", "o3"};
  std::vector<std::string> acts2 = {"DIFFERENT", "x1", "x2", "x3"};
  CHECK(context_window(obs, acts, 3) == context_window(obs2, acts2, 3));

  CHECK_THROWS_AS(context_window({}, {}, 0), ArgumentError);
  CHECK_THROWS_AS(context_window(obs, acts, 9), ContractError);
}

TEST_CASE("encode: deterministic, d-dimensional, position-aware") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.dim = 16;
  ParamSet params(42);
  add_model_encoder_params(params, cfg, v.size());

  auto ids = v.tokenize("put coal in furnace", TextRole::context);
  EncodedText a = encode(ids, params, cfg, TextRole::context);
  EncodedText b = encode(ids, params, cfg, TextRole::context);
  CHECK(a.vector.size() == 16);
  CHECK(a.vector.values() == b.vector.values());

  auto long_ids = v.tokenize(std::string(1000, 'a'), TextRole::context);
  CHECK(encode(long_ids, params, cfg, TextRole::context).vector.size() == 16);

  // Permuting tokens after position 0 changes the pooled vector.
  auto swapped = ids;
  std::swap(swapped[1], swapped[3]);
  EncodedText c = encode(swapped, params, cfg, TextRole::context);
  double norm = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    const double d = a.vector.at(i) - c.vector.at(i);
    norm += d * d;
  }
  CHECK(std::sqrt(norm) > 1e-9);
}

TEST_CASE("encode contract errors") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.dim = 8;
  ParamSet params(1);
  add_model_encoder_params(params, cfg, v.size());
  CHECK_THROWS_AS(encode({}, params, cfg, TextRole::context), ContractError);
  CHECK_THROWS_AS(encode({5, 6}, params, cfg, TextRole::context), ContractError);  // no CLS
  CHECK_THROWS_AS(encode({Vocabulary::kCls, 10000}, params, cfg, TextRole::context),
                  ContractError);
}

TEST_CASE("encode gradient passes grad_check at d=8") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.dim = 8;
  ParamSet params(7);
  add_model_encoder_params(params, cfg, v.size());
  auto ids = v.tokenize("take lamp", TextRole::action);
  auto loss = [&](ParamSet& p) {
    Tensor vec = encode(ids, p, cfg, TextRole::action).vector;
    return ops::dot(vec, vec);
  };
  GradCheckReport rep = grad_check(loss, params, 1e-5);
  CHECK(rep.max_rel_error < 1e-4);
}

TEST_CASE("separate context/action encoders when sharing is off") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.share_encoders = false;
  ParamSet params(9);
  add_model_encoder_params(params, cfg, v.size());
  CHECK(params.contains("enc_ctx.emb.tok"));
  CHECK(params.contains("enc_act.emb.tok"));
  auto ids = v.tokenize("take lamp", TextRole::action);
  EncodedText as_action = encode(ids, params, cfg, TextRole::action);
  EncodedText as_context = encode(ids, params, cfg, TextRole::context);
  CHECK(as_action.vector.values() != as_context.vector.values());
}
