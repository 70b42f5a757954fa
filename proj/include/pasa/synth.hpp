#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pasa/data.hpp"
#include "pasa/random.hpp"

namespace pasa {

// Generator settings for the synthetic grid-world corpus. Transcripts mix
// the behaviour modes by the mixture weights; walkthroughs contain only the
// optimal mode. Everything is deterministic per seed.
struct SynthGameSpec {
  std::uint64_t seed = 7;
  int grid_size = 3;     // grid_size x grid_size rooms
  int object_count = 3;  // items to deposit; one container each
  int mode_count = 4;    // behaviour modes, M >= 2
  std::vector<double> mode_weights;  // size mode_count, sums to 1; default uniform
  int vocab_size = 48;   // size of the world name pool
  int games = 40;
  int transcripts_per_game = 2;
  int max_transcript_steps = 40;

  void validate() const;
};

// Names of the first `mode_count` behaviour modes; index order is the label
// order used for speaker ids.
std::vector<std::string> synth_mode_names(int mode_count);

// One generated game world with a text interface. Items may start hidden
// until the room is inspected with "look"; depositing an item into its
// matching container scores one point.
class SynthWorld {
 public:
  SynthWorld(const SynthGameSpec& spec, int game_index);

  const std::string& game_id() const { return game_id_; }
  Difficulty difficulty() const { return difficulty_; }
  int max_score() const { return static_cast<int>(items_.size()); }
  int score() const { return score_; }
  bool done() const { return score_ == max_score(); }

  std::string reset();
  std::vector<std::string> valid_actions() const;

  struct StepOutcome {
    std::string observation;
    int score = 0;
    bool done = false;
  };
  // Applies one of valid_actions(); anything else raises ContractError.
  StepOutcome step(const std::string& action);

  // The optimal action in the current state (the walkthrough policy).
  std::string optimal_action() const;

 private:
  enum class ItemPlace { in_room, carried, deposited };
  struct Item {
    std::string name;
    int room = 0;
    int target_room = 0;
    std::string container;
    bool hidden = false;
    bool revealed = false;
    ItemPlace place = ItemPlace::in_room;
  };

  std::string room_view() const;
  std::string room_name(int index) const { return rooms_[static_cast<std::size_t>(index)]; }
  std::vector<int> neighbours(int room) const;
  int bfs_first_step(int from, int to) const;
  int bfs_distance(int from, int to) const;
  bool item_visible(const Item& item) const;

  std::string game_id_;
  Difficulty difficulty_ = Difficulty::possible;
  int grid_ = 3;
  std::vector<std::string> rooms_;  // grid*grid names
  std::vector<Item> items_;
  int position_ = 0;
  int score_ = 0;
};

struct SynthCorpus {
  std::vector<Transcript> transcripts;
  std::vector<Walkthrough> walkthroughs;
};

SynthCorpus generate_synthetic(const SynthGameSpec& spec);

// Behaviour-mode index drawn for transcript j of game g; exposed so tests
// can check the mixture frequencies.
int synth_mode_for_transcript(const SynthGameSpec& spec, int game_index, int transcript_index);

}  // namespace pasa
