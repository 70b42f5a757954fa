#include "pasa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "pasa/error.hpp"

namespace pasa {

namespace {

const std::vector<std::string> kRoomPool = {
    "cellar",      "kitchen",  "attic",    "garden",   "library",  "vault",
    "chapel",      "workshop", "pantry",   "hallway",  "ballroom", "study",
    "armory",      "greenhouse", "crypt",  "tower",    "stable",   "gallery",
    "observatory", "dungeon",  "parlor",   "foyer",    "closet",   "laboratory",
    "courtyard",   "shrine",   "barracks", "scullery", "solarium", "boudoir",
    "annex",       "rotunda",  "belfry",   "catacomb", "larder",   "oratory"};

const std::vector<std::string> kItemPool = {
    "coal",    "lamp", "key",   "gem",   "scroll", "coin",  "dagger", "rope",
    "amulet",  "candle", "map", "feather", "crystal", "bell", "flask", "hammer",
    "lens",    "quill", "ring", "skull", "token",  "pearl", "chalice", "orb"};

const std::vector<std::string> kContainerPool = {
    "furnace", "chest",    "altar",  "cabinet", "safe",      "crate",
    "urn",     "trunk",    "basin",  "pedestal", "locker",   "reliquary"};

const std::vector<std::string> kModeNames = {"expert",  "wanderer", "hoarder",
                                             "scout",   "dropper",  "sprinter"};

const std::vector<std::string> kDirections = {"north", "south", "east", "west"};

std::string pad4(int n) {
  std::ostringstream os;
  os << n;
  std::string s = os.str();
  while (s.size() < 4) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

void SynthGameSpec::validate() const {
  if (grid_size < 2) throw ArgumentError("synth spec: grid_size must be >= 2");
  if (object_count < 1) throw ArgumentError("synth spec: object_count must be >= 1");
  if (mode_count < 2) throw ArgumentError("synth spec: mode_count must be >= 2");
  if (mode_count > static_cast<int>(kModeNames.size())) {
    throw ArgumentError("synth spec: at most " + std::to_string(kModeNames.size()) +
                        " behaviour modes are defined");
  }
  if (!mode_weights.empty()) {
    if (static_cast<int>(mode_weights.size()) != mode_count) {
      throw ArgumentError("synth spec: mode_weights size must equal mode_count");
    }
    double sum = 0.0;
    for (double w : mode_weights) {
      if (w < 0.0) throw ArgumentError("synth spec: negative mode weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ArgumentError("synth spec: mode weights sum to " + std::to_string(sum));
    }
  }
  const int rooms_needed = grid_size * grid_size;
  if (rooms_needed > static_cast<int>(kRoomPool.size())) {
    throw ArgumentError("synth spec: grid needs " + std::to_string(rooms_needed) +
                        " rooms, pool has " + std::to_string(kRoomPool.size()));
  }
  if (object_count > static_cast<int>(kItemPool.size()) ||
      object_count > static_cast<int>(kContainerPool.size())) {
    throw ArgumentError("synth spec: object_count exceeds the name pools");
  }
  if (games < 1) throw ArgumentError("synth spec: games must be >= 1");
  if (transcripts_per_game < 1) {
    throw ArgumentError("synth spec: transcripts_per_game must be >= 1");
  }
  if (max_transcript_steps < 4) {
    throw ArgumentError("synth spec: max_transcript_steps must be >= 4");
  }
  if (vocab_size < rooms_needed + 2 * object_count) {
    throw ArgumentError("synth spec: vocab_size too small for the world");
  }
}

std::vector<std::string> synth_mode_names(int mode_count) {
  if (mode_count < 2 || mode_count > static_cast<int>(kModeNames.size())) {
    throw ArgumentError("synth: mode_count out of range");
  }
  return {kModeNames.begin(), kModeNames.begin() + mode_count};
}

namespace {

// Draws `count` distinct names from the first `slice` entries of a pool.
std::vector<std::string> draw_names(RandomStream& rng, const std::vector<std::string>& pool,
                                    std::size_t slice, std::size_t count) {
  slice = std::min(slice, pool.size());
  std::vector<std::string> candidates(pool.begin(), pool.begin() + slice);
  rng.shuffle(candidates);
  candidates.resize(count);
  return candidates;
}

}  // namespace

SynthWorld::SynthWorld(const SynthGameSpec& spec, int game_index) {
  spec.validate();
  game_id_ = "synth-" + pad4(game_index);
  grid_ = spec.grid_size;
  RandomStream rng(mix_seed(spec.seed, fnv1a64("world-" + std::to_string(game_index))));

  const std::size_t n_rooms = static_cast<std::size_t>(grid_ * grid_);
  const std::size_t room_slice =
      std::max(n_rooms, static_cast<std::size_t>(spec.vocab_size) / 2);
  rooms_ = draw_names(rng, kRoomPool, room_slice, n_rooms);

  const std::size_t n_items = static_cast<std::size_t>(spec.object_count);
  const std::size_t item_slice =
      std::max(n_items, static_cast<std::size_t>(spec.vocab_size) / 3);
  const std::size_t cont_slice =
      std::max(n_items, static_cast<std::size_t>(spec.vocab_size) / 6);
  std::vector<std::string> item_names = draw_names(rng, kItemPool, item_slice, n_items);
  std::vector<std::string> cont_names = draw_names(rng, kContainerPool, cont_slice, n_items);

  int hidden_count = 0;
  for (std::size_t i = 0; i < n_items; ++i) {
    Item item;
    item.name = item_names[i];
    item.container = cont_names[i];
    item.room = static_cast<int>(rng.next_index(n_rooms));
    // Target room differs from the start room so every delivery moves.
    do {
      item.target_room = static_cast<int>(rng.next_index(n_rooms));
    } while (item.target_room == item.room && n_rooms > 1);
    item.hidden = rng.next_unit() < 0.5;
    if (item.hidden) ++hidden_count;
    items_.push_back(std::move(item));
  }
  difficulty_ = (hidden_count >= 2 || spec.object_count >= 4) ? Difficulty::difficult
                                                              : Difficulty::possible;
  reset();
}

std::string SynthWorld::reset() {
  position_ = 0;
  score_ = 0;
  for (Item& item : items_) {
    item.place = ItemPlace::in_room;
    item.revealed = !item.hidden;
  }
  return room_view();
}

bool SynthWorld::item_visible(const Item& item) const {
  return item.place == ItemPlace::in_room && item.revealed;
}

std::vector<int> SynthWorld::neighbours(int room) const {
  const int r = room / grid_, c = room % grid_;
  std::vector<int> out(4, -1);
  if (r > 0) out[0] = room - grid_;          // north
  if (r + 1 < grid_) out[1] = room + grid_;  // south
  if (c + 1 < grid_) out[2] = room + 1;      // east
  if (c > 0) out[3] = room - 1;              // west
  return out;
}

int SynthWorld::bfs_first_step(int from, int to) const {
  if (from == to) return -1;
  std::vector<int> parent(rooms_.size(), -2);
  std::deque<int> queue{from};
  parent[static_cast<std::size_t>(from)] = -1;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (int next : neighbours(cur)) {
      if (next < 0 || parent[static_cast<std::size_t>(next)] != -2) continue;
      parent[static_cast<std::size_t>(next)] = cur;
      if (next == to) {
        int walk = to;
        while (parent[static_cast<std::size_t>(walk)] != from) {
          walk = parent[static_cast<std::size_t>(walk)];
        }
        const auto nb = neighbours(from);
        for (std::size_t d = 0; d < nb.size(); ++d) {
          if (nb[d] == walk) return static_cast<int>(d);
        }
        return -1;
      }
      queue.push_back(next);
    }
  }
  return -1;
}

int SynthWorld::bfs_distance(int from, int to) const {
  const int fr = from / grid_, fc = from % grid_;
  const int tr = to / grid_, tc = to % grid_;
  return std::abs(fr - tr) + std::abs(fc - tc);  // grid has no walls
}

std::string SynthWorld::room_view() const {
  std::ostringstream os;
  os << "you are in the " << room_name(position_) << " .";
  for (const Item& item : items_) {
    if (item.place == ItemPlace::in_room && item.room == position_ && item_visible(item)) {
      os << " there is a " << item.name << " here .";
    }
  }
  for (const Item& item : items_) {
    if (item.target_room == position_ && item.place != ItemPlace::deposited) {
      os << " a " << item.container << " stands here .";
    }
  }
  os << " exits :";
  const auto nb = neighbours(position_);
  bool first = true;
  for (std::size_t d = 0; d < nb.size(); ++d) {
    if (nb[d] < 0) continue;
    os << (first ? " " : " , ") << kDirections[d] << " to the " << room_name(nb[d]);
    first = false;
  }
  os << " .";
  return os.str();
}

std::vector<std::string> SynthWorld::valid_actions() const {
  std::vector<std::string> out;
  const auto nb = neighbours(position_);
  for (std::size_t d = 0; d < nb.size(); ++d) {
    if (nb[d] >= 0) out.push_back(kDirections[d]);
  }
  out.push_back("look");
  out.push_back("inventory");
  out.push_back("wait");
  out.push_back("xyzzy");
  for (const Item& item : items_) {
    if (item.place == ItemPlace::in_room && item.room == position_ && item_visible(item)) {
      out.push_back("examine " + item.name);
      out.push_back("take " + item.name);
    }
  }
  for (const Item& item : items_) {
    if (item.target_room == position_ && item.place != ItemPlace::deposited) {
      out.push_back("examine " + item.container);
    }
  }
  for (const Item& item : items_) {
    if (item.place != ItemPlace::carried) continue;
    out.push_back("drop " + item.name);
    for (const Item& target : items_) {
      if (target.target_room == position_ && target.place != ItemPlace::deposited) {
        out.push_back("put " + item.name + " in " + target.container);
      }
    }
  }
  return out;
}

SynthWorld::StepOutcome SynthWorld::step(const std::string& action) {
  const auto valid = valid_actions();
  if (std::find(valid.begin(), valid.end(), action) == valid.end()) {
    throw ContractError("synth world: action '" + action + "' is not valid here");
  }
  std::ostringstream feedback;
  const auto nb = neighbours(position_);
  bool moved = false;
  for (std::size_t d = 0; d < kDirections.size(); ++d) {
    if (action == kDirections[d] && nb[d] >= 0) {
      position_ = nb[d];
      feedback << "you walk " << kDirections[d] << " .";
      moved = true;
      break;
    }
  }
  if (!moved) {
    if (action == "look") {
      bool found = false;
      for (Item& item : items_) {
        if (item.place == ItemPlace::in_room && item.room == position_ && !item.revealed) {
          item.revealed = true;
          feedback << "you notice a " << item.name << " .";
          found = true;
        }
      }
      if (!found) feedback << "you look around carefully .";
    } else if (action == "inventory") {
      std::string carried;
      for (const Item& item : items_) {
        if (item.place == ItemPlace::carried) {
          if (!carried.empty()) carried += " , ";
          carried += item.name;
        }
      }
      if (carried.empty()) {
        feedback << "you are carrying nothing .";
      } else {
        feedback << "you are carrying : " << carried << " .";
      }
    } else if (action == "wait") {
      feedback << "time passes .";
    } else if (action == "xyzzy") {
      feedback << "nothing happens .";
    } else if (action.rfind("examine ", 0) == 0) {
      feedback << "the " << action.substr(8) << " looks important .";
    } else if (action.rfind("take ", 0) == 0) {
      const std::string name = action.substr(5);
      for (Item& item : items_) {
        if (item.name == name) {
          item.place = ItemPlace::carried;
          feedback << "you take the " << name << " .";
          break;
        }
      }
    } else if (action.rfind("drop ", 0) == 0) {
      const std::string name = action.substr(5);
      for (Item& item : items_) {
        if (item.name == name) {
          item.place = ItemPlace::in_room;
          item.room = position_;
          item.revealed = true;
          feedback << "you drop the " << name << " .";
          break;
        }
      }
    } else if (action.rfind("put ", 0) == 0) {
      const std::string rest = action.substr(4);
      const std::size_t sep = rest.find(" in ");
      const std::string item_name = rest.substr(0, sep);
      const std::string cont_name = rest.substr(sep + 4);
      for (Item& item : items_) {
        if (item.name != item_name) continue;
        if (item.container == cont_name && item.target_room == position_) {
          item.place = ItemPlace::deposited;
          ++score_;
          feedback << "you put the " << item_name << " in the " << cont_name
                   << " . your score is " << score_ << " out of a possible " << max_score()
                   << " .";
          if (done()) feedback << " you have won .";
        } else {
          feedback << "the " << item_name << " does not fit in the " << cont_name << " .";
        }
        break;
      }
    }
  }
  StepOutcome out;
  out.score = score_;
  out.done = done();
  out.observation = feedback.str() + " " + room_view();
  return out;
}

std::string SynthWorld::optimal_action() const {
  // Deliver a carried item first.
  for (const Item& item : items_) {
    if (item.place != ItemPlace::carried) continue;
    if (item.target_room == position_) {
      return "put " + item.name + " in " + item.container;
    }
    const int dir = bfs_first_step(position_, item.target_room);
    return kDirections[static_cast<std::size_t>(dir)];
  }
  // Then fetch the nearest undeposited item (tie broken by name).
  const Item* best = nullptr;
  int best_dist = 0;
  for (const Item& item : items_) {
    if (item.place != ItemPlace::in_room) continue;
    const int dist = bfs_distance(position_, item.room);
    if (!best || dist < best_dist || (dist == best_dist && item.name < best->name)) {
      best = &item;
      best_dist = dist;
    }
  }
  if (!best) return "wait";  // everything deposited
  if (best->room == position_) {
    if (!best->revealed) return "look";
    return "take " + best->name;
  }
  const int dir = bfs_first_step(position_, best->room);
  return kDirections[static_cast<std::size_t>(dir)];
}

namespace {

// Weighted pick among the present action categories for a behaviour mode.
std::string mode_action(const SynthWorld& world, int mode, RandomStream& rng) {
  const auto valid = world.valid_actions();
  std::vector<std::string> moves, takes, puts, drops, examines;
  for (const std::string& a : valid) {
    for (const std::string& d : kDirections) {
      if (a == d) moves.push_back(a);
    }
    if (a.rfind("take ", 0) == 0) takes.push_back(a);
    if (a.rfind("put ", 0) == 0) puts.push_back(a);
    if (a.rfind("drop ", 0) == 0) drops.push_back(a);
    if (a.rfind("examine ", 0) == 0) examines.push_back(a);
  }
  auto pick = [&rng](const std::vector<std::string>& v) { return v[rng.next_index(v.size())]; };

  const std::string mode_name = kModeNames[static_cast<std::size_t>(mode)];
  if (mode_name == "expert") {
    // Mostly optimal, with occasional exploratory noise.
    if (rng.next_unit() < 0.8) return world.optimal_action();
    return pick(valid);
  }

  struct Choice {
    double weight;
    std::string action;
  };
  std::vector<Choice> choices;
  auto add = [&choices](double w, const std::string& a) {
    if (!a.empty()) choices.push_back({w, a});
  };
  if (mode_name == "wanderer") {
    add(0.70, moves.empty() ? "" : pick(moves));
    add(0.10, "look");
    add(0.10, "wait");
    add(0.05, "xyzzy");
    add(0.05, examines.empty() ? "" : pick(examines));
  } else if (mode_name == "hoarder") {
    add(0.50, takes.empty() ? "" : pick(takes));
    add(0.15, puts.empty() ? "" : pick(puts));
    add(0.15, "look");
    add(0.15, moves.empty() ? "" : pick(moves));
    add(0.05, "inventory");
  } else if (mode_name == "scout") {
    add(0.40, examines.empty() ? "" : pick(examines));
    add(0.30, "look");
    add(0.25, moves.empty() ? "" : pick(moves));
    add(0.05, "wait");
  } else if (mode_name == "dropper") {
    add(0.35, takes.empty() ? "" : pick(takes));
    add(0.30, drops.empty() ? "" : pick(drops));
    add(0.25, moves.empty() ? "" : pick(moves));
    add(0.10, "look");
  } else {  // sprinter
    add(0.85, moves.empty() ? "" : pick(moves));
    add(0.15, "wait");
  }
  if (choices.empty()) return pick(valid);
  std::vector<double> weights;
  weights.reserve(choices.size());
  for (const Choice& c : choices) weights.push_back(c.weight);
  return choices[rng.next_weighted(weights)].action;
}

}  // namespace

int synth_mode_for_transcript(const SynthGameSpec& spec, int game_index, int transcript_index) {
  std::vector<double> weights = spec.mode_weights;
  if (weights.empty()) {
    weights.assign(static_cast<std::size_t>(spec.mode_count),
                   1.0 / static_cast<double>(spec.mode_count));
  }
  RandomStream rng(mix_seed(spec.seed, fnv1a64("mode-" + std::to_string(game_index) + "-" +
                                               std::to_string(transcript_index))));
  return static_cast<int>(rng.next_weighted(weights));
}

SynthCorpus generate_synthetic(const SynthGameSpec& spec) {
  spec.validate();
  SynthCorpus corpus;
  for (int g = 0; g < spec.games; ++g) {
    SynthWorld world(spec, g);

    // Walkthrough: the optimal policy, with the full valid set per step.
    Walkthrough walk;
    walk.game_id = world.game_id();
    walk.difficulty = world.difficulty();
    std::string obs = world.reset();
    while (!world.done()) {
      WalkthroughStep step;
      step.observation = obs;
      step.valid_actions = world.valid_actions();
      step.action = world.optimal_action();
      const auto outcome = world.step(step.action);
      obs = outcome.observation;
      walk.steps.push_back(std::move(step));
    }
    corpus.walkthroughs.push_back(std::move(walk));

    for (int j = 0; j < spec.transcripts_per_game; ++j) {
      const int mode = synth_mode_for_transcript(spec, g, j);
      RandomStream rng(mix_seed(spec.seed, fnv1a64("transcript-" + std::to_string(g) + "-" +
                                                   std::to_string(j))));
      Transcript t;
      t.game_id = world.game_id();
      t.speaker_id = kModeNames[static_cast<std::size_t>(mode)];
      std::string tobs = world.reset();
      for (int step_i = 0; step_i < spec.max_transcript_steps && !world.done(); ++step_i) {
        Step step;
        step.observation = tobs;
        step.action = mode_action(world, mode, rng);
        const auto outcome = world.step(step.action);
        step.score = outcome.score;
        tobs = outcome.observation;
        t.steps.push_back(std::move(step));
      }
      if (world.done()) {
        // Terminal report so the final score line lands in an observation.
        t.steps.push_back(Step{tobs, "quit", world.score()});
      }
      corpus.transcripts.push_back(std::move(t));
    }
  }
  return corpus;
}

}  // namespace pasa
