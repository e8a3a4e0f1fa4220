#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mars/rng.hpp"
#include "mars/types.hpp"
#include "mars/world_config.hpp"

namespace mars {

struct Pos {
  int x = 0;
  int y = 0;

  Pos operator+(Pos o) const { return {x + o.x, y + o.y}; }
  Pos operator-(Pos o) const { return {x - o.x, y - o.y}; }
  bool operator==(const Pos&) const = default;
  auto operator<=>(const Pos&) const = default;
};

inline int chebyshev(Pos a, Pos b) {
  const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx > dy ? dx : dy;
}

// Unit offset of a move action; y grows upward.
Pos direction_of(Action a);

// Tick constants and generator densities. Defaults follow Crafter.
struct EngineParams {
  int world_size = 64;
  int episode_limit = 10000;

  // Survival counters, in half ticks.
  int hunger_limit = 25;
  int thirst_limit = 20;
  int fatigue_high = 30;
  int fatigue_low = -10;
  int recover_high = 25;
  int recover_low = -15;

  int daylight_period = 300;
  int night_start = 200;  // ticks into the period

  int chase_radius = 8;
  double chase_prob = 0.8;
  double wander_prob = 0.5;
  int attack_cooldown = 5;
  int arrow_range = 4;
  double arrow_prob = 0.15;
  int arrow_reload = 4;
  int make_distance = 2;

  int plant_ripen = 300;

  std::array<int, kNpcKindCount> npc_health = {3, 5, 3, 1};
  std::array<int, kNpcKindCount> eat_gain = {6, 6, 6, 4};
  std::array<int, 4> sword_damage = {1, 2, 3, 5};  // none, wood, stone, iron

  // Creature balancing, run every `balance_interval` ticks per chunk.
  int balance_interval = 10;
  int chunk_size = 16;
  double spawn_prob = 0.3;
  double despawn_prob = 0.4;
  int despawn_distance = 10;
  int spawn_min_distance = 6;
  std::array<int, kNpcKindCount> chunk_max_day = {2, 1, 2, 0};
  std::array<int, kNpcKindCount> chunk_max_night = {2, 3, 2, 0};

  // Map generation.
  int gen_attempts = 20;
  struct Sprinkle {
    int clusters;
    int min_size;
    int max_size;

    bool operator==(const Sprinkle&) const = default;
  };
  // Indexed by NeighbourKey; the player entry is unused.
  std::array<Sprinkle, kNeighbourKeyCount> sprinkle = {{
      {28, 1, 4},   // coal
      {14, 1, 3},   // iron
      {7, 1, 2},    // diamond
      {8, 2, 6},    // lava
      {45, 1, 6},   // tree
      {0, 0, 0},    // player
      {7, 8, 24},   // water
  }};
  double initial_creature_density = 0.012;

  bool operator==(const EngineParams&) const = default;
};

struct Cell {
  Material material = Material::grass;
  Station station = Station::none;

  bool operator==(const Cell&) const = default;
};

struct Entity {
  int id = 0;
  NpcKind kind = NpcKind::cow;
  Pos pos;
  int health = 0;
  int cooldown = 0;
  int reload = 0;
  int grown = 0;  // plants only

  bool operator==(const Entity&) const = default;
};

struct Arrow {
  int id = 0;
  Pos pos;
  Pos dir;
  NpcKind shooter = NpcKind::skeleton;

  bool operator==(const Arrow&) const = default;
};

using Inventory = std::array<int, kInventorySlots>;

struct AgentState {
  Pos pos;
  Pos facing{0, -1};
  int health = 9;
  int food = 9;
  int drink = 9;
  int energy = 9;
  Inventory inventory{};
  bool sleeping = false;
  int hunger = 0;  // half ticks
  int thirst = 0;
  int fatigue = 0;
  int recover = 0;

  int count(Item i) const { return inventory[idx(i)]; }
  bool operator==(const AgentState&) const = default;
};

struct ViewCell {
  bool in_bounds = false;
  Material material = Material::grass;
  Station station = Station::none;
  std::optional<NpcKind> creature;
  bool ripe = false;
  bool arrow = false;

  bool operator==(const ViewCell&) const = default;
};

inline constexpr int kViewCols = 9;
inline constexpr int kViewRows = 7;

struct Observation {
  // Row-major; row 0 is the top row (dy = +3), column 0 is dx = -4.
  std::array<ViewCell, kViewCols * kViewRows> view{};
  Pos pos;
  Pos facing;
  int health = 9;
  int food = 9;
  int drink = 9;
  int energy = 9;
  Inventory inventory{};
  std::optional<Action> last_action;
  bool sleeping = false;
  int tick = 0;

  const ViewCell& at(int dx, int dy) const { return view[(3 - dy) * kViewCols + (dx + 4)]; }
  ViewCell& at(int dx, int dy) { return view[(3 - dy) * kViewCols + (dx + 4)]; }
  const ViewCell& standing() const { return at(0, 0); }
  const ViewCell& front() const { return at(facing.x, facing.y); }
  bool operator==(const Observation&) const = default;
};

struct StatDeltas {
  int health = 0;
  int food = 0;
  int drink = 0;
  int energy = 0;

  bool operator==(const StatDeltas&) const = default;
};

struct StepInfo {
  std::vector<Achievement> newly_unlocked;
  StatDeltas deltas;
  std::string death_cause;  // empty unless the agent died

  bool operator==(const StepInfo&) const = default;
};

struct StepResult {
  Observation observation;
  int reward_tenths = 0;  // reward * 10, exact
  bool done = false;
  StepInfo info;

  double reward() const { return reward_tenths / 10.0; }
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EpisodeFinished : public std::logic_error {
 public:
  EpisodeFinished() : std::logic_error("episode finished") {}
};

struct GameState {
  std::shared_ptr<const WorldConfig> cfg;
  EngineParams params;
  std::uint64_t seed = 0;
  std::vector<Cell> grid;  // x-major: index x * size + y
  AgentState agent;
  std::vector<Entity> entities;  // sorted by id
  std::vector<Arrow> arrows;
  int next_id = 1;
  int tick = 0;
  Rng rng;
  std::bitset<kAchievementCount> unlocked;
  std::optional<Action> last_action;
  bool done = false;
  std::string death_cause;

  const WorldConfig& config() const { return *cfg; }
  int size() const { return params.world_size; }
  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < size() && p.y < size(); }
  Cell& cell(Pos p) { return grid[static_cast<std::size_t>(p.x * size() + p.y)]; }
  const Cell& cell(Pos p) const { return grid[static_cast<std::size_t>(p.x * size() + p.y)]; }

  Entity* entity_at(Pos p);
  const Entity* entity_at(Pos p) const;
  const Arrow* arrow_at(Pos p) const;
  // Free for an agent or creature: in bounds, walkable terrain, no station,
  // no creature, not the agent.
  bool free_cell(Pos p) const;
  bool is_night() const;
  bool has_unlocked(Achievement a) const { return unlocked.test(idx(a)); }
  Pos front() const { return agent.pos + agent.facing; }

  bool operator==(const GameState& o) const;
};

// Build a fresh episode. Deterministic in (cfg, seed, params).
GameState generate_world(const WorldConfig& cfg, std::uint64_t seed, const EngineParams& params = {});

StepResult step(GameState& state, Action action);
Observation observe(const GameState& state);

// The individual phases of a step, exposed for tests. They mutate `state` and
// record unlocks into `unlocks`.
void apply_move(GameState& state, Pos dir);
void apply_do(GameState& state, std::vector<Achievement>& unlocks);
void apply_place(GameState& state, Placeable p, std::vector<Achievement>& unlocks);
void apply_make(GameState& state, Item tool, std::vector<Achievement>& unlocks);
void npc_tick(GameState& state);
void stat_tick(GameState& state, std::vector<Achievement>& unlocks);
void balance_creatures(GameState& state);

// Creature helpers for tests and the harness.
int spawn_entity(GameState& state, NpcKind kind, Pos pos);
std::optional<Pos> nearest_free(const GameState& state, Pos from, int max_radius = 8);
Material creature_host(const WorldConfig& cfg, NpcKind kind);
int sword_level(const AgentState& agent);

// One line of the trajectory log.
struct StepEvent {
  int tick = 0;
  Action action = Action::noop;
  int reward_tenths = 0;
  StatDeltas deltas;
  std::vector<Achievement> unlocked;
  std::uint64_t rng_draws = 0;
  bool done = false;
  std::string death_cause;

  bool operator==(const StepEvent&) const = default;
};

struct Trajectory {
  std::string world;        // fixture name or file label
  std::string config_text;  // canonical serialization of the config
  std::uint64_t seed = 0;
  std::string agent;
  std::vector<StepEvent> events;

  int total_reward_tenths() const;
  bool operator==(const Trajectory&) const = default;
};

StepEvent make_event(const GameState& after, Action action, const StepResult& r);
std::string to_jsonl(const Trajectory& t);
// Throws std::runtime_error on malformed input.
Trajectory from_jsonl(const std::string& text);
// Re-run the recorded actions through a fresh engine; true iff every event matches.
bool replay_matches(const Trajectory& t, const EngineParams& params = {});

}  // namespace mars
