#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "mars/engine.hpp"
#include "support.hpp"

using namespace mars;
using mars::testing::flat_state;
using mars::testing::put;

namespace {

bool contains(const std::vector<Achievement>& v, Achievement a) {
  return std::find(v.begin(), v.end(), a) != v.end();
}

Material special_of(NeighbourKey k) {
  switch (k) {
    case NeighbourKey::coal: return Material::coal;
    case NeighbourKey::iron: return Material::iron;
    case NeighbourKey::diamond: return Material::diamond;
    case NeighbourKey::lava: return Material::lava;
    case NeighbourKey::tree: return Material::tree;
    default: return Material::water;
  }
}

}  // namespace

TEST_CASE("generation is deterministic") {
  for (auto w : {"default", "all_three"}) {
    GameState a = generate_world(builtin_world(w), 42);
    GameState b = generate_world(builtin_world(w), 42);
    CHECK(a == b);
    GameState c = generate_world(builtin_world(w), 43);
    CHECK_FALSE(a.grid == c.grid);
  }
}

TEST_CASE("special materials sit next to their host") {
  for (auto w : kBuiltinWorldNames) {
    const auto& cfg = builtin_world(w);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      CAPTURE(w);
      CAPTURE(seed);
      GameState s = generate_world(cfg, seed);
      int bad = 0;
      for (auto k : kAllNeighbourKeys) {
        if (k == NeighbourKey::player) continue;
        const Material m = special_of(k);
        const Material host = cfg.neighbour(k);
        for (int x = 0; x < s.size(); ++x) {
          for (int y = 0; y < s.size(); ++y) {
            if (s.cell({x, y}).material != m) continue;
            bool ok = false;
            for (Pos d : {Pos{1, 0}, Pos{-1, 0}, Pos{0, 1}, Pos{0, -1}}) {
              Pos q = Pos{x, y} + d;
              if (s.in_bounds(q) && s.cell(q).material == host) ok = true;
            }
            bad += !ok;
          }
        }
      }
      CHECK(bad == 0);
      CHECK(s.cell(s.agent.pos).material == cfg.spawn_material());
      CHECK(s.agent.health == 9);
      CHECK(s.agent.food == 9);
      CHECK(s.agent.drink == 9);
      CHECK(s.agent.energy == 9);
      CHECK(std::all_of(s.agent.inventory.begin(), s.agent.inventory.end(), [](int v) { return v == 0; }));
    }
  }
}

TEST_CASE("terrain world spawns the player on sand") {
  GameState s = generate_world(builtin_world("terrain"), 5);
  CHECK(s.cell(s.agent.pos).material == Material::sand);
}

TEST_CASE("special host cycle fails generation") {
  WorldConfig cfg = crafter_default();
  cfg.terrain_neighbour[idx(NeighbourKey::coal)] = Material::iron;
  cfg.terrain_neighbour[idx(NeighbourKey::iron)] = Material::coal;
  CHECK_THROWS_AS(generate_world(cfg, 1), GenerationError);
}

TEST_CASE("collecting wood from a tree") {
  GameState s = flat_state(crafter_default());
  put(s, {1, 0}, Material::tree);
  auto r = step(s, Action::do_);
  CHECK(s.agent.count(Item::wood) == 1);
  CHECK(s.cell(s.front()).material == Material::grass);
  CHECK(contains(r.info.newly_unlocked, Achievement::collect_wood));
  CHECK(r.reward_tenths >= 10);
}

TEST_CASE("stone needs a wood pickaxe by default") {
  GameState s = flat_state(crafter_default());
  put(s, {1, 0}, Material::stone);
  auto r = step(s, Action::do_);
  CHECK(s.agent.inventory == Inventory{});
  CHECK(r.info.newly_unlocked.empty());
  CHECK(s.cell(s.front()).material == Material::stone);
  s.agent.inventory[idx(Item::wood_pickaxe)] = 1;
  r = step(s, Action::do_);
  CHECK(s.agent.count(Item::stone) == 1);
  CHECK(s.agent.count(Item::wood_pickaxe) == 1);
  CHECK(s.cell(s.front()).material == Material::path);
}

TEST_CASE("task_dep stone yields diamond with bare hands") {
  GameState s = flat_state(builtin_world("task_dep"));
  put(s, {1, 0}, Material::stone);
  auto r = step(s, Action::do_);
  CHECK(s.agent.count(Item::diamond) == 1);
  CHECK(r.info.newly_unlocked == std::vector<Achievement>{Achievement::collect_diamond});
  CHECK(r.reward_tenths == 10);
}

TEST_CASE("moves") {
  SUBCASE("lava kills") {
    GameState s = flat_state(crafter_default());
    put(s, {1, 0}, Material::lava);
    auto r = step(s, Action::move_right);
    CHECK(r.done);
    CHECK(s.agent.health == 0);
    CHECK(r.reward_tenths == -9);
    CHECK(r.info.death_cause == "stepped into lava");
    CHECK_THROWS_AS(step(s, Action::noop), EpisodeFinished);
  }
  SUBCASE("terr_surv water heals") {
    GameState s = flat_state(builtin_world("terr_surv"), Material::path);
    s.agent.health = 8;
    put(s, {1, 0}, Material::water);
    auto r = step(s, Action::move_right);
    CHECK(s.agent.pos == Pos{33, 32});
    CHECK(s.agent.health == 9);
    CHECK(r.reward_tenths == 1);
  }
  SUBCASE("stone blocks and turns") {
    GameState s = flat_state(crafter_default());
    put(s, {0, 1}, Material::stone);
    auto r = step(s, Action::move_up);
    CHECK(s.agent.pos == Pos{32, 32});
    CHECK(s.agent.facing == Pos{0, 1});
    CHECK(r.observation.front().material == Material::stone);
  }
  SUBCASE("free move goes one cell with y up") {
    GameState s = flat_state(crafter_default());
    step(s, Action::move_up);
    CHECK(s.agent.pos == Pos{32, 33});
    step(s, Action::move_left);
    CHECK(s.agent.pos == Pos{31, 33});
  }
}

TEST_CASE("drinking") {
  SUBCASE("surv_task water needs a sapling") {
    GameState s = flat_state(builtin_world("surv_task"));
    s.agent.drink = 5;
    put(s, {1, 0}, Material::water);
    auto r = step(s, Action::do_);
    CHECK(s.agent.drink == 5);
    CHECK(r.info.newly_unlocked.empty());
    s.agent.inventory[idx(Item::sapling)] = 1;
    s.agent.health = 5;
    r = step(s, Action::do_);
    CHECK(s.agent.drink == 4);  // water: drink -1, health +1, food +1
    CHECK(s.agent.health == 6);
    CHECK(s.agent.count(Item::sapling) == 1);
    CHECK(contains(r.info.newly_unlocked, Achievement::collect_drink));
    CHECK(s.cell(s.front()).material == Material::lava);
  }
  SUBCASE("task_dep water drinks and sometimes leaves a zombie") {
    const auto& cfg = builtin_world("task_dep");
    int zombies = 0;
    const int trials = 4000;
    GameState s = flat_state(cfg);
    put(s, {1, 0}, Material::water);
    for (int i = 0; i < trials; ++i) {
      s.agent.drink = 5;
      s.entities.clear();
      std::vector<Achievement> unlocks;
      apply_do(s, unlocks);
      CHECK(s.agent.drink == 6);
      zombies += static_cast<int>(s.entities.size());
      for (const auto& e : s.entities) CHECK(e.kind == NpcKind::zombie);
    }
    const double f = static_cast<double>(zombies) / trials;
    CHECK(f > 0.085);
    CHECK(f < 0.115);
  }
}

TEST_CASE("grass sapling frequency") {
  GameState s = flat_state(crafter_default());
  int got = 0;
  for (int i = 0; i < 10000; ++i) {
    s.agent.inventory[idx(Item::sapling)] = 0;
    std::vector<Achievement> unlocks;
    apply_do(s, unlocks);
    got += s.agent.count(Item::sapling);
    CHECK(s.cell(s.front()).material == Material::grass);
  }
  const double f = got / 10000.0;
  CHECK(f >= 0.085);
  CHECK(f <= 0.115);
}

TEST_CASE("placing") {
  SUBCASE("task_dep table from diamonds") {
    GameState s = flat_state(builtin_world("task_dep"));
    s.agent.inventory[idx(Item::diamond)] = 2;
    auto r = step(s, Action::place_table);
    CHECK(s.cell(s.front()).station == Station::table);
    CHECK(s.agent.count(Item::diamond) == 0);
    CHECK(contains(r.info.newly_unlocked, Achievement::place_table));
  }
  SUBCASE("stone into water") {
    GameState s = flat_state(crafter_default());
    put(s, {1, 0}, Material::water);
    s.agent.inventory[idx(Item::stone)] = 1;
    step(s, Action::place_stone);
    CHECK(s.cell(s.front()).material == Material::stone);
    CHECK(s.agent.count(Item::stone) == 0);
  }
  SUBCASE("plant refuses stone") {
    GameState s = flat_state(crafter_default());
    put(s, {1, 0}, Material::stone);
    s.agent.inventory[idx(Item::sapling)] = 1;
    auto r = step(s, Action::place_plant);
    CHECK(s.entities.empty());
    CHECK(s.agent.count(Item::sapling) == 1);
    CHECK(r.info.newly_unlocked.empty());
    put(s, {1, 0}, Material::grass);
    r = step(s, Action::place_plant);
    REQUIRE(s.entities.size() == 1);
    CHECK(s.entities[0].kind == NpcKind::plant);
    CHECK(contains(r.info.newly_unlocked, Achievement::place_plant));
  }
}

TEST_CASE("crafting") {
  SUBCASE("wood pickaxe next to a table") {
    GameState s = flat_state(crafter_default());
    s.cell(s.agent.pos + Pos{0, 1}).station = Station::table;
    s.agent.inventory[idx(Item::wood)] = 1;
    auto r = step(s, Action::make_wood_pickaxe);
    CHECK(s.agent.count(Item::wood_pickaxe) == 1);
    CHECK(s.agent.count(Item::wood) == 0);
    CHECK(contains(r.info.newly_unlocked, Achievement::make_wood_pickaxe));
  }
  SUBCASE("no table in range") {
    GameState s = flat_state(crafter_default());
    s.cell(s.agent.pos + Pos{3, 0}).station = Station::table;
    s.agent.inventory[idx(Item::wood)] = 1;
    auto r = step(s, Action::make_wood_pickaxe);
    CHECK(s.agent.count(Item::wood_pickaxe) == 0);
    CHECK(s.agent.count(Item::wood) == 1);
    CHECK(r.info.newly_unlocked.empty());
  }
  SUBCASE("surv_task iron pickaxe needs table and furnace") {
    GameState s = flat_state(builtin_world("surv_task"));
    s.agent.inventory[idx(Item::wood)] = 1;
    s.agent.inventory[idx(Item::coal)] = 1;
    s.agent.inventory[idx(Item::iron)] = 1;
    s.cell(s.agent.pos + Pos{1, 1}).station = Station::table;
    step(s, Action::make_iron_pickaxe);
    CHECK(s.agent.count(Item::iron_pickaxe) == 0);
    s.cell(s.agent.pos + Pos{-2, 2}).station = Station::furnace;
    step(s, Action::make_iron_pickaxe);
    CHECK(s.agent.count(Item::iron_pickaxe) == 1);
    CHECK(s.agent.count(Item::iron) == 0);
  }
}

TEST_CASE("creatures") {
  SUBCASE("survival skeleton next to the agent does no harm") {
    GameState s = flat_state(builtin_world("survival"));
    s.params.wander_prob = 0;
    spawn_entity(s, NpcKind::skeleton, s.agent.pos + Pos{1, 0});
    for (int i = 0; i < 20; ++i) {
      auto r = step(s, Action::noop);
      CHECK(r.info.deltas.health == 0);
    }
  }
  SUBCASE("survival cow shoots arrows") {
    GameState s = flat_state(builtin_world("survival"));
    s.params.wander_prob = 0;
    spawn_entity(s, NpcKind::cow, s.agent.pos + Pos{3, 0});
    bool hit = false;
    for (int i = 0; i < 200 && !hit; ++i) {
      auto r = step(s, Action::noop);
      if (r.info.deltas.health < 0) {
        CHECK(r.info.deltas.health == -1);
        CHECK(r.reward_tenths == -1);
        hit = true;
      }
    }
    CHECK(hit);
  }
  SUBCASE("default zombie bites when adjacent") {
    GameState s = flat_state(crafter_default());
    s.params.wander_prob = 0;
    s.params.chase_prob = 0;
    spawn_entity(s, NpcKind::zombie, s.agent.pos + Pos{0, 1});
    auto r = step(s, Action::noop);
    CHECK(r.info.deltas.health == -1);
    for (int i = 0; i < s.params.attack_cooldown; ++i) CHECK(step(s, Action::noop).info.deltas.health == 0);
    CHECK(step(s, Action::noop).info.deltas.health == -1);
  }
  SUBCASE("cow is eaten after three bare-hand hits") {
    GameState s = flat_state(crafter_default());
    s.params.wander_prob = 0;
    s.agent.food = 2;
    spawn_entity(s, NpcKind::cow, s.front());
    step(s, Action::do_);
    step(s, Action::do_);
    CHECK(s.entities.size() == 1);
    auto r = step(s, Action::do_);
    CHECK(s.entities.empty());
    CHECK(s.agent.food == 8);
    CHECK(contains(r.info.newly_unlocked, Achievement::kill_cow));
  }
  SUBCASE("zombie dies faster with a sword") {
    GameState s = flat_state(crafter_default());
    s.params.wander_prob = 0;
    s.params.chase_prob = 0;
    s.agent.inventory[idx(Item::stone_sword)] = 1;
    spawn_entity(s, NpcKind::zombie, s.front());
    step(s, Action::do_);
    auto r = step(s, Action::do_);
    CHECK(s.entities.empty());
    CHECK(contains(r.info.newly_unlocked, Achievement::defeat_zombie));
  }
  SUBCASE("plant ripens before it can be eaten") {
    GameState s = flat_state(crafter_default());
    s.agent.inventory[idx(Item::sapling)] = 1;
    step(s, Action::place_plant);
    auto r = step(s, Action::do_);
    CHECK(s.entities.size() == 1);
    CHECK_FALSE(contains(r.info.newly_unlocked, Achievement::eat_plant));
    s.entities[0].grown = s.params.plant_ripen;
    CHECK(observe(s).front().ripe);
    s.agent.food = 3;
    r = step(s, Action::do_);
    CHECK(contains(r.info.newly_unlocked, Achievement::eat_plant));
    CHECK(s.agent.food == 7);
    REQUIRE(s.entities.size() == 1);
    CHECK(s.entities[0].grown <= 1);  // regrowth starts on the same tick
  }
}

TEST_CASE("stat ticks") {
  // Independent tick-table simulation of the recover counter.
  auto first_trigger = [](int per_tick, int limit) {
    int c = 0;
    for (int t = 1;; ++t) {
      c += per_tick;
      if ((per_tick > 0 && c > limit) || (per_tick < 0 && c < limit)) return t;
    }
  };
  SUBCASE("regeneration") {
    GameState s = flat_state(crafter_default());
    s.agent.health = 8;
    const int period = first_trigger(1, 25);
    CHECK(period == 26);
    for (int i = 1; i < period; ++i) CHECK(step(s, Action::noop).info.deltas.health == 0);
    auto r = step(s, Action::noop);
    CHECK(s.agent.health == 9);
    CHECK(r.reward_tenths == 1);
  }
  SUBCASE("starvation") {
    GameState s = flat_state(crafter_default());
    s.agent.food = 0;
    const int period = first_trigger(-1, -15);
    CHECK(period == 16);
    for (int i = 1; i < period; ++i) CHECK(step(s, Action::noop).info.deltas.health == 0);
    auto r = step(s, Action::noop);
    CHECK(r.info.deltas.health == -1);
    CHECK(r.reward_tenths == -1);
  }
  SUBCASE("food and drink decay") {
    GameState s = flat_state(crafter_default());
    int food_tick = 0, drink_tick = 0;
    for (int t = 1; t <= 30; ++t) {
      auto r = step(s, Action::noop);
      if (r.info.deltas.food < 0 && !food_tick) food_tick = t;
      if (r.info.deltas.drink < 0 && !drink_tick) drink_tick = t;
    }
    CHECK(food_tick == first_trigger(1, 25));
    CHECK(drink_tick == first_trigger(1, 20));
  }
  SUBCASE("sleep until rested") {
    GameState s = flat_state(crafter_default());
    s.agent.energy = 7;
    step(s, Action::sleep);
    CHECK(s.agent.sleeping);
    bool woke = false;
    for (int i = 0; i < 200 && !woke; ++i) {
      auto r = step(s, Action::move_left);
      CHECK((s.agent.pos == Pos{32, 32}));
      woke = contains(r.info.newly_unlocked, Achievement::wake_up);
    }
    CHECK(woke);
    CHECK(s.agent.energy == 9);
    CHECK_FALSE(s.agent.sleeping);
  }
  SUBCASE("full energy cannot sleep") {
    GameState s = flat_state(crafter_default());
    step(s, Action::sleep);
    CHECK_FALSE(s.agent.sleeping);
  }
}

namespace {

Trajectory random_episode(const WorldConfig& cfg, const std::string& world, std::uint64_t seed,
                          int max_steps, GameState* final_state = nullptr) {
  GameState s = generate_world(cfg, seed);
  Rng pick(mix_seed(seed, 77));
  Trajectory t;
  t.world = world;
  t.seed = seed;
  t.config_text = serialize_config(cfg);
  while (!s.done && static_cast<int>(t.events.size()) < max_steps) {
    const auto a = static_cast<Action>(pick.below(kActionCount));
    auto r = step(s, a);
    t.events.push_back(make_event(s, a, r));
    const auto& g = s.agent;
    for (int v : {g.health, g.food, g.drink, g.energy}) REQUIRE((v >= 0 && v <= 9));
    for (int v : g.inventory) REQUIRE((v >= 0 && v <= 9));
    REQUIRE(s.config().effect(s.cell(g.pos).material).walkable);
  }
  if (final_state) *final_state = s;
  return t;
}

}  // namespace

TEST_CASE("random episodes keep invariants and replay") {
  for (auto w : kBuiltinWorldNames) {
    CAPTURE(w);
    GameState end;
    Trajectory t = random_episode(builtin_world(w), std::string(w), 9, 600, &end);
    int unlocks = 0, health = 0;
    for (const auto& e : t.events) {
      unlocks += static_cast<int>(e.unlocked.size());
      health += e.deltas.health;
    }
    CHECK(t.total_reward_tenths() == 10 * unlocks + health);
    CHECK(static_cast<int>(end.unlocked.count()) == unlocks);
    const std::string text = to_jsonl(t);
    CHECK(from_jsonl(text) == t);
    CHECK(replay_matches(t));
  }
}

TEST_CASE("replay detects tampering") {
  Trajectory t = random_episode(crafter_default(), "default", 3, 200);
  REQUIRE(t.events.size() > 10);
  t.events[5].rng_draws += 1;
  CHECK_FALSE(replay_matches(t));
  CHECK_THROWS_AS(from_jsonl("{\"type\":\"step\"}\n"), std::runtime_error);
  CHECK_THROWS_AS(from_jsonl("not json\n"), std::runtime_error);
}

TEST_CASE("inert creature fields do not change a trajectory") {
  WorldConfig a = crafter_default();
  WorldConfig b = a;
  b.npc[idx(NpcKind::cow)].arrow_damage_func = -1;          // cow does not shoot
  b.npc[idx(NpcKind::skeleton)].closable_health_damage_func = 1;  // skeleton does not chase
  b.npc[idx(NpcKind::zombie)].inc_food_func = 1;            // zombie is not edible
  Trajectory ta = random_episode(a, "a", 11, 1500);
  Trajectory tb = random_episode(b, "b", 11, 1500);
  CHECK(ta.events == tb.events);
}

TEST_CASE("conservation at collect") {
  GameState s = flat_state(builtin_world("terr_task"), Material::path);
  for (int i = 0; i < 200; ++i) {
    put(s, {1, 0}, Material::stone);
    const Inventory before = s.agent.inventory;
    const auto draws = s.rng.draws();
    std::vector<Achievement> unlocks;
    apply_do(s, unlocks);
    const int gained = s.agent.count(Item::stone) - before[idx(Item::stone)] +
                       s.agent.count(Item::wood) - before[idx(Item::wood)];
    CHECK(gained >= 0);
    CHECK(gained <= 2);
    CHECK(s.rng.draws() - draws == 2);
    CHECK(s.cell(s.front()).material == Material::diamond);
    s.agent.inventory = {};
  }
}

TEST_CASE("episode limit") {
  GameState s = flat_state(crafter_default());
  s.params.episode_limit = 5;
  StepResult r;
  for (int i = 0; i < 5; ++i) r = step(s, Action::noop);
  CHECK(r.done);
  CHECK(r.info.death_cause.empty());
}
