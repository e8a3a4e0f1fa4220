#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>

#include "mars/engine.hpp"
#include "mars/sampler.hpp"
#include "mars/verifier.hpp"
#include "support.hpp"

using namespace mars;
using mars::testing::flat_state;

namespace {

constexpr std::array<Material, 6> kSolid = {Material::tree, Material::stone, Material::coal,
                                            Material::iron, Material::diamond, Material::grass};
constexpr std::array<Material, 4> kMineral = {Material::stone, Material::coal, Material::iron, Material::diamond};

const CollectRule& rule(const WorldConfig& cfg, Material m) {
  for (const auto& r : cfg.collect) {
    if (r.target == m) return r;
  }
  throw std::out_of_range("no rule");
}

ModificationSpec spec_of(int mask, CollectVariant v, std::uint64_t seed) {
  ModificationSpec s;
  for (int b = 0; b < 3; ++b) {
    if (mask >> b & 1) s.axes.insert(static_cast<Axis>(b));
  }
  s.collect_variant = v;
  s.seed = seed;
  return s;
}

WorldConfig task_only(CollectVariant v, std::uint64_t seed) {
  Rng rng(seed);
  WorldConfig cfg = crafter_default();
  sample_task_dependency(rng, v, cfg);
  return cfg;
}

}  // namespace

TEST_CASE("names round trip") {
  for (auto a : {Axis::terrain, Axis::survival, Axis::task_dependency}) CHECK(parse_axis(name(a)) == a);
  for (auto v : {CollectVariant::visual_misleading, CollectVariant::traditional_exceptions,
                 CollectVariant::probabilistic}) {
    CHECK(parse_collect_variant(name(v)) == v);
  }
  CHECK(parse_axis("task") == Axis::task_dependency);
  CHECK_FALSE(parse_axis("weather"));
}

TEST_CASE("empty axes are rejected") {
  CHECK_THROWS_AS(sample_world(ModificationSpec{}), std::invalid_argument);
}

TEST_CASE("attempt cap reports exhaustion") {
  SamplerParams p;
  p.max_attempts = 0;
  CHECK_THROWS_AS(sample_world(spec_of(1, CollectVariant::probabilistic, 3), p), SamplingExhausted);
}

TEST_CASE("terrain only keeps the rules of the default world") {
  const WorldConfig def = crafter_default();
  int moved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const WorldConfig cfg = sample_world(spec_of(1, CollectVariant::traditional_exceptions, seed));
    CHECK(cfg.collect == def.collect);
    CHECK(cfg.place == def.place);
    CHECK(cfg.make == def.make);
    CHECK(cfg.npc == def.npc);
    CHECK(cfg.drink == def.drink);
    CHECK(cfg.ignitability == def.ignitability);
    CHECK(cfg.terrain_effect[idx(Material::tree)] == def.terrain_effect[idx(Material::tree)]);
    for (auto m : kAllMaterials) {
      if (!cfg.terrain_effect[idx(m)].walkable) CHECK(cfg.terrain_effect[idx(m)].walk_health == 0);
    }
    if (cfg.terrain_neighbour != def.terrain_neighbour) ++moved;
  }
  CHECK(moved > 10);
}

TEST_CASE("sampling is deterministic in the seed") {
  for (int mask : {1, 2, 4, 7}) {
    const auto s = spec_of(mask, CollectVariant::probabilistic, 11);
    CHECK(sample_world(s) == sample_world(s));
  }
  CHECK_FALSE(sample_world(spec_of(7, CollectVariant::probabilistic, 1)) ==
              sample_world(spec_of(7, CollectVariant::probabilistic, 2)));
}

TEST_CASE("survival fields stay in their domains") {
  bool salty_zombie = false;
  bool arrow_cow = false;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    WorldConfig cfg = crafter_default();
    sample_survival(rng, cfg);
    for (const auto& d : cfg.drink) {
      for (int f : {d.inc_drink_func, d.inc_health_func, d.inc_food_func}) CHECK((f >= -1 && f <= 1));
    }
    for (const auto& n : cfg.npc) {
      if (!n.eatable) CHECK(n.inc_thirst_func == 0);
      if (!n.arrowable) CHECK(n.arrow_damage_func == 0);
      if (!n.closable) CHECK(n.closable_health_damage_func == 0);
    }
    const auto& z = cfg.npc[idx(NpcKind::zombie)];
    salty_zombie |= z.eatable && z.inc_thirst_func == 1;
    arrow_cow |= cfg.npc[idx(NpcKind::cow)].arrowable;
  }
  CHECK(salty_zombie);
  CHECK(arrow_cow);
}

TEST_CASE("terrain sampler can grow trees by sand") {
  bool seen = false;
  for (std::uint64_t seed = 0; seed < 300 && !seen; ++seed) {
    Rng rng(seed);
    WorldConfig cfg = crafter_default();
    sample_terrain(rng, cfg);
    seen = cfg.terrain_neighbour[idx(NeighbourKey::tree)] == Material::sand;
  }
  CHECK(seen);
}

TEST_CASE("visual misleading permutes the six yields") {
  std::map<std::pair<Material, Item>, int> pairs;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const WorldConfig cfg = task_only(CollectVariant::visual_misleading, seed);
    std::map<Item, int> seen;
    for (auto m : kSolid) {
      const auto& r = rule(cfg, m);
      REQUIRE(r.receive.size() == 1);
      ++seen[r.receive.begin()->first];
      ++pairs[{m, r.receive.begin()->first}];
    }
    CHECK(seen.size() == kResourceItems.size());
    for (auto i : kResourceItems) CHECK(seen[i] == 1);
  }
  // Every source got every item at least once.
  CHECK(pairs.size() == 36);
}

TEST_CASE("traditional exceptions keep minerals and cover plants") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const WorldConfig cfg = task_only(CollectVariant::traditional_exceptions, seed);
    for (auto m : kMineral) {
      const auto& r = rule(cfg, m);
      REQUIRE(r.receive.size() == 1);
      CHECK(r.receive.begin()->second.probability == 1.0);
    }
    CHECK(rule(cfg, Material::stone).receive.count(Item::stone));
    CHECK(rule(cfg, Material::diamond).receive.count(Item::diamond));
    const auto& tree = rule(cfg, Material::tree).receive;
    const auto& grass = rule(cfg, Material::grass).receive;
    CHECK((tree.count(Item::wood) || grass.count(Item::wood)));
    CHECK((tree.count(Item::sapling) || grass.count(Item::sapling)));
  }
}

TEST_CASE("probabilistic drops are ten percent") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const WorldConfig cfg = task_only(CollectVariant::probabilistic, seed);
    for (auto m : kMineral) {
      int secondary = 0;
      for (const auto& [item, y] : rule(cfg, m).receive) {
        if (y.probability < 1.0) {
          ++secondary;
          CHECK(y.probability == 0.10);
        }
      }
      CHECK(secondary == 1);
    }
  }

  // Rolled by the engine.
  WorldConfig cfg = task_only(CollectVariant::probabilistic, 5);
  auto& r = const_cast<CollectRule&>(rule(cfg, Material::coal));
  r.require.clear();
  Item extra = Item::drink;
  for (const auto& [item, y] : r.receive) {
    if (y.probability < 1.0) extra = item;
  }
  GameState s = flat_state(cfg);
  int got = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    s.agent.inventory.fill(0);
    mars::testing::put(s, {1, 0}, Material::coal);
    std::vector<Achievement> unlocks;
    apply_do(s, unlocks);
    got += s.agent.count(extra) > 0;
  }
  const double f = static_cast<double>(got) / n;
  CHECK(f > 0.09);
  CHECK(f < 0.11);
}

TEST_CASE("stations and ignitability") {
  for (int v = 0; v < 3; ++v) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const WorldConfig cfg = task_only(static_cast<CollectVariant>(v), seed);
      int on = 0;
      for (auto i : kIgnitableItems) on += cfg.ignitable(i);
      CHECK(on > 0);
      CHECK(on < static_cast<int>(kIgnitableItems.size()));
      const auto& furnace = cfg.place_rule(Placeable::furnace).uses;
      REQUIRE(furnace.size() == 1);
      CHECK_FALSE(cfg.ignitable(furnace.begin()->first));
      CHECK(cfg.place_rule(Placeable::plant).allows(Material::grass));
      for (const auto& m : cfg.make) {
        bool hot = false;
        for (const auto& [i, k] : m.uses) {
          hot |= std::find(kIgnitableItems.begin(), kIgnitableItems.end(), i) != kIgnitableItems.end() &&
                 cfg.ignitable(i);
        }
        CHECK(m.needs(Station::table));
        CHECK(m.needs(Station::furnace) == hot);
      }
    }
  }
}

TEST_CASE("every tool is needed and every item has a source") {
  for (int v = 0; v < 3; ++v) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const WorldConfig cfg = sample_world(spec_of(4, static_cast<CollectVariant>(v), seed));
      for (auto t : {Item::sapling, Item::wood_pickaxe, Item::stone_pickaxe, Item::iron_pickaxe}) {
        CHECK(std::any_of(cfg.collect.begin(), cfg.collect.end(), [&](const CollectRule& r) {
          return r.require.count(t) && !r.receive.empty();
        }));
      }
      for (auto i : kResourceItems) {
        CHECK(std::any_of(cfg.collect.begin(), cfg.collect.end(),
                          [&](const CollectRule& r) { return r.receive.count(i) > 0; }));
      }
      for (const auto& r : cfg.collect) {
        for (const auto& [k, p] : r.leaves_object) CHECK(p == 0.1);
      }
    }
  }
}

TEST_CASE("samples pass the verifier") {
  int n = 0;
  for (int mask = 1; mask < 8; ++mask) {
    for (int v = 0; v < 3; ++v) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto s = spec_of(mask, static_cast<CollectVariant>(v), 100 + seed);
        const WorldConfig cfg = sample_world(s);
        CHECK(verify(cfg, s.seed).pass());
        validate(cfg);
        ++n;
      }
    }
  }
  CHECK(n == 63);
}
