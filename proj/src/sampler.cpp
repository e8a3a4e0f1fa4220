#include "mars/sampler.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "mars/verifier.hpp"

namespace mars {

namespace {

constexpr std::array<std::string_view, 3> kAxisNames = {"terrain", "survival", "task_dependency"};
constexpr std::array<std::string_view, 3> kVariantNames = {"visual_misleading", "traditional_exceptions",
                                                           "probabilistic"};

constexpr std::array<Material, 6> kSolidSources = {Material::tree, Material::stone, Material::coal,
                                                   Material::iron, Material::diamond, Material::grass};
constexpr std::array<Material, 4> kMinerals = {Material::stone, Material::coal, Material::iron, Material::diamond};
constexpr std::array<Material, 3> kCreatureLeavers = {Material::water, Material::lava, Material::sand};
constexpr std::array<NpcKind, 3> kWalkers = {NpcKind::cow, NpcKind::zombie, NpcKind::skeleton};
constexpr std::array<Item, 5> kSecondaryDrops = {Item::wood, Item::stone, Item::coal, Item::iron, Item::sapling};
// std::nullopt is bare hands.
const std::array<std::optional<Item>, 5> kCollectTools = {std::nullopt, Item::sapling, Item::wood_pickaxe,
                                                          Item::stone_pickaxe, Item::iron_pickaxe};

int signed_unit(Rng& rng) { return rng.range(-1, 1); }

template <typename T, std::size_t N>
std::vector<T> pick_some(Rng& rng, const std::array<T, N>& from, int n) {
  std::vector<T> v(from.begin(), from.end());
  rng.shuffle(v);
  v.resize(static_cast<std::size_t>(std::min<int>(n, static_cast<int>(N))));
  return v;
}

CollectRule& rule_for(WorldConfig& cfg, Material m) {
  for (auto& r : cfg.collect) {
    if (r.target == m) return r;
  }
  cfg.collect.push_back(CollectRule{m, {}, {}, m, {}});
  return cfg.collect.back();
}

std::optional<Item> self_item(Material m) {
  switch (m) {
    case Material::stone: return Item::stone;
    case Material::coal: return Item::coal;
    case Material::iron: return Item::iron;
    case Material::diamond: return Item::diamond;
    default: return std::nullopt;
  }
}

Yield yield_on(Material m) { return m == Material::grass ? Yield{1, 0.1} : Yield{1, 1.0}; }

}  // namespace

std::string_view name(Axis a) { return kAxisNames[static_cast<std::size_t>(idx(a))]; }
std::string_view name(CollectVariant v) { return kVariantNames[static_cast<std::size_t>(idx(v))]; }

std::optional<Axis> parse_axis(std::string_view s) {
  for (std::size_t i = 0; i < kAxisNames.size(); ++i) {
    if (kAxisNames[i] == s) return static_cast<Axis>(i);
  }
  if (s == "task" || s == "task_dep") return Axis::task_dependency;
  return std::nullopt;
}

std::optional<CollectVariant> parse_collect_variant(std::string_view s) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (kVariantNames[i] == s) return static_cast<CollectVariant>(i);
  }
  return std::nullopt;
}

void normalize_inert_creatures(WorldConfig& cfg) {
  for (auto& n : cfg.npc) {
    if (!n.eatable) n.eat_health_damage_func = n.inc_food_func = n.inc_thirst_func = 0;
    if (!n.arrowable) n.arrow_damage_func = 0;
    if (!n.closable) n.closable_health_damage_func = 0;
  }
}

void sample_terrain(Rng& rng, WorldConfig& cfg) {
  auto& nb = cfg.terrain_neighbour;
  if (rng.coin()) {
    for (auto k : pick_some(rng, kAllNeighbourKeys, rng.range(2, 4))) {
      std::vector<Material> options;
      for (auto m : kAllMaterials) {
        if (k == NeighbourKey::player || name(m) != name(k)) options.push_back(m);
      }
      nb[idx(k)] = rng.pick(options);
    }
  } else {
    // Swap two terrain names wherever they appear as neighbours.
    const Material a = nb[rng.below(nb.size())];
    std::vector<Material> others;
    for (auto m : kAllMaterials) {
      if (m != a) others.push_back(m);
    }
    const Material b = rng.pick(others);
    for (auto& m : nb) {
      if (m == a) {
        m = b;
      } else if (m == b) {
        m = a;
      }
    }
  }
  std::vector<Material> shaped;
  for (auto m : kAllMaterials) {
    if (m != Material::tree) shaped.push_back(m);  // trees keep their height
  }
  rng.shuffle(shaped);
  const int n = rng.range(1, 3);
  for (int i = 0; i < n; ++i) {
    auto& e = cfg.terrain_effect[idx(shaped[static_cast<std::size_t>(i)])];
    e.walkable = rng.coin();
    e.walk_health = signed_unit(rng);
    e.dieable = rng.coin();
  }
  normalize_inert(cfg);
}

void sample_survival(Rng& rng, WorldConfig& cfg) {
  // Objects 0..3 are creatures, 4 and 5 the liquids.
  const std::array<int, 6> objects = {0, 1, 2, 3, 4, 5};
  for (int o : pick_some(rng, objects, rng.range(2, 6))) {
    if (o < kNpcKindCount) {
      auto& n = cfg.npc[static_cast<std::size_t>(o)];
      n.eatable = rng.coin();
      n.arrowable = rng.coin();
      n.closable = rng.coin();
      n.can_walk = rng.coin();
      n.attackable = rng.coin();
      n.defeatable = rng.coin();
      n.eat_health_damage_func = signed_unit(rng);
      n.inc_food_func = signed_unit(rng);
      n.inc_thirst_func = signed_unit(rng);
      n.arrow_damage_func = signed_unit(rng);
      n.closable_health_damage_func = signed_unit(rng);
    } else {
      auto& d = cfg.drink[static_cast<std::size_t>(o - kNpcKindCount)];
      d.inc_drink_func = signed_unit(rng);
      d.inc_health_func = signed_unit(rng);
      d.inc_food_func = signed_unit(rng);
    }
  }
  normalize_inert_creatures(cfg);
}

void sample_task_dependency(Rng& rng, CollectVariant variant, WorldConfig& cfg, const SamplerParams& params) {
  for (auto m : kSolidSources) rule_for(cfg, m).receive.clear();

  if (variant == CollectVariant::visual_misleading) {
    std::vector<Item> items(kResourceItems.begin(), kResourceItems.end());
    rng.shuffle(items);
    for (std::size_t i = 0; i < kSolidSources.size(); ++i) {
      rule_for(cfg, kSolidSources[i]).receive[items[i]] = yield_on(kSolidSources[i]);
    }
    for (auto liquid : {Material::water, Material::lava}) {
      auto& r = rule_for(cfg, liquid);
      r.receive.clear();
      if (rng.coin()) r.receive[Item::drink] = {1, 1.0};
    }
  } else {
    for (auto m : kMinerals) rule_for(cfg, m).receive[*self_item(m)] = {1, 1.0};
    // Wood and saplings must still come from somewhere.
    std::array<Material, 2> plants = {Material::tree, Material::grass};
    rng.shuffle(plants);
    rule_for(cfg, plants[0]).receive[Item::wood] = yield_on(plants[0]);
    rule_for(cfg, plants[1]).receive[Item::sapling] = yield_on(plants[1]);
    for (auto m : plants) {
      if (rng.coin()) rule_for(cfg, m).receive.emplace(rng.pick(kResourceItems), yield_on(m));
    }
    if (variant == CollectVariant::probabilistic) {
      for (auto m : kMinerals) {
        std::vector<Item> others;
        for (auto i : kSecondaryDrops) {
          if (i != *self_item(m)) others.push_back(i);
        }
        rule_for(cfg, m).receive[rng.pick(others)] = {1, params.secondary_drop};
      }
    }
  }

  // Ignitability with both kinds present.
  for (auto i : kIgnitableItems) cfg.set_ignitable(i, rng.coin());
  const bool any_on = std::any_of(kIgnitableItems.begin(), kIgnitableItems.end(), [&](Item i) { return cfg.ignitable(i); });
  const bool any_off = std::any_of(kIgnitableItems.begin(), kIgnitableItems.end(), [&](Item i) { return !cfg.ignitable(i); });
  if (!any_on || !any_off) {
    const Item flip = rng.pick(kIgnitableItems);
    cfg.set_ignitable(flip, !cfg.ignitable(flip));
  }

  for (auto& p : cfg.place) {
    const int amount = p.uses.empty() ? 1 : p.uses.begin()->second;
    if (p.placed == Placeable::table) {
      p.uses = {{rng.pick(kIgnitableItems), amount}};
    } else if (p.placed == Placeable::furnace) {
      std::vector<Item> safe;
      for (auto i : kIgnitableItems) {
        if (!cfg.ignitable(i)) safe.push_back(i);
      }
      p.uses = {{rng.pick(safe), amount}};
    } else if (p.placed == Placeable::plant) {
      p.where = {Material::grass};
      for (auto m : kAllMaterials) {
        if (m != Material::grass && m != Material::tree && rng.chance(0.3)) p.where.push_back(m);
      }
      std::sort(p.where.begin(), p.where.end());
    }
  }

  for (auto& r : cfg.make) {
    const bool hot = std::any_of(r.uses.begin(), r.uses.end(), [&](const auto& u) {
      return std::find(kIgnitableItems.begin(), kIgnitableItems.end(), u.first) != kIgnitableItems.end() &&
             cfg.ignitable(u.first);
    });
    r.nearby = hot ? std::vector<Station>{Station::table, Station::furnace} : std::vector<Station>{Station::table};
  }

  // Requirements follow a random unlock order: each rule may only require a
  // tool craftable from items yielded by rules earlier in the order. Terrain
  // can still block, so rounds repeat until the tech tree is feasible.
  const auto station_item = [&](Placeable p) { return cfg.place_rule(p).uses.begin()->first; };
  const auto craftable = [&](Item tool, const std::set<Item>& have) {
    if (tool == Item::sapling) return have.count(Item::sapling) > 0;
    const auto& m = cfg.make_rule(tool);
    for (const auto& [i, n] : m.uses) {
      if (!have.count(i)) return false;
    }
    if (m.needs(Station::table) && !have.count(station_item(Placeable::table))) return false;
    return !m.needs(Station::furnace) || have.count(station_item(Placeable::furnace)) > 0;
  };
  for (int round = 0; round < params.tool_rounds; ++round) {
    std::vector<CollectRule*> yielding;
    for (auto& r : cfg.collect) {
      r.require.clear();
      if (!r.receive.empty()) yielding.push_back(&r);
    }
    rng.shuffle(yielding);
    std::set<Item> have;
    std::set<Item> unused = {Item::sapling, Item::wood_pickaxe, Item::stone_pickaxe, Item::iron_pickaxe};
    for (auto* r : yielding) {
      std::vector<Item> open;
      for (auto t : unused) {
        if (craftable(t, have)) open.push_back(t);
      }
      if (!open.empty() && rng.chance(0.7)) {
        const Item t = rng.pick(open);
        r->require[t] = 1;
        unused.erase(t);
      } else if (!rng.coin()) {
        std::vector<Item> any;
        for (auto t : kCollectTools) {
          if (t && craftable(*t, have)) any.push_back(*t);
        }
        if (!any.empty()) r->require[rng.pick(any)] = 1;
      }
      for (const auto& [i, y] : r->receive) have.insert(i);
    }
    // Tools that never unlocked still go somewhere; the verifier judges.
    for (auto t : unused) rng.pick(yielding)->require[t] = 1;

    for (auto& r : cfg.collect) {
      r.leaves_material = rng.pick(kAllMaterials);
      r.leaves_object.clear();
      if (std::find(kCreatureLeavers.begin(), kCreatureLeavers.end(), r.target) != kCreatureLeavers.end() &&
          rng.coin()) {
        r.leaves_object[rng.pick(kWalkers)] = params.liquid_creature;
      }
    }
    if (unused.empty() && analyze_feasibility(cfg).achievable.all()) break;
  }
}

WorldConfig sample_world(const ModificationSpec& spec, const SamplerParams& params) {
  if (spec.axes.empty()) throw std::invalid_argument("modification spec needs at least one axis");
  std::string last = "none";
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
    WorldConfig cfg = crafter_default();
    if (spec.axes.count(Axis::terrain)) sample_terrain(rng, cfg);
    if (spec.axes.count(Axis::survival)) sample_survival(rng, cfg);
    if (spec.axes.count(Axis::task_dependency)) sample_task_dependency(rng, spec.collect_variant, cfg, params);
    try {
      validate(cfg);
    } catch (const ConfigError& e) {
      last = std::string("schema: ") + e.what();
      continue;
    }
    // Cheap principles first; the supply check generates a map.
    const std::pair<const char*, PrincipleResult (*)(const WorldConfig&)> checks[] = {
        {"feasibility", check_feasibility},
        {"accessibility", check_accessibility},
        {"balance", check_resource_balance},
    };
    bool ok = true;
    for (const auto& [label, check] : checks) {
      const auto r = check(cfg);
      if (!r.pass) {
        last = std::string(label) + ": " + (r.witnesses.empty() ? "" : r.witnesses.front());
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const auto supply = check_supply(cfg, spec.seed);
    if (!supply.pass) {
      last = "supply: " + (supply.witnesses.empty() ? std::string() : supply.witnesses.front());
      continue;
    }
    return cfg;
  }
  throw SamplingExhausted("no valid world after " + std::to_string(params.max_attempts) +
                          " attempts; last failure " + last);
}

}  // namespace mars
