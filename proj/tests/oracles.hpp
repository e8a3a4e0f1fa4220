#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <vector>

#include "mars/rng.hpp"
#include "mars/world_config.hpp"

namespace mars::testing {

// Six achievements over three resources, two tools and a table.
inline constexpr std::array<Achievement, 6> kSmallAchievements = {
    Achievement::collect_wood,      Achievement::collect_stone,      Achievement::collect_coal,
    Achievement::make_wood_pickaxe, Achievement::make_stone_pickaxe, Achievement::place_table};
inline constexpr std::array<Item, 3> kSmallResources = {Item::wood, Item::stone, Item::coal};
inline constexpr std::array<Item, 2> kSmallTools = {Item::wood_pickaxe, Item::stone_pickaxe};
inline constexpr std::array<Material, 3> kSmallSources = {Material::tree, Material::stone, Material::coal};

// Random rules over the small universe. Every terrain is walkable so only the
// recipe graph decides feasibility.
inline WorldConfig small_config(Rng& rng) {
  WorldConfig cfg = crafter_default();
  for (auto& e : cfg.terrain_effect) e = {true, 0, false};
  for (auto m : kSmallSources) {
    for (auto& r : cfg.collect) {
      if (r.target != m) continue;
      r.require.clear();
      for (auto t : kSmallTools) {
        if (rng.chance(0.35)) r.require[t] = 1;
      }
      r.receive.clear();
      for (auto i : kSmallResources) {
        if (rng.chance(0.4)) r.receive[i] = {1, 1.0};
      }
      if (r.receive.empty()) r.receive[rng.pick(kSmallResources)] = {1, 1.0};
    }
  }
  // Nothing else yields the small resources.
  for (auto& r : cfg.collect) {
    if (std::find(kSmallSources.begin(), kSmallSources.end(), r.target) != kSmallSources.end()) continue;
    for (auto i : kSmallResources) r.receive.erase(i);
    if (r.receive.empty()) r.receive[Item::sapling] = {1, 1.0};
    for (auto t : kSmallTools) r.require.erase(t);
  }
  auto uses = [&] {
    ItemCounts u;
    for (auto i : kSmallResources) {
      if (rng.chance(0.4)) u[i] = 1;
    }
    if (u.empty()) u[rng.pick(kSmallResources)] = 1;
    return u;
  };
  for (auto t : kSmallTools) {
    for (auto& r : cfg.make) {
      if (r.tool != t) continue;
      r.uses = uses();
      r.nearby.clear();
      if (rng.coin()) r.nearby.push_back(Station::table);
    }
  }
  for (auto& r : cfg.place) {
    if (r.placed == Placeable::table) r.uses = uses();
  }
  return cfg;
}

// Exhaustive search: try the six achievements in every order, attempting each
// once; an achievement is feasible iff some order reaches it.
inline std::bitset<6> brute_force_small(const WorldConfig& cfg) {
  auto pos = [](Achievement a) {
    return static_cast<int>(std::find(kSmallAchievements.begin(), kSmallAchievements.end(), a) -
                            kSmallAchievements.begin());
  };
  auto has_item = [&](const std::bitset<6>& got, Item i) {
    if (i == Item::wood_pickaxe) return got.test(static_cast<std::size_t>(pos(Achievement::make_wood_pickaxe)));
    if (i == Item::stone_pickaxe) return got.test(static_cast<std::size_t>(pos(Achievement::make_stone_pickaxe)));
    return got.test(static_cast<std::size_t>(pos(collect_achievement(i))));
  };
  auto possible = [&](const std::bitset<6>& got, Achievement a) {
    auto all_uses = [&](const ItemCounts& u) {
      return std::all_of(u.begin(), u.end(), [&](const auto& p) { return has_item(got, p.first); });
    };
    const bool table = got.test(static_cast<std::size_t>(pos(Achievement::place_table)));
    switch (a) {
      case Achievement::make_wood_pickaxe:
      case Achievement::make_stone_pickaxe: {
        const auto& r = cfg.make_rule(a == Achievement::make_wood_pickaxe ? Item::wood_pickaxe : Item::stone_pickaxe);
        return all_uses(r.uses) && (!r.needs(Station::table) || table);
      }
      case Achievement::place_table:
        return all_uses(cfg.place_rule(Placeable::table).uses);
      default: {
        const Item want = a == Achievement::collect_wood ? Item::wood
                          : a == Achievement::collect_stone ? Item::stone
                                                            : Item::coal;
        for (const auto& r : cfg.collect) {
          if (r.receive.count(want) && all_uses(r.require)) return true;
        }
        return false;
      }
    }
  };
  std::array<int, 6> order = {0, 1, 2, 3, 4, 5};
  std::bitset<6> reached;
  do {
    std::bitset<6> got;
    for (int k : order) {
      if (possible(got, kSmallAchievements[static_cast<std::size_t>(k)])) got.set(static_cast<std::size_t>(k));
    }
    reached |= got;
  } while (std::next_permutation(order.begin(), order.end()));
  return reached;
}

}  // namespace mars::testing
