#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mars/types.hpp"
#include "mars/world_config.hpp"

namespace mars {

// And-or dependency graph. Achievements and recipes are AND nodes over their
// requirements; items and stations are OR nodes over the ways to obtain them.
// Terrain leaves are decided by reachability rather than by children.
struct TechNode {
  enum class Kind : std::uint8_t { and_, or_ };
  Kind kind = Kind::and_;
  std::string label;  // "item:wood", "collect tree", "terrain:stone", ...
  std::vector<int> children;
  std::optional<Material> terrain;
};

struct TechTree {
  std::vector<TechNode> nodes;
  std::array<int, kAchievementCount> achievement{};

  int find(const std::string& label) const;  // -1 if absent
  const TechNode& node(const std::string& label) const;
  std::vector<std::string> child_labels(const std::string& label) const;
};

TechTree build_tech_tree(const WorldConfig& cfg);

// Materials the agent can stand on (reachable) or stand next to (touchable).
struct TerrainReach {
  std::array<bool, kMaterialCount> reachable{};
  std::array<bool, kMaterialCount> touchable{};
};

// Material pairs that every generated map contains as 4-neighbours.
std::vector<std::pair<Material, Material>> guaranteed_adjacency(const WorldConfig& cfg);

TerrainReach terrain_reach(const WorldConfig& cfg, const std::array<bool, kItemCount>& obtainable);

struct FeasibilityAnalysis {
  std::bitset<kAchievementCount> achievable;
  std::array<bool, kItemCount> obtainable{};
  TerrainReach reach;
  std::vector<bool> value;                     // per tech-tree node
  std::vector<std::vector<std::string>> cycles;  // each starts at its smallest name
  std::vector<std::string> empty_nodes;        // labels of OR nodes without children
};

FeasibilityAnalysis analyze_feasibility(const WorldConfig& cfg);

struct PrincipleResult {
  bool pass = true;
  std::vector<std::string> witnesses;
};

struct VerificationReport {
  PrincipleResult feasibility;
  PrincipleResult accessibility;
  PrincipleResult balance;
  PrincipleResult supply;

  bool pass() const { return feasibility.pass && accessibility.pass && balance.pass && supply.pass; }
};

PrincipleResult check_feasibility(const WorldConfig& cfg);
PrincipleResult check_accessibility(const WorldConfig& cfg);
PrincipleResult check_resource_balance(const WorldConfig& cfg);

enum class Stat : std::uint8_t { health, food, drink };

struct StatEvents {
  std::vector<std::string> increase;
  std::vector<std::string> decrease;
};

std::array<StatEvents, 3> enumerate_stat_events(const WorldConfig& cfg);

using MaterialStock = std::array<int, kMaterialCount>;

struct SupplyResult {
  bool pass = true;
  std::vector<std::string> deficits;  // "diamond: need 2, map supplies 1"
  std::map<Item, double> demand;      // units drawn over the whole run
  std::map<Material, int> mined;      // cells consumed per source
  std::array<bool, kMaterialCount> renewable{};
};

// Greedy unlock-everything run against fixed starting stocks.
SupplyResult simulate_supply(const WorldConfig& cfg, const MaterialStock& stock);
// Stocks of a freshly generated map (generator defaults).
MaterialStock map_stock(const WorldConfig& cfg, std::uint64_t seed);
PrincipleResult check_supply(const WorldConfig& cfg, std::uint64_t seed = 0);

VerificationReport verify(const WorldConfig& cfg, std::uint64_t seed = 0);

std::string report_to_yaml(const VerificationReport& r);

}  // namespace mars
