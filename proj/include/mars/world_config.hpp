#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mars/types.hpp"

namespace mars {

// Schema violation while loading a rule document; `path()` names the offending
// field ("collect.tree.receive.foo").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct TerrainEffect {
  bool walkable = true;
  int walk_health = 0;  // -1, 0 or +1 per step onto the cell
  bool dieable = false;

  bool operator==(const TerrainEffect&) const = default;
};

struct NpcSpec {
  bool eatable = false;
  bool arrowable = false;
  bool closable = false;
  bool can_walk = false;
  bool attackable = false;
  bool defeatable = false;
  int eat_health_damage_func = 0;
  int inc_food_func = 0;
  int inc_thirst_func = 0;
  int arrow_damage_func = 0;
  int closable_health_damage_func = 0;

  bool removable() const { return eatable || defeatable; }
  bool operator==(const NpcSpec&) const = default;
};

struct DrinkSpec {
  int inc_drink_func = 0;
  int inc_health_func = 0;
  int inc_food_func = 0;

  bool operator==(const DrinkSpec&) const = default;
};

struct Yield {
  int amount = 1;
  double probability = 1.0;  // in (0, 1]

  double expected() const { return amount * probability; }
  bool operator==(const Yield&) const = default;
};

using ItemCounts = std::map<Item, int>;

struct CollectRule {
  Material target = Material::grass;
  ItemCounts require;  // tool checks, never consumed
  std::map<Item, Yield> receive;
  Material leaves_material = Material::grass;
  std::map<NpcKind, double> leaves_object;

  bool operator==(const CollectRule&) const = default;
};

enum class PlaceKind : std::uint8_t { material, object };

struct PlaceRule {
  Placeable placed = Placeable::stone;
  ItemCounts uses;
  std::vector<Material> where;  // sorted, unique
  PlaceKind kind = PlaceKind::material;

  bool allows(Material m) const;
  bool operator==(const PlaceRule&) const = default;
};

struct MakeRule {
  Item tool = Item::wood_pickaxe;
  ItemCounts uses;
  std::vector<Station> nearby;  // sorted, unique, subset of {table, furnace}
  int gives = 1;

  bool needs(Station s) const;
  bool operator==(const MakeRule&) const = default;
};

// The full declarative rule set of a world.
struct WorldConfig {
  std::array<Material, kNeighbourKeyCount> terrain_neighbour{};
  std::array<TerrainEffect, kMaterialCount> terrain_effect{};
  std::array<NpcSpec, kNpcKindCount> npc{};
  std::array<DrinkSpec, 2> drink{};
  std::array<bool, 5> ignitability{};  // indexed like kIgnitableItems
  std::vector<CollectRule> collect;    // at most one rule per target
  std::vector<PlaceRule> place;        // exactly one per Placeable, in enum order
  std::vector<MakeRule> make;          // exactly one per tool, in kToolItems order

  Material neighbour(NeighbourKey k) const { return terrain_neighbour[idx(k)]; }
  Material spawn_material() const { return neighbour(NeighbourKey::player); }
  const TerrainEffect& effect(Material m) const { return terrain_effect[idx(m)]; }
  const NpcSpec& npc_spec(NpcKind k) const { return npc[idx(k)]; }
  const DrinkSpec& drink_spec(Liquid l) const { return drink[idx(l)]; }
  bool ignitable(Item i) const;
  void set_ignitable(Item i, bool v);

  const CollectRule* collect_rule(Material m) const;
  const PlaceRule& place_rule(Placeable p) const;
  const MakeRule& make_rule(Item tool) const;

  bool operator==(const WorldConfig&) const = default;
};

// Parse a rule document. With `base == nullptr` every section must be present;
// otherwise absent sections are inherited from `base` (the appendix world
// listings only spell out the sections they modify). A present section must
// be complete.
WorldConfig parse_config(std::string_view text, const WorldConfig* base = nullptr);

// Canonical rendering; parse_config(serialize_config(c)) == c.
std::string serialize_config(const WorldConfig& cfg);

// Checks cross-field invariants, throwing ConfigError. parse_config runs this.
void validate(const WorldConfig& cfg);

// Zero the fields that cannot matter (non-walkable walk effects).
void normalize_inert(WorldConfig& cfg);

// Built-in worlds: the Crafter default plus the seven evaluation worlds.
inline constexpr std::array<std::string_view, 8> kBuiltinWorldNames = {
    "default", "terrain", "survival", "task_dep", "terr_surv", "terr_task", "surv_task",
    "all_three"};

const WorldConfig& builtin_world(std::string_view name);  // throws std::out_of_range
std::string_view builtin_world_text(std::string_view name);
bool is_builtin_world(std::string_view name);
const WorldConfig& crafter_default();

// Load a world document, inheriting missing sections from the Crafter default.
// An empty document is rejected.
WorldConfig load_world_text(std::string_view text);
WorldConfig load_world_file(const std::string& path);
// Builtin name or a file path.
WorldConfig resolve_world(const std::string& name_or_path);

struct RuleDelta {
  std::string path;       // e.g. "collect.stone.receive.diamond"
  std::string old_value;  // "" when absent
  std::string new_value;
  std::string text;       // English sentence describing the `other` rule

  bool operator==(const RuleDelta&) const = default;
};

// Ground-truth rule deltas from `base` to `other`, in section order.
std::vector<RuleDelta> diff_configs(const WorldConfig& base, const WorldConfig& other);

std::string format_probability(double p);

}  // namespace mars
