#include "mars/types.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace mars {

namespace {

constexpr std::array<std::string_view, kMaterialCount> kMaterialNames = {
    "water", "grass", "stone", "path", "sand", "tree", "lava", "coal", "iron", "diamond"};
constexpr std::array<std::string_view, kItemCount> kItemNames = {
    "sapling",      "wood",       "stone",       "coal",       "iron",
    "diamond",      "wood_pickaxe", "stone_pickaxe", "iron_pickaxe", "wood_sword",
    "stone_sword",  "iron_sword", "drink"};
constexpr std::array<std::string_view, kNpcKindCount> kNpcNames = {"cow", "zombie", "skeleton",
                                                                   "plant"};
constexpr std::array<std::string_view, 4> kPlaceableNames = {"stone", "table", "furnace",
                                                             "plant"};
constexpr std::array<std::string_view, 3> kStationNames = {"none", "table", "furnace"};
constexpr std::array<std::string_view, kNeighbourKeyCount> kNeighbourNames = {
    "coal", "iron", "diamond", "lava", "tree", "player", "water"};
constexpr std::array<std::string_view, 2> kLiquidNames = {"water", "lava"};
constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "noop",
    "move_left",
    "move_right",
    "move_up",
    "move_down",
    "do",
    "sleep",
    "place_stone",
    "place_table",
    "place_furnace",
    "place_plant",
    "make_wood_pickaxe",
    "make_stone_pickaxe",
    "make_iron_pickaxe",
    "make_wood_sword",
    "make_stone_sword",
    "make_iron_sword"};
constexpr std::array<std::string_view, kAchievementCount> kAchievementNames = {
    "collect_coal",      "collect_diamond",    "collect_drink",    "collect_iron",
    "collect_sapling",   "collect_stone",      "collect_wood",     "defeat_skeleton",
    "defeat_zombie",     "kill_cow",           "eat_plant",        "make_iron_pickaxe",
    "make_iron_sword",   "make_stone_pickaxe", "make_stone_sword", "make_wood_pickaxe",
    "make_wood_sword",   "place_furnace",      "place_plant",      "place_stone",
    "place_table",       "wake_up"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  auto it = std::find(names.begin(), names.end(), s);
  if (it == names.end()) return std::nullopt;
  return static_cast<E>(it - names.begin());
}

}  // namespace

std::string_view name(Material m) { return kMaterialNames.at(idx(m)); }
std::string_view name(Item i) { return kItemNames.at(idx(i)); }
std::string_view name(NpcKind k) { return kNpcNames.at(idx(k)); }
std::string_view name(Placeable p) { return kPlaceableNames.at(idx(p)); }
std::string_view name(Station s) { return kStationNames.at(idx(s)); }
std::string_view name(NeighbourKey k) { return kNeighbourNames.at(idx(k)); }
std::string_view name(Liquid l) { return kLiquidNames.at(idx(l)); }
std::string_view name(Action a) { return kActionNames.at(idx(a)); }
std::string_view name(Achievement a) { return kAchievementNames.at(idx(a)); }

std::optional<Material> parse_material(std::string_view s) {
  return lookup<Material>(kMaterialNames, s);
}
std::optional<Item> parse_item(std::string_view s) { return lookup<Item>(kItemNames, s); }
std::optional<NpcKind> parse_npc_kind(std::string_view s) {
  return lookup<NpcKind>(kNpcNames, s);
}
std::optional<Placeable> parse_placeable(std::string_view s) {
  return lookup<Placeable>(kPlaceableNames, s);
}
std::optional<NeighbourKey> parse_neighbour_key(std::string_view s) {
  return lookup<NeighbourKey>(kNeighbourNames, s);
}
std::optional<Liquid> parse_liquid(std::string_view s) { return lookup<Liquid>(kLiquidNames, s); }
std::optional<Action> parse_action(std::string_view s) { return lookup<Action>(kActionNames, s); }
std::optional<Achievement> parse_achievement(std::string_view s) {
  return lookup<Achievement>(kAchievementNames, s);
}

std::string task_phrase(Achievement a) {
  switch (a) {
    case Achievement::defeat_skeleton: return "kill skeleton";
    case Achievement::defeat_zombie: return "kill zombie";
    default: break;
  }
  std::string s(name(a));
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

std::optional<Achievement> parse_task_phrase(std::string_view s) {
  std::string norm;
  for (char c : s) {
    if (c == '_' || c == '-') c = ' ';
    norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  auto b = norm.find_first_not_of(" \t\r\n.\"'");
  auto e = norm.find_last_not_of(" \t\r\n.\"'");
  if (b == std::string::npos) return std::nullopt;
  norm = norm.substr(b, e - b + 1);
  for (int i = 0; i < kAchievementCount; ++i) {
    auto a = static_cast<Achievement>(i);
    std::string plain(name(a));
    std::replace(plain.begin(), plain.end(), '_', ' ');
    if (norm == task_phrase(a) || norm == plain) return a;
  }
  if (norm == "eat cow") return Achievement::kill_cow;
  if (norm == "defeat cow") return Achievement::kill_cow;
  return std::nullopt;
}

std::optional<Item> material_item(Material m) {
  switch (m) {
    case Material::tree: return Item::wood;
    case Material::stone: return Item::stone;
    case Material::coal: return Item::coal;
    case Material::iron: return Item::iron;
    case Material::diamond: return Item::diamond;
    case Material::grass: return Item::sapling;
    default: return std::nullopt;
  }
}

std::optional<Material> item_material(Item i) {
  switch (i) {
    case Item::wood: return Material::tree;
    case Item::stone: return Material::stone;
    case Item::coal: return Material::coal;
    case Item::iron: return Material::iron;
    case Item::diamond: return Material::diamond;
    default: return std::nullopt;
  }
}

Action place_action(Placeable p) {
  return static_cast<Action>(idx(Action::place_stone) + idx(p));
}

Action make_action(Item tool) {
  if (!is_tool(tool)) throw std::invalid_argument("not a tool");
  return static_cast<Action>(idx(Action::make_wood_pickaxe) + idx(tool) -
                             idx(Item::wood_pickaxe));
}

std::optional<Placeable> placed_by(Action a) {
  if (a < Action::place_stone || a > Action::place_plant) return std::nullopt;
  return static_cast<Placeable>(idx(a) - idx(Action::place_stone));
}

std::optional<Item> made_by(Action a) {
  if (a < Action::make_wood_pickaxe) return std::nullopt;
  return static_cast<Item>(idx(Item::wood_pickaxe) + idx(a) - idx(Action::make_wood_pickaxe));
}

bool has_collect_achievement(Item i) {
  switch (i) {
    case Item::coal:
    case Item::diamond:
    case Item::drink:
    case Item::iron:
    case Item::sapling:
    case Item::stone:
    case Item::wood: return true;
    default: return false;
  }
}

Achievement collect_achievement(Item i) {
  switch (i) {
    case Item::coal: return Achievement::collect_coal;
    case Item::diamond: return Achievement::collect_diamond;
    case Item::drink: return Achievement::collect_drink;
    case Item::iron: return Achievement::collect_iron;
    case Item::sapling: return Achievement::collect_sapling;
    case Item::stone: return Achievement::collect_stone;
    case Item::wood: return Achievement::collect_wood;
    default: throw std::invalid_argument("item has no collect achievement");
  }
}

Achievement place_achievement(Placeable p) {
  switch (p) {
    case Placeable::stone: return Achievement::place_stone;
    case Placeable::table: return Achievement::place_table;
    case Placeable::furnace: return Achievement::place_furnace;
    case Placeable::plant: return Achievement::place_plant;
  }
  throw std::invalid_argument("bad placeable");
}

Achievement make_achievement(Item tool) {
  switch (tool) {
    case Item::wood_pickaxe: return Achievement::make_wood_pickaxe;
    case Item::stone_pickaxe: return Achievement::make_stone_pickaxe;
    case Item::iron_pickaxe: return Achievement::make_iron_pickaxe;
    case Item::wood_sword: return Achievement::make_wood_sword;
    case Item::stone_sword: return Achievement::make_stone_sword;
    case Item::iron_sword: return Achievement::make_iron_sword;
    default: throw std::invalid_argument("not a tool");
  }
}

Achievement npc_achievement(NpcKind k) {
  switch (k) {
    case NpcKind::cow: return Achievement::kill_cow;
    case NpcKind::zombie: return Achievement::defeat_zombie;
    case NpcKind::skeleton: return Achievement::defeat_skeleton;
    case NpcKind::plant: return Achievement::eat_plant;
  }
  throw std::invalid_argument("bad npc kind");
}

}  // namespace mars
