#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mars {

// Terrain materials. Closed set; the world never introduces new ones.
enum class Material : std::uint8_t {
  water, grass, stone, path, sand, tree, lava, coal, iron, diamond
};
inline constexpr int kMaterialCount = 10;
inline constexpr std::array<Material, kMaterialCount> kAllMaterials = {
    Material::water, Material::grass, Material::stone, Material::path, Material::sand,
    Material::tree,  Material::lava,  Material::coal,  Material::iron, Material::diamond};

// Inventory items, in display order. `drink` is a pseudo-item: yields of it are
// routed to the drink stat and it never sits in the inventory.
enum class Item : std::uint8_t {
  sapling, wood, stone, coal, iron, diamond,
  wood_pickaxe, stone_pickaxe, iron_pickaxe,
  wood_sword, stone_sword, iron_sword,
  drink
};
inline constexpr int kItemCount = 13;
inline constexpr int kInventorySlots = 12;  // every item except drink
inline constexpr std::array<Item, kItemCount> kAllItems = {
    Item::sapling,      Item::wood,          Item::stone,        Item::coal,
    Item::iron,         Item::diamond,       Item::wood_pickaxe, Item::stone_pickaxe,
    Item::iron_pickaxe, Item::wood_sword,    Item::stone_sword,  Item::iron_sword,
    Item::drink};

// Raw resources that can be collected and spent.
inline constexpr std::array<Item, 6> kResourceItems = {
    Item::wood, Item::stone, Item::coal, Item::iron, Item::diamond, Item::sapling};
inline constexpr std::array<Item, 6> kToolItems = {
    Item::wood_pickaxe, Item::stone_pickaxe, Item::iron_pickaxe,
    Item::wood_sword,   Item::stone_sword,   Item::iron_sword};

enum class NpcKind : std::uint8_t { cow, zombie, skeleton, plant };
inline constexpr int kNpcKindCount = 4;
inline constexpr std::array<NpcKind, kNpcKindCount> kAllNpcKinds = {
    NpcKind::cow, NpcKind::zombie, NpcKind::skeleton, NpcKind::plant};

// Things that can be placed.
enum class Placeable : std::uint8_t { stone, table, furnace, plant };
inline constexpr std::array<Placeable, 4> kAllPlaceables = {
    Placeable::stone, Placeable::table, Placeable::furnace, Placeable::plant};

// Crafting stations that can stand on a cell.
enum class Station : std::uint8_t { none, table, furnace };

// Keys of the terrain_neighbour section.
enum class NeighbourKey : std::uint8_t { coal, iron, diamond, lava, tree, player, water };
inline constexpr int kNeighbourKeyCount = 7;
inline constexpr std::array<NeighbourKey, kNeighbourKeyCount> kAllNeighbourKeys = {
    NeighbourKey::coal, NeighbourKey::iron,   NeighbourKey::diamond, NeighbourKey::lava,
    NeighbourKey::tree, NeighbourKey::player, NeighbourKey::water};

// Materials that can be ignitable.
inline constexpr std::array<Item, 5> kIgnitableItems = {
    Item::wood, Item::stone, Item::coal, Item::iron, Item::diamond};

enum class Liquid : std::uint8_t { water, lava };

enum class Action : std::uint8_t {
  noop, move_left, move_right, move_up, move_down, do_, sleep,
  place_stone, place_table, place_furnace, place_plant,
  make_wood_pickaxe, make_stone_pickaxe, make_iron_pickaxe,
  make_wood_sword, make_stone_sword, make_iron_sword
};
inline constexpr int kActionCount = 17;

enum class Achievement : std::uint8_t {
  collect_coal, collect_diamond, collect_drink, collect_iron, collect_sapling,
  collect_stone, collect_wood, defeat_skeleton, defeat_zombie, kill_cow, eat_plant,
  make_iron_pickaxe, make_iron_sword, make_stone_pickaxe, make_stone_sword,
  make_wood_pickaxe, make_wood_sword, place_furnace, place_plant, place_stone,
  place_table, wake_up
};
inline constexpr int kAchievementCount = 22;

std::string_view name(Material m);
std::string_view name(Item i);
std::string_view name(NpcKind k);
std::string_view name(Placeable p);
std::string_view name(Station s);
std::string_view name(NeighbourKey k);
std::string_view name(Liquid l);
std::string_view name(Action a);
std::string_view name(Achievement a);

std::optional<Material> parse_material(std::string_view s);
std::optional<Item> parse_item(std::string_view s);
std::optional<NpcKind> parse_npc_kind(std::string_view s);
std::optional<Placeable> parse_placeable(std::string_view s);
std::optional<NeighbourKey> parse_neighbour_key(std::string_view s);
std::optional<Liquid> parse_liquid(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Achievement> parse_achievement(std::string_view s);

// Human task phrasing used by the LLM task pool ("collect wood", "kill zombie").
std::string task_phrase(Achievement a);
std::optional<Achievement> parse_task_phrase(std::string_view s);

constexpr bool is_tool(Item i) {
  return i >= Item::wood_pickaxe && i <= Item::iron_sword;
}
constexpr bool is_liquid(Material m) { return m == Material::water || m == Material::lava; }
constexpr std::optional<Liquid> as_liquid(Material m) {
  if (m == Material::water) return Liquid::water;
  if (m == Material::lava) return Liquid::lava;
  return std::nullopt;
}

// Item that a resource material nominally corresponds to (stone -> stone item).
std::optional<Item> material_item(Material m);
std::optional<Material> item_material(Item i);

Action place_action(Placeable p);
Action make_action(Item tool);
std::optional<Placeable> placed_by(Action a);
std::optional<Item> made_by(Action a);

Achievement collect_achievement(Item i);  // drink -> collect_drink
bool has_collect_achievement(Item i);
Achievement place_achievement(Placeable p);
Achievement make_achievement(Item tool);
Achievement npc_achievement(NpcKind k);

template <typename E>
constexpr int idx(E e) {
  return static_cast<int>(e);
}

}  // namespace mars
