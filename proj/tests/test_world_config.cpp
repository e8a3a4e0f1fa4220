#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "mars/world_config.hpp"

using namespace mars;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(MARS_SOURCE_DIR) + "/worlds/" + name + ".yaml");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("crafter default tree rule") {
  const auto& cfg = crafter_default();
  const auto* tree = cfg.collect_rule(Material::tree);
  REQUIRE(tree);
  CHECK(tree->require.empty());
  REQUIRE(tree->receive.size() == 1);
  CHECK(tree->receive.at(Item::wood) == Yield{1, 1.0});
  CHECK(tree->leaves_material == Material::grass);
  CHECK(tree->leaves_object.empty());
  CHECK(cfg.collect_rule(Material::diamond)->require == ItemCounts{{Item::iron_pickaxe, 1}});
  CHECK(cfg.collect_rule(Material::grass)->receive.at(Item::sapling) == Yield{1, 0.1});
}

TEST_CASE("empty document is rejected") {
  CHECK_THROWS_WITH_AS(parse_config(""), "missing section terrain_neighbour", ConfigError);
  CHECK_THROWS_WITH_AS(load_world_text(""), "missing section terrain_neighbour", ConfigError);
}

TEST_CASE("task_dep fixture") {
  const auto& cfg = builtin_world("task_dep");
  CHECK(cfg.place_rule(Placeable::table).uses == ItemCounts{{Item::diamond, 2}});
  const auto* stone = cfg.collect_rule(Material::stone);
  REQUIRE(stone);
  CHECK(stone->require.empty());
  CHECK(stone->receive == std::map<Item, Yield>{{Item::diamond, {1, 1.0}}});
  CHECK(cfg.collect_rule(Material::water)->leaves_object ==
        std::map<NpcKind, double>{{NpcKind::zombie, 0.1}});
}

TEST_CASE("surv_task lava drink uses the damage alias") {
  const auto& d = builtin_world("surv_task").drink_spec(Liquid::lava);
  CHECK(d.inc_drink_func == 1);
  CHECK(d.inc_health_func == -1);
  CHECK(d.inc_food_func == 1);
}

TEST_CASE("fixtures parse from disk byte for byte") {
  for (auto name : kBuiltinWorldNames) {
    CAPTURE(name);
    const std::string text = read_fixture(std::string(name));
    CHECK(text == builtin_world_text(name));
    CHECK(load_world_text(text) == builtin_world(name));
  }
}

TEST_CASE("round trip") {
  for (auto name : kBuiltinWorldNames) {
    CAPTURE(name);
    const auto& cfg = builtin_world(name);
    const std::string text = serialize_config(cfg);
    CHECK(parse_config(text) == cfg);
    CHECK(serialize_config(parse_config(text)) == text);
  }
}

TEST_CASE("probabilistic receive is rendered explicitly") {
  WorldConfig cfg = crafter_default();
  for (auto& r : cfg.collect) {
    if (r.target == Material::stone) r.receive[Item::coal] = {2, 0.37};
  }
  const std::string text = serialize_config(cfg);
  CHECK(text.find("coal: {amount: 2, probability: 0.37}") != std::string::npos);
  YAML::Node n = YAML::Load(text);
  CHECK(n["collect"]["stone"]["receive"]["coal"]["probability"].as<double>() == 0.37);
  CHECK(parse_config(text) == cfg);
}

TEST_CASE("inert walk effects are normalized") {
  const auto& cfg = builtin_world("terr_surv");
  CHECK(cfg.effect(Material::grass).walkable == false);
  CHECK(cfg.effect(Material::water).walk_health == 1);
  CHECK(cfg.effect(Material::coal).dieable);
  auto text = std::string(builtin_world_text("default"));
  auto pos = text.find("stone: {walkable: false, walk_health: 0, dieable: false}");
  text.replace(pos, 56, "stone: {walkable: false, walk_health: -1, dieable: true}");
  CHECK(parse_config(text) == crafter_default());
}

TEST_CASE("schema errors carry a path") {
  const std::string base(builtin_world_text("default"));
  auto mutate = [&](const std::string& from, const std::string& to) {
    std::string t = base;
    auto pos = t.find(from);
    REQUIRE(pos != std::string::npos);
    t.replace(pos, from.size(), to);
    return t;
  };
  auto path_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  CHECK(path_of(mutate("tree: {require: {}, receive: {wood: 1}",
                       "tree: {require: {}, receive: {gold: 1}")) == "collect.tree.receive.gold");
  CHECK(path_of(mutate("inc_food_func: 1\n    inc_thirst_func: 0\n  zombie",
                       "inc_food_func: 3\n    inc_thirst_func: 0\n  zombie")) ==
        "npc_objects.cow.inc_food_func");
  CHECK(path_of(mutate("probability: 0.1", "probability: 1.5")) ==
        "collect.grass.receive.sapling.probability");
  CHECK(path_of(mutate("    player: grass\n", "")) == "terrain_neighbour.player");
  CHECK(path_of(mutate("gives: 1}\n    stone_pickaxe", "gives: 1, color: red}\n    stone_pickaxe")) ==
        "make.wood_pickaxe.color");
  CHECK(path_of(base + "weather: {}\n") == "weather");
  CHECK(path_of(mutate("nearby: [table], gives: 1}\n    stone_pickaxe",
                       "nearby: [anvil], gives: 1}\n    stone_pickaxe")) ==
        "make.wood_pickaxe.nearby[0]");
  CHECK(path_of(mutate("uses: {sapling: 1}, where: [grass], type: object",
                       "uses: {sapling: 1}, where: [grass], type: material")) ==
        "place.plant.type");
  CHECK_THROWS_AS(parse_config("- a\n- b\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("collect: {tree: [\n"), ConfigError);
}

TEST_CASE("object spellings for no creature") {
  const auto& tt = builtin_world("terr_task");
  CHECK(tt.collect_rule(Material::sand)->leaves_object.empty());
  CHECK(tt.collect_rule(Material::lava)->leaves_object.empty());
}

TEST_CASE("diff identity and antisymmetry") {
  CHECK(diff_configs(crafter_default(), crafter_default()).empty());
  for (auto name : kBuiltinWorldNames) {
    CAPTURE(name);
    const auto& w = builtin_world(name);
    auto fwd = diff_configs(crafter_default(), w);
    auto back = diff_configs(w, crafter_default());
    CHECK(fwd.empty() == (w == crafter_default()));
    REQUIRE(fwd.size() == back.size());
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      CHECK(fwd[i].path == back[i].path);
      CHECK(fwd[i].old_value == back[i].new_value);
      CHECK(fwd[i].new_value == back[i].old_value);
    }
  }
}

TEST_CASE("diff default to task_dep mentions diamond stone") {
  auto deltas = diff_configs(crafter_default(), builtin_world("task_dep"));
  bool found = false;
  for (const auto& d : deltas) found |= d.text == "collecting stone yields 1 diamond";
  CHECK(found);
}

TEST_CASE("diff default to terrain counts neighbour changes") {
  // Field-wise comparison of the two listings straight from YAML.
  YAML::Node a = YAML::Load(read_fixture("default"))["terrain_neighbour"];
  YAML::Node b = YAML::Load(read_fixture("terrain"))["terrain_neighbour"];
  std::set<std::string> changed;
  for (const auto& kv : a) {
    const auto key = kv.first.as<std::string>();
    if (kv.second.as<std::string>() != b[key].as<std::string>()) changed.insert(key);
  }
  CHECK(changed == std::set<std::string>{"coal", "iron", "tree", "player", "water"});

  auto deltas = diff_configs(crafter_default(), builtin_world("terrain"));
  std::set<std::string> got;
  for (const auto& d : deltas) {
    CHECK(d.path.rfind("terrain_neighbour.", 0) == 0);
    got.insert(d.path.substr(std::string("terrain_neighbour.").size()));
  }
  CHECK(deltas.size() == 5);
  CHECK(got == changed);
}

TEST_CASE("unknown builtin name") {
  CHECK_THROWS_AS(builtin_world("moon"), std::out_of_range);
  CHECK_FALSE(is_builtin_world("moon"));
}
