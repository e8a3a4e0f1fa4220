#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "mars/descriptor.hpp"

using namespace mars;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(MARS_SOURCE_DIR) + "/tests/golden/" + name);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Observation uniform(Material m) {
  Observation o;
  for (auto& c : o.view) c = ViewCell{true, m};
  return o;
}

void set(Observation& o, int dx, int dy, Material m) { o.at(dx, dy).material = m; }

std::string tail(const TextFrame& f, std::size_t from, std::size_t count) {
  TextFrame t;
  t.lines.assign(f.lines.begin() + static_cast<std::ptrdiff_t>(from),
                 f.lines.begin() + static_cast<std::ptrdiff_t>(from + count));
  return t.text();
}

Observation comprehensive() {
  Observation o = uniform(Material::path);
  o.last_action = Action::move_left;
  o.facing = {-1, 0};
  set(o, -1, 0, Material::tree);
  for (int dy : {-1, 1}) set(o, -1, dy, Material::stone);
  set(o, 0, -1, Material::stone);
  set(o, -2, -1, Material::stone);
  set(o, -3, 0, Material::water);
  set(o, -4, 0, Material::water);
  set(o, -3, 3, Material::sand);
  set(o, -4, 3, Material::sand);
  return o;
}

}  // namespace

TEST_CASE("comprehensive frame") {
  const TextFrame f = describe(comprehensive());
  CHECK(f.text() == golden("comprehensive.txt"));
}

TEST_CASE("nearby block frame") {
  Observation o = uniform(Material::path);
  o.facing = {1, 0};
  set(o, -2, -1, Material::stone);
  set(o, 3, -2, Material::stone);
  set(o, -3, 0, Material::tree);
  set(o, -4, 2, Material::tree);
  const TextFrame f = describe(o);
  CHECK(f.lines.front() == "I am on the path.");
  CHECK(tail(f, 2, 2) == golden("nearby.txt"));
}

TEST_CASE("water frame with objects and inventory") {
  Observation o = uniform(Material::grass);
  o.last_action = Action::do_;
  o.facing = {0, -1};
  for (int dx : {-1, 1}) {
    set(o, dx, 0, Material::iron);
    set(o, dx, 1, Material::tree);
  }
  set(o, 0, -1, Material::water);
  o.at(2, 0).station = Station::table;
  o.at(-2, 1).creature = NpcKind::skeleton;
  o.at(-2, 1).material = Material::path;
  o.health = 3;
  o.drink = 1;
  o.energy = 3;
  o.inventory[idx(Item::wood)] = 1;
  o.inventory[idx(Item::coal)] = 1;
  o.inventory[idx(Item::diamond)] = 3;
  o.inventory[idx(Item::wood_pickaxe)] = 1;
  CHECK(describe(o).text() == golden("water_case.txt"));
}

TEST_CASE("frame lines") {
  GameState s = generate_world(crafter_default(), 3);
  const TextFrame first = describe(observe(s));
  CHECK(first.lines[0].rfind("I am on the ", 0) == 0);
  CHECK(first.lines.back() == "I have nothing in your inventory.");
  CHECK(first.lines[first.lines.size() - 2] == "My status: <health: 9/9, food: 9/9, drink: 9/9, energy: 9/9>");
  step(s, Action::noop);
  CHECK(describe(observe(s)).lines[0] == "I took action noop.");
  CHECK(describe(observe(s)) == describe(observe(s)));
}

TEST_CASE("listed coordinates match the view") {
  GameState s = generate_world(crafter_default(), 5);
  Rng rng(9);
  for (int t = 0; t < 300 && !s.done; ++t) {
    step(s, static_cast<Action>(rng.below(kActionCount)));
    const Observation o = observe(s);
    const TextFrame f = describe(o);
    CHECK(f.lines[3] == cell_name(o.front()) + " is in front of me.");
    std::string list = f.lines[4].substr(1, f.lines[4].size() - 2);
    std::stringstream ss(list);
    std::string entry;
    int n = 0;
    while (std::getline(ss, entry, ')')) {
      if (entry.empty()) continue;
      if (entry.rfind(", ", 0) == 0) entry = entry.substr(2);
      const auto open = entry.find('(');
      const auto comma = entry.find(',', open);
      const int dx = std::stoi(entry.substr(open + 1, comma - open - 1));
      const int dy = std::stoi(entry.substr(comma + 1));
      CHECK(cell_name(o.at(dx, dy)) == entry.substr(0, open));
      ++n;
    }
    CHECK(n >= 8);
  }
}

TEST_CASE("token estimates") {
  CHECK(estimate_tokens(TextFrame{}) == 0);
  CHECK(estimate_tokens("") == 0);
  CHECK(chars_per_four_tokens("abcde") == 2);
  CHECK(pretoken_count("I took action move_left.") == 7);
  CHECK(pretoken_count("<tree(-1, 0),") == 7);
  const std::string g = golden("comprehensive.txt");
  const int n = estimate_tokens(g);
  CHECK(n >= 100);
  CHECK(n <= 200);
  std::string longer = g;
  for (int i = 0; i < 20; ++i) {
    const int before = estimate_tokens(longer);
    longer += " and more, (1, 2)";
    CHECK(estimate_tokens(longer) >= before);
    CHECK(chars_per_four_tokens(longer) >= chars_per_four_tokens(longer.substr(0, longer.size() - 3)));
  }
}
