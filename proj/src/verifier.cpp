#include "mars/verifier.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "mars/engine.hpp"

namespace mars {

namespace {

std::string item_label(Item i) { return "item:" + std::string(name(i)); }
std::string terrain_label(Material m) { return "terrain:" + std::string(name(m)); }
std::string station_label(Station s) { return "station:" + std::string(name(s)); }
std::string collect_label(Material m) { return "collect " + std::string(name(m)); }
std::string make_label(Item t) { return "make " + std::string(name(t)); }
std::string place_label(Placeable p) { return "place " + std::string(name(p)); }
std::string meet_label(NpcKind k) { return "meet " + std::string(name(k)); }

Material special_material(NeighbourKey k) {
  switch (k) {
    case NeighbourKey::coal: return Material::coal;
    case NeighbourKey::iron: return Material::iron;
    case NeighbourKey::diamond: return Material::diamond;
    case NeighbourKey::lava: return Material::lava;
    case NeighbourKey::tree: return Material::tree;
    default: return Material::water;
  }
}

Station station_for(Placeable p) {
  return p == Placeable::table ? Station::table : Station::furnace;
}

class Builder {
 public:
  int add(TechNode::Kind kind, const std::string& label) {
    auto it = ids_.find(label);
    if (it != ids_.end()) return it->second;
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({kind, label, {}, std::nullopt});
    ids_[label] = id;
    return id;
  }
  void link(int parent, int child) {
    auto& c = tree.nodes[static_cast<std::size_t>(parent)].children;
    if (std::find(c.begin(), c.end(), child) == c.end()) c.push_back(child);
  }
  int id(const std::string& label) const { return ids_.at(label); }

  TechTree tree;

 private:
  std::map<std::string, int> ids_;
};

using Kind = TechNode::Kind;

bool tools_obtainable(const ItemCounts& require, const std::array<bool, kItemCount>& obtainable) {
  return std::all_of(require.begin(), require.end(),
                     [&](const auto& r) { return obtainable[idx(r.first)]; });
}

}  // namespace

int TechTree::find(const std::string& label) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

const TechNode& TechTree::node(const std::string& label) const {
  const int i = find(label);
  if (i < 0) throw std::out_of_range("no tech node " + label);
  return nodes[static_cast<std::size_t>(i)];
}

std::vector<std::string> TechTree::child_labels(const std::string& label) const {
  std::vector<std::string> out;
  for (int c : node(label).children) out.push_back(nodes[static_cast<std::size_t>(c)].label);
  return out;
}

TechTree build_tech_tree(const WorldConfig& cfg) {
  Builder b;
  for (auto m : kAllMaterials) {
    const int id = b.add(Kind::and_, terrain_label(m));
    b.tree.nodes[static_cast<std::size_t>(id)].terrain = m;
  }
  for (auto i : kAllItems) b.add(Kind::or_, item_label(i));
  for (auto s : {Station::table, Station::furnace}) b.add(Kind::or_, station_label(s));

  for (const auto& r : cfg.collect) {
    const int m = b.add(Kind::and_, collect_label(r.target));
    for (const auto& [tool, n] : r.require) b.link(m, b.id(item_label(tool)));
    b.link(m, b.id(terrain_label(r.target)));
    for (const auto& [item, y] : r.receive) {
      if (y.probability > 0 && y.amount > 0) b.link(b.id(item_label(item)), m);
    }
  }
  for (const auto& r : cfg.make) {
    const int m = b.add(Kind::and_, make_label(r.tool));
    for (const auto& [item, n] : r.uses) b.link(m, b.id(item_label(item)));
    for (auto s : r.nearby) b.link(m, b.id(station_label(s)));
    b.link(b.id(item_label(r.tool)), m);
  }
  for (const auto& r : cfg.place) {
    const int m = b.add(Kind::and_, place_label(r.placed));
    for (const auto& [item, n] : r.uses) b.link(m, b.id(item_label(item)));
    const int site = b.add(Kind::or_, "site " + std::string(name(r.placed)));
    for (auto w : r.where) b.link(site, b.id(terrain_label(w)));
    b.link(m, site);
    if (r.placed == Placeable::table || r.placed == Placeable::furnace) {
      b.link(b.id(station_label(station_for(r.placed))), m);
    }
  }

  // Creatures are met on their host terrain, or when a collect leaves them.
  for (auto k : kAllNpcKinds) {
    const int meet = b.add(Kind::or_, meet_label(k));
    if (k == NpcKind::plant) {
      b.link(meet, b.id(place_label(Placeable::plant)));
    } else {
      b.link(meet, b.id(terrain_label(creature_host(cfg, k))));
    }
    for (const auto& r : cfg.collect) {
      auto it = r.leaves_object.find(k);
      if (it != r.leaves_object.end() && it->second > 0) b.link(meet, b.id(collect_label(r.target)));
    }
  }

  auto& ach = b.tree.achievement;
  for (auto i : kAllItems) {
    if (!has_collect_achievement(i)) continue;
    const Achievement a = collect_achievement(i);
    ach[idx(a)] = b.add(Kind::and_, std::string(name(a)));
    b.link(ach[idx(a)], b.id(item_label(i)));
  }
  for (auto t : kToolItems) {
    const Achievement a = make_achievement(t);
    ach[idx(a)] = b.add(Kind::and_, std::string(name(a)));
    b.link(ach[idx(a)], b.id(make_label(t)));
  }
  for (auto p : kAllPlaceables) {
    const Achievement a = place_achievement(p);
    ach[idx(a)] = b.add(Kind::and_, std::string(name(a)));
    b.link(ach[idx(a)], b.id(place_label(p)));
  }
  for (auto k : kAllNpcKinds) {
    const Achievement a = npc_achievement(k);
    const auto& spec = cfg.npc_spec(k);
    const int how = b.add(spec.removable() ? Kind::and_ : Kind::or_, "remove " + std::string(name(k)));
    ach[idx(a)] = b.add(Kind::and_, std::string(name(a)));
    b.link(ach[idx(a)], b.id(meet_label(k)));
    b.link(ach[idx(a)], how);
  }
  ach[idx(Achievement::wake_up)] = b.add(Kind::and_, std::string(name(Achievement::wake_up)));
  return std::move(b.tree);
}

std::vector<std::pair<Material, Material>> guaranteed_adjacency(const WorldConfig& cfg) {
  std::vector<std::pair<Material, Material>> edges = {
      {Material::grass, Material::sand}, {Material::grass, Material::stone}, {Material::stone, Material::path},
      {Material::grass, Material::path}};
  for (auto k : kAllNeighbourKeys) {
    if (k == NeighbourKey::player) continue;
    edges.emplace_back(special_material(k), cfg.neighbour(k));
  }
  return edges;
}

TerrainReach terrain_reach(const WorldConfig& cfg, const std::array<bool, kItemCount>& obtainable) {
  std::array<bool, kMaterialCount> passable{};
  for (auto m : kAllMaterials) passable[idx(m)] = cfg.effect(m).walkable && !cfg.effect(m).dieable;
  const auto& stone_rule = cfg.place_rule(Placeable::stone);
  const bool can_place_stone = std::all_of(stone_rule.uses.begin(), stone_rule.uses.end(),
                                           [&](const auto& u) { return obtainable[idx(u.first)]; });
  for (bool changed = true; changed;) {
    changed = false;
    for (auto m : kAllMaterials) {
      if (passable[idx(m)]) continue;
      bool ok = false;
      if (const auto* r = cfg.collect_rule(m)) {
        ok = tools_obtainable(r->require, obtainable) && passable[idx(r->leaves_material)];
      }
      ok = ok || (can_place_stone && stone_rule.allows(m) && passable[idx(Material::stone)]);
      if (ok) passable[idx(m)] = changed = true;
    }
  }

  TerrainReach out;
  out.reachable[idx(cfg.spawn_material())] = true;
  const auto edges = guaranteed_adjacency(cfg);
  for (bool changed = true; changed;) {
    changed = false;
    auto mark = [&](std::array<bool, kMaterialCount>& set, Material m) {
      if (!set[idx(m)]) set[idx(m)] = changed = true;
    };
    for (auto m : kAllMaterials) {
      if (out.reachable[idx(m)]) mark(out.touchable, m);
    }
    for (auto [a, b] : edges) {
      if (out.reachable[idx(a)]) mark(out.touchable, b);
      if (out.reachable[idx(b)]) mark(out.touchable, a);
    }
    for (auto m : kAllMaterials) {
      if (!out.touchable[idx(m)]) continue;
      if (passable[idx(m)]) mark(out.reachable, m);
      if (const auto* r = cfg.collect_rule(m); r && tools_obtainable(r->require, obtainable)) {
        mark(out.touchable, r->leaves_material);
      }
      if (can_place_stone && stone_rule.allows(m)) mark(out.touchable, Material::stone);
    }
  }
  return out;
}

namespace {

std::string short_name(const std::string& label) {
  const auto colon = label.find(':');
  return colon == std::string::npos ? label : label.substr(colon + 1);
}

bool is_resource_node(const TechNode& n) {
  return n.label.rfind("item:", 0) == 0 || n.label.rfind("station:", 0) == 0;
}

// Minimal cycles among the blocked items and stations, one per strongly
// connected component.
std::vector<std::vector<std::string>> blocked_cycles(const TechTree& t, const std::vector<bool>& value) {
  const int n = static_cast<int>(t.nodes.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    const auto& nx = t.nodes[static_cast<std::size_t>(x)];
    if (value[static_cast<std::size_t>(x)] || !is_resource_node(nx)) continue;
    for (int m : nx.children) {
      if (value[static_cast<std::size_t>(m)]) continue;
      for (int c : t.nodes[static_cast<std::size_t>(m)].children) {
        if (!value[static_cast<std::size_t>(c)] && is_resource_node(t.nodes[static_cast<std::size_t>(c)])) {
          adj[static_cast<std::size_t>(x)].push_back(c);
        }
      }
    }
  }

  // Tarjan.
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0), comp(static_cast<std::size_t>(n), -1);
  std::vector<bool> on(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  std::function<void(int)> visit = [&](int v) {
    const auto sv = static_cast<std::size_t>(v);
    index[sv] = low[sv] = counter++;
    stack.push_back(v);
    on[sv] = true;
    for (int w : adj[sv]) {
      const auto sw = static_cast<std::size_t>(w);
      if (index[sw] < 0) {
        visit(w);
        low[sv] = std::min(low[sv], low[sw]);
      } else if (on[sw]) {
        low[sv] = std::min(low[sv], index[sw]);
      }
    }
    if (low[sv] == index[sv]) {
      for (;;) {
        const int w = stack.back();
        stack.pop_back();
        on[static_cast<std::size_t>(w)] = false;
        comp[static_cast<std::size_t>(w)] = ncomp;
        if (w == v) break;
      }
      ++ncomp;
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[static_cast<std::size_t>(v)] < 0 && !adj[static_cast<std::size_t>(v)].empty()) visit(v);
  }

  std::vector<std::vector<std::string>> out;
  for (int c = 0; c < ncomp; ++c) {
    std::vector<std::string> best;
    for (int s = 0; s < n; ++s) {
      if (comp[static_cast<std::size_t>(s)] != c) continue;
      // Shortest cycle through s by BFS inside the component.
      std::vector<int> prev(static_cast<std::size_t>(n), -2);
      std::queue<int> q;
      q.push(s);
      prev[static_cast<std::size_t>(s)] = -1;
      int closing = -1;
      while (!q.empty() && closing < 0) {
        const int v = q.front();
        q.pop();
        for (int w : adj[static_cast<std::size_t>(v)]) {
          if (comp[static_cast<std::size_t>(w)] != c) continue;
          if (w == s) {
            closing = v;
            break;
          }
          if (prev[static_cast<std::size_t>(w)] == -2) {
            prev[static_cast<std::size_t>(w)] = v;
            q.push(w);
          }
        }
      }
      if (closing < 0) continue;
      std::vector<std::string> cyc;
      for (int v = closing; v != -1; v = prev[static_cast<std::size_t>(v)]) {
        cyc.push_back(short_name(t.nodes[static_cast<std::size_t>(v)].label));
      }
      std::reverse(cyc.begin(), cyc.end());
      auto smallest = std::min_element(cyc.begin(), cyc.end());
      std::rotate(cyc.begin(), smallest, cyc.end());
      if (best.empty() || cyc.size() < best.size() || (cyc.size() == best.size() && cyc < best)) best = cyc;
    }
    if (!best.empty()) out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FeasibilityAnalysis analyze_feasibility(const WorldConfig& cfg) {
  const TechTree t = build_tech_tree(cfg);
  FeasibilityAnalysis a;
  a.value.assign(t.nodes.size(), false);
  a.reach = terrain_reach(cfg, a.obtainable);
  // Least fixed point from all-false; both the graph and the terrain leaves
  // only ever flip to true.
  for (bool outer = true; outer;) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (a.value[i]) continue;
        const auto& nd = t.nodes[i];
        bool v;
        if (nd.terrain) {
          v = a.reach.touchable[idx(*nd.terrain)];
        } else if (nd.kind == Kind::and_) {
          v = std::all_of(nd.children.begin(), nd.children.end(),
                          [&](int c) { return a.value[static_cast<std::size_t>(c)]; });
        } else {
          v = std::any_of(nd.children.begin(), nd.children.end(),
                          [&](int c) { return a.value[static_cast<std::size_t>(c)]; });
        }
        if (v) a.value[i] = changed = true;
      }
    }
    for (auto i : kAllItems) a.obtainable[idx(i)] = a.value[static_cast<std::size_t>(t.find(item_label(i)))];
    const TerrainReach next = terrain_reach(cfg, a.obtainable);
    outer = next.touchable != a.reach.touchable || next.reachable != a.reach.reachable;
    a.reach = next;
  }
  for (int k = 0; k < kAchievementCount; ++k) {
    a.achievable[static_cast<std::size_t>(k)] = a.value[static_cast<std::size_t>(t.achievement[static_cast<std::size_t>(k)])];
  }

  // Witnesses: everything blocked below a failing achievement.
  std::vector<bool> seen(t.nodes.size(), false);
  std::vector<int> todo;
  for (int k = 0; k < kAchievementCount; ++k) {
    if (!a.achievable[static_cast<std::size_t>(k)]) todo.push_back(t.achievement[static_cast<std::size_t>(k)]);
  }
  std::set<std::string> empty;
  while (!todo.empty()) {
    const int v = todo.back();
    todo.pop_back();
    if (seen[static_cast<std::size_t>(v)]) continue;
    seen[static_cast<std::size_t>(v)] = true;
    const auto& nd = t.nodes[static_cast<std::size_t>(v)];
    if (nd.terrain) {
      empty.insert(nd.label);
      continue;
    }
    if (nd.kind == Kind::or_ && nd.children.empty()) empty.insert(nd.label);
    for (int c : nd.children) {
      if (!a.value[static_cast<std::size_t>(c)]) todo.push_back(c);
    }
  }
  a.empty_nodes.assign(empty.begin(), empty.end());
  a.cycles = blocked_cycles(t, a.value);
  return a;
}

PrincipleResult check_feasibility(const WorldConfig& cfg) {
  const auto a = analyze_feasibility(cfg);
  PrincipleResult r;
  r.pass = a.achievable.all();
  if (r.pass) return r;
  for (const auto& c : a.cycles) {
    std::string s = "cycle:";
    for (const auto& n : c) s += " " + n + " ->";
    s += " " + c.front();
    r.witnesses.push_back(s);
  }
  for (const auto& e : a.empty_nodes) {
    if (e.rfind("terrain:", 0) == 0) {
      r.witnesses.push_back("unreachable: " + short_name(e));
    } else {
      r.witnesses.push_back("no way: " + short_name(e));
    }
  }
  for (int k = 0; k < kAchievementCount; ++k) {
    if (!a.achievable[static_cast<std::size_t>(k)]) {
      r.witnesses.push_back("infeasible: " + std::string(name(static_cast<Achievement>(k))));
    }
  }
  return r;
}

PrincipleResult check_accessibility(const WorldConfig& cfg) {
  PrincipleResult r;
  const auto& spawn = cfg.effect(cfg.spawn_material());
  if (!spawn.walkable || spawn.dieable) {
    r.pass = false;
    r.witnesses.push_back(std::string(name(cfg.spawn_material())));
    return r;
  }
  const auto a = analyze_feasibility(cfg);
  for (const auto& rule : cfg.collect) {
    if (!a.reach.touchable[idx(rule.target)]) {
      r.pass = false;
      r.witnesses.push_back(std::string(name(rule.target)));
    }
  }
  return r;
}

std::array<StatEvents, 3> enumerate_stat_events(const WorldConfig& cfg) {
  const auto a = analyze_feasibility(cfg);
  const TechTree t = build_tech_tree(cfg);
  auto holds = [&](const std::string& label) { return a.value[static_cast<std::size_t>(t.find(label))]; };
  std::array<StatEvents, 3> ev;
  auto& health = ev[idx(Stat::health)];
  auto& food = ev[idx(Stat::food)];
  auto& drink = ev[idx(Stat::drink)];
  auto add = [](StatEvents& e, int sign, std::string what) {
    if (sign > 0) e.increase.push_back(std::move(what));
    if (sign < 0) e.decrease.push_back(std::move(what));
  };
  auto sgn = [](int v) { return (v > 0) - (v < 0); };

  food.decrease.push_back("hunger");
  drink.decrease.push_back("thirst");
  health.decrease.push_back("starvation");

  for (const auto& r : cfg.collect) {
    auto it = r.receive.find(Item::drink);
    if (it == r.receive.end() || !holds(collect_label(r.target))) continue;
    const std::string what = "drink from " + std::string(name(r.target));
    if (auto l = as_liquid(r.target)) {
      const auto& d = cfg.drink_spec(*l);
      add(drink, sgn(d.inc_drink_func), what);
      add(health, sgn(d.inc_health_func), what);
      add(food, sgn(d.inc_food_func), what);
    } else {
      add(drink, 1, what);
    }
  }
  for (auto k : kAllNpcKinds) {
    if (!holds(meet_label(k))) continue;
    const auto& s = cfg.npc_spec(k);
    const std::string nm(name(k));
    if (s.eatable) {
      add(food, sgn(s.inc_food_func), "eat " + nm);
      add(drink, sgn(s.inc_thirst_func), "eat " + nm);
      add(health, sgn(s.eat_health_damage_func), "eat " + nm);
    }
    if (s.closable) add(health, sgn(s.closable_health_damage_func), nm + " nearby");
    if (s.arrowable) add(health, sgn(s.arrow_damage_func), nm + " arrow");
  }
  for (auto m : kAllMaterials) {
    const auto& e = cfg.effect(m);
    if (!e.walkable || !a.reach.touchable[idx(m)]) continue;
    if (e.dieable) {
      health.decrease.push_back("step into " + std::string(name(m)));
    } else {
      add(health, sgn(e.walk_health), "walk on " + std::string(name(m)));
    }
  }
  if (!food.increase.empty() && !drink.increase.empty()) health.increase.push_back("regeneration");
  return ev;
}

PrincipleResult check_resource_balance(const WorldConfig& cfg) {
  const auto ev = enumerate_stat_events(cfg);
  PrincipleResult r;
  for (auto s : {Stat::health, Stat::food, Stat::drink}) {
    const auto& e = ev[idx(s)];
    if (!e.decrease.empty() && e.increase.empty()) {
      r.pass = false;
      r.witnesses.push_back(s == Stat::health ? "health" : s == Stat::food ? "food" : "drink");
    }
  }
  return r;
}

namespace {

class SupplySim {
 public:
  SupplySim(const WorldConfig& cfg, const MaterialStock& stock)
      : cfg_(cfg), fa_(analyze_feasibility(cfg)), tree_(build_tech_tree(cfg)) {
    for (auto m : kAllMaterials) stock_[idx(m)] = stock[idx(m)];
    initial_ = stock_;
    for (auto m : kAllMaterials) result.renewable[idx(m)] = renewable(m);
  }

  void run() {
    auto feasible = [&](Achievement a) { return fa_.achievable.test(static_cast<std::size_t>(idx(a))); };
    for (auto i : kAllItems) {
      if (!has_collect_achievement(i) || !feasible(collect_achievement(i))) continue;
      if (received_[idx(i)] < 1 - 1e-9) need(acquire(i, held_[idx(i)] + 1, 0), name(i));
    }
    for (auto p : kAllPlaceables) {
      if (!feasible(place_achievement(p))) continue;
      need(place(p, 0), name(p));
    }
    for (auto t : kToolItems) {
      if (!feasible(make_achievement(t))) continue;
      if (held_[idx(t)] < 1 - 1e-9) need(acquire(t, 1, 0), name(t));
    }
    for (const auto& [m, n] : mined_) result.mined[m] = n;
    result.pass = result.deficits.empty();
  }

  SupplyResult result;

 private:
  // A failure that did not already report a deficit still fails the check.
  void need(bool ok, std::string_view what) {
    if (ok || !result.deficits.empty()) return;
    result.deficits.push_back(std::string(what) + ": no supply plan");
  }

  bool holds(const std::string& label) const {
    return fa_.value[static_cast<std::size_t>(tree_.find(label))];
  }

  bool renewable(Material m) const {
    Material cur = m;
    for (int hop = 0; hop < kMaterialCount; ++hop) {
      const auto* r = cfg_.collect_rule(cur);
      if (!r || !holds(collect_label(cur))) return false;
      cur = r->leaves_material;
      if (cur == m) return true;
    }
    return false;
  }

  static double per_collect(const Yield& y) {
    return y.probability < 1 ? y.amount * y.probability / 2 : y.amount;
  }

  bool place(Placeable p, int depth) {
    const auto& r = cfg_.place_rule(p);
    if (!gather(r.uses, depth)) return false;
    for (const auto& [i, n] : r.uses) spend(i, n);
    if (p == Placeable::table || p == Placeable::furnace) stations_[idx(station_for(p))] = true;
    return true;
  }

  bool gather(const ItemCounts& uses, int depth) {
    for (int round = 0; round < 8; ++round) {
      bool all = true;
      for (const auto& [i, n] : uses) {
        if (held_[idx(i)] + 1e-9 < n && !acquire(i, n, depth + 1)) return false;
      }
      for (const auto& [i, n] : uses) all = all && held_[idx(i)] + 1e-9 >= n;
      if (all) return true;
    }
    return false;
  }

  void spend(Item i, int n) {
    held_[idx(i)] -= n;
    result.demand[i] += n;
  }

  bool acquire(Item item, double target, int depth) {
    if (held_[idx(item)] + 1e-9 >= target) return true;
    if (depth > 24 || failed_[idx(item)]) return false;
    busy_[idx(item)] = true;
    const bool ok = is_tool(item) ? make_until(item, target, depth) : collect_until(item, target, depth);
    busy_[idx(item)] = false;
    return ok;
  }

  bool make_until(Item tool, double target, int depth) {
    const auto& r = cfg_.make_rule(tool);
    if (!holds(make_label(tool))) return false;
    while (held_[idx(tool)] + 1e-9 < target) {
      for (auto s : r.nearby) {
        if (!stations_[idx(s)] && !place(s == Station::table ? Placeable::table : Placeable::furnace, depth + 1)) {
          return false;
        }
      }
      if (!gather(r.uses, depth)) return false;
      for (const auto& [i, n] : r.uses) spend(i, n);
      held_[idx(tool)] += r.gives;
    }
    return true;
  }

  // Best usable source right now: tools in hand first, then renewable, then
  // by yield per collect. Rules whose tools are still being planned are skipped.
  const CollectRule* choose(Item item, bool& stock_blocked) const {
    const CollectRule* best = nullptr;
    std::tuple<bool, bool, double> best_key{};
    stock_blocked = false;
    for (const auto& r : cfg_.collect) {
      auto it = r.receive.find(item);
      if (it == r.receive.end() || !holds(collect_label(r.target))) continue;
      bool in_hand = true, cyclic = false;
      for (const auto& [tool, n] : r.require) {
        const bool have = held_[idx(tool)] + 1e-9 >= n;
        in_hand = in_hand && have;
        cyclic = cyclic || (!have && busy_[idx(tool)]);
      }
      if (cyclic) continue;
      // Supply must strictly exceed demand: the last cell is never taken.
      if (!result.renewable[idx(r.target)] && stock_[idx(r.target)] < 2) {
        stock_blocked = true;
        continue;
      }
      const std::tuple<bool, bool, double> key{in_hand, result.renewable[idx(r.target)], per_collect(it->second)};
      if (!best || key > best_key) {
        best = &r;
        best_key = key;
      }
    }
    return best;
  }

  bool collect_until(Item item, double target, int depth) {
    while (held_[idx(item)] + 1e-9 < target) {
      if (++collects_ > 200000) return false;
      bool stock_blocked = false;
      const CollectRule* pick = choose(item, stock_blocked);
      if (!pick) {
        if (stock_blocked) deficit(item, target);
        return false;
      }
      bool tools = true;
      for (const auto& [tool, n] : pick->require) tools = tools && acquire(tool, n, depth + 1);
      if (!tools) return false;
      // Acquiring tools may have drawn the same source down.
      if (!result.renewable[idx(pick->target)] && stock_[idx(pick->target)] < 2) continue;
      for (const auto& [i, y] : pick->receive) {
        held_[idx(i)] += per_collect(y);
        received_[idx(i)] += per_collect(y);
      }
      ++mined_[pick->target];
      if (!result.renewable[idx(pick->target)]) {
        --stock_[idx(pick->target)];
        ++stock_[idx(pick->leaves_material)];
      }
    }
    return true;
  }

  void deficit(Item item, double target) {
    failed_[idx(item)] = true;
    double supply = 0;
    for (const auto& r : cfg_.collect) {
      auto it = r.receive.find(item);
      if (it != r.receive.end()) supply += initial_[idx(r.target)] * per_collect(it->second);
    }
    const double need = result.demand[item] + target;
    std::ostringstream s;
    s << name(item) << ": need " << need << ", map supplies " << std::floor(supply + 1e-9);
    result.deficits.push_back(s.str());
  }

  const WorldConfig& cfg_;
  FeasibilityAnalysis fa_;
  TechTree tree_;
  std::array<double, kMaterialCount> stock_{};
  std::array<double, kMaterialCount> initial_{};
  std::array<double, kItemCount> held_{};
  std::array<double, kItemCount> received_{};
  std::array<bool, kItemCount> failed_{};
  std::array<bool, kItemCount> busy_{};
  std::array<bool, 3> stations_{};
  std::map<Material, int> mined_;
  long collects_ = 0;
};

}  // namespace

SupplyResult simulate_supply(const WorldConfig& cfg, const MaterialStock& stock) {
  SupplySim sim(cfg, stock);
  sim.run();
  return sim.result;
}

MaterialStock map_stock(const WorldConfig& cfg, std::uint64_t seed) {
  const GameState s = generate_world(cfg, seed);
  MaterialStock out{};
  for (const auto& c : s.grid) ++out[idx(c.material)];
  return out;
}

PrincipleResult check_supply(const WorldConfig& cfg, std::uint64_t seed) {
  PrincipleResult r;
  MaterialStock stock;
  try {
    stock = map_stock(cfg, seed);
  } catch (const GenerationError& e) {
    r.pass = false;
    r.witnesses.push_back(std::string("map generation failed: ") + e.what());
    return r;
  }
  const auto s = simulate_supply(cfg, stock);
  r.pass = s.pass;
  r.witnesses = s.deficits;
  return r;
}

VerificationReport verify(const WorldConfig& cfg, std::uint64_t seed) {
  VerificationReport r;
  r.feasibility = check_feasibility(cfg);
  r.accessibility = check_accessibility(cfg);
  r.balance = check_resource_balance(cfg);
  r.supply = check_supply(cfg, seed);
  return r;
}

std::string report_to_yaml(const VerificationReport& r) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "pass" << YAML::Value << r.pass();
  auto section = [&](const char* key, const PrincipleResult& p) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "pass" << YAML::Value << p.pass;
    out << YAML::Key << "witnesses" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& w : p.witnesses) out << w;
    out << YAML::EndSeq << YAML::EndMap;
  };
  section("feasibility", r.feasibility);
  section("accessibility", r.accessibility);
  section("balance", r.balance);
  section("supply", r.supply);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mars
