#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "mars/harness.hpp"
#include "mars/verifier.hpp"

namespace mars {

namespace {

constexpr std::array<Pos, 4> kDirs = {Pos{-1, 0}, Pos{1, 0}, Pos{0, 1}, Pos{0, -1}};

Action move_toward(Pos d) {
  if (d.x < 0) return Action::move_left;
  if (d.x > 0) return Action::move_right;
  if (d.y > 0) return Action::move_up;
  return Action::move_down;
}

// Rough achievement order; the planner resolves the real dependencies.
constexpr std::array<Achievement, kAchievementCount> kPriority = {
    Achievement::collect_wood,       Achievement::collect_sapling,   Achievement::place_plant,
    Achievement::collect_drink,      Achievement::place_table,       Achievement::make_wood_pickaxe,
    Achievement::make_wood_sword,    Achievement::collect_stone,     Achievement::place_stone,
    Achievement::make_stone_pickaxe, Achievement::make_stone_sword,  Achievement::collect_coal,
    Achievement::place_furnace,      Achievement::collect_iron,      Achievement::make_iron_pickaxe,
    Achievement::make_iron_sword,    Achievement::collect_diamond,   Achievement::kill_cow,
    Achievement::defeat_zombie,      Achievement::defeat_skeleton,   Achievement::eat_plant,
    Achievement::wake_up};

struct Task {
  enum Kind { collect, place, make, attack, near_station, sleep } kind = collect;
  Material material = Material::grass;
  Placeable placeable = Placeable::stone;
  Item tool = Item::wood_pickaxe;
  NpcKind creature = NpcKind::cow;
  Station station = Station::table;

  std::string key() const {
    switch (kind) {
      case collect: return "collect " + std::string(name(material));
      case place: return "place " + std::string(name(placeable));
      case make: return "make " + std::string(name(tool));
      case attack: return "attack " + std::string(name(creature));
      case near_station: return "near " + std::string(name(station));
      default: return "sleep";
    }
  }
};

enum class Need { done, task, blocked };

class OracleAgent : public Agent {
 public:
  explicit OracleAgent(const WorldConfig& cfg) : cfg_(cfg) {
    const auto f = analyze_feasibility(cfg);
    if (!f.achievable.all()) throw std::invalid_argument("oracle needs a world where every achievement is feasible");
  }

  std::string name() const override { return "oracle"; }

  void on_episode_start(const GameState&) override {
    path_.clear();
    path_key_.clear();
    banned_.clear();
    drinking_ = eating_ = false;
    progress_tick_ = 0;
    task_key_.clear();
  }

  std::optional<Action> act(const AgentInput& in) override {
    s_ = &in.state;
    const auto& a = s_->agent;
    if (a.sleeping) return Action::noop;
    track_progress();

    if (auto act = defend()) return act;
    drinking_ = a.drink <= 4 || (drinking_ && a.drink < 8);
    eating_ = a.food <= 4 || (eating_ && a.food < 8);
    if (drinking_) {
      if (auto act = pursue_drink()) return act;
    }
    if (eating_) {
      if (auto act = pursue_food()) return act;
    }
    if (a.energy <= 2 && a.energy < 9) return Action::sleep;

    for (auto goal : kPriority) {
      if (s_->has_unlocked(goal)) continue;
      Task t;
      if (plan_goal(goal, t) != Need::task) continue;
      if (auto act = execute(t)) return act;
    }
    if (a.energy < 9) return Action::sleep;
    return Action::noop;
  }

 private:
  // Items kept on hand beyond recipes so drinking and tools stay available.
  const WorldConfig& cfg_;
  const GameState* s_ = nullptr;
  std::vector<Pos> path_;  // planned positions, front first
  std::vector<Pos> path_dirs_;
  std::string path_key_;
  int path_tick_ = 0;
  std::map<std::string, int> banned_;  // task key -> tick when usable again
  bool drinking_ = false;
  bool eating_ = false;
  std::string task_key_;
  int progress_tick_ = 0;
  Inventory last_inventory_{};
  std::size_t last_unlocks_ = 0;

  const AgentState& me() const { return s_->agent; }
  bool has(const ItemCounts& need) const {
    return std::all_of(need.begin(), need.end(), [&](const auto& p) { return me().count(p.first) >= p.second; });
  }

  void track_progress() {
    if (me().inventory != last_inventory_ || s_->unlocked.count() != last_unlocks_) {
      last_inventory_ = me().inventory;
      last_unlocks_ = s_->unlocked.count();
      progress_tick_ = s_->tick;
    }
  }

  bool banned(const std::string& key) const {
    auto it = banned_.find(key);
    return it != banned_.end() && it->second > s_->tick;
  }

  // ---- survival ----

  std::optional<Action> defend() {
    for (Pos d : kDirs) {
      const Entity* e = s_->entity_at(me().pos + d);
      if (!e) continue;
      const auto& spec = cfg_.npc_spec(e->kind);
      if (spec.closable && spec.closable_health_damage_func < 0 && spec.removable()) {
        if (me().facing == d) return Action::do_;
        return move_toward(d);
      }
    }
    return std::nullopt;
  }

  std::optional<Action> pursue_drink() {
    for (const auto& r : cfg_.collect) {
      auto y = r.receive.find(Item::drink);
      if (y == r.receive.end() || !has(r.require)) continue;
      if (const auto l = as_liquid(r.target)) {
        const auto& d = cfg_.drink_spec(*l);
        if (d.inc_drink_func <= 0 || (d.inc_health_func < 0 && me().health <= 3)) continue;
      }
      Task t;
      t.kind = Task::collect;
      t.material = r.target;
      if (auto act = execute(t)) return act;
    }
    return std::nullopt;
  }

  std::optional<Action> pursue_food() {
    for (auto k : kAllNpcKinds) {
      const auto& spec = cfg_.npc_spec(k);
      if (!spec.eatable || spec.inc_food_func <= 0 || !spec.removable()) continue;
      if (spec.eat_health_damage_func < 0 && me().health <= 3) continue;
      Task t;
      t.kind = Task::attack;
      t.creature = k;
      if (auto act = execute(t)) return act;
    }
    for (const auto& r : cfg_.collect) {
      const auto l = as_liquid(r.target);
      if (!l || !r.receive.count(Item::drink) || !has(r.require)) continue;
      if (cfg_.drink_spec(*l).inc_food_func <= 0) continue;
      Task t;
      t.kind = Task::collect;
      t.material = r.target;
      if (auto act = execute(t)) return act;
    }
    return std::nullopt;
  }

  // ---- planning ----

  Need plan_goal(Achievement goal, Task& out) {
    switch (goal) {
      case Achievement::wake_up:
        if (me().energy >= 9 || (me().energy > 6 && s_->is_night())) return Need::blocked;
        out.kind = Task::sleep;
        return Need::task;
      case Achievement::kill_cow:
      case Achievement::defeat_zombie:
      case Achievement::defeat_skeleton:
      case Achievement::eat_plant: {
        const NpcKind k = goal == Achievement::kill_cow        ? NpcKind::cow
                          : goal == Achievement::defeat_zombie ? NpcKind::zombie
                          : goal == Achievement::defeat_skeleton ? NpcKind::skeleton
                                                                 : NpcKind::plant;
        if (!cfg_.npc_spec(k).removable() && !(k == NpcKind::plant && cfg_.npc_spec(k).eatable)) {
          return Need::blocked;
        }
        if (k == NpcKind::plant && !any_plant()) {
          std::set<Item> visiting;
          return need_place(Placeable::plant, out, visiting);
        }
        if (k == NpcKind::plant && cfg_.npc_spec(k).eatable && !any_ripe_plant()) return Need::blocked;
        out.kind = Task::attack;
        out.creature = k;
        return Need::task;
      }
      default: break;
    }
    std::set<Item> visiting;
    for (auto p : kAllPlaceables) {
      if (place_achievement(p) == goal) return need_place(p, out, visiting);
    }
    for (auto t : kToolItems) {
      if (make_achievement(t) == goal) return need_make(t, out, visiting);
    }
    for (auto i : kAllItems) {
      if (has_collect_achievement(i) && collect_achievement(i) == goal) {
        return need_collect(i, out, visiting);
      }
    }
    return Need::blocked;
  }

  bool any_plant() const {
    return std::any_of(s_->entities.begin(), s_->entities.end(),
                       [](const Entity& e) { return e.kind == NpcKind::plant; });
  }
  bool any_ripe_plant() const {
    return std::any_of(s_->entities.begin(), s_->entities.end(), [&](const Entity& e) {
      return e.kind == NpcKind::plant && e.grown >= s_->params.plant_ripen;
    });
  }

  Need need_item(Item item, int amount, Task& out, std::set<Item>& visiting) {
    if (me().count(item) >= amount) return Need::done;
    if (std::find(kToolItems.begin(), kToolItems.end(), item) != kToolItems.end()) {
      return need_make(item, out, visiting);
    }
    return need_collect(item, out, visiting);
  }

  Need need_all(const ItemCounts& items, Task& out, std::set<Item>& visiting) {
    for (const auto& [i, n] : items) {
      const Need r = need_item(i, n, out, visiting);
      if (r != Need::done) return r;
    }
    return Need::done;
  }

  // Collect `item` once more.
  Need need_collect(Item item, Task& out, std::set<Item>& visiting) {
    if (visiting.count(item)) return Need::blocked;
    visiting.insert(item);
    std::vector<const CollectRule*> rules;
    for (const auto& r : cfg_.collect) {
      if (r.receive.count(item) && material_present(r.target)) rules.push_back(&r);
    }
    // Ready rules first, then sure yields.
    std::stable_sort(rules.begin(), rules.end(), [&](const CollectRule* a, const CollectRule* b) {
      const bool ra = has(a->require), rb = has(b->require);
      if (ra != rb) return ra;
      return a->receive.at(item).probability > b->receive.at(item).probability;
    });
    Need result = Need::blocked;
    for (const CollectRule* r : rules) {
      Task t;
      t.kind = Task::collect;
      t.material = r->target;
      if (banned(t.key())) continue;
      Task sub;
      const Need n = need_all(r->require, sub, visiting);
      if (n == Need::done) {
        out = t;
        result = Need::task;
        break;
      }
      if (n == Need::task) {
        out = sub;
        result = Need::task;
        break;
      }
    }
    visiting.erase(item);
    return result;
  }

  Need need_make(Item tool, Task& out, std::set<Item>& visiting) {
    if (visiting.count(tool)) return Need::blocked;
    visiting.insert(tool);
    const MakeRule& rule = cfg_.make_rule(tool);
    Need r = need_all(rule.uses, out, visiting);
    if (r == Need::done) r = need_stations(rule.nearby, out, visiting);
    if (r == Need::done) {
      out = Task{};
      out.kind = Task::make;
      out.tool = tool;
      r = Need::task;
    }
    visiting.erase(tool);
    return r;
  }

  Need need_place(Placeable p, Task& out, std::set<Item>& visiting) {
    const Need r = need_all(cfg_.place_rule(p).uses, out, visiting);
    if (r != Need::done) return r;
    out = Task{};
    out.kind = Task::place;
    out.placeable = p;
    return banned(out.key()) ? Need::blocked : Need::task;
  }

  // Gather everything first, then walk to an existing first station, then
  // place whatever is still missing next to it.
  Need need_stations(const std::vector<Station>& nearby, Task& out, std::set<Item>& visiting) {
    auto placeable = [](Station st) { return st == Station::table ? Placeable::table : Placeable::furnace; };
    Task go;
    go.kind = Task::near_station;
    bool walk = false;
    if (!nearby.empty()) {
      go.station = nearby[0];
      walk = !station_near(me().pos, nearby[0]) && station_exists(nearby[0]) && !banned(go.key());
    }
    for (std::size_t i = 0; i < nearby.size(); ++i) {
      if (station_near(me().pos, nearby[i]) || (i == 0 && walk)) continue;
      const Need r = need_all(cfg_.place_rule(placeable(nearby[i])).uses, out, visiting);
      if (r != Need::done) return r;
    }
    if (walk) {
      out = go;
      return Need::task;
    }
    for (Station st : nearby) {
      if (!station_near(me().pos, st)) return need_place(placeable(st), out, visiting);
    }
    return Need::done;
  }

  bool station_near(Pos at, Station st) const {
    const int r = s_->params.make_distance;
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) {
        const Pos p = at + Pos{dx, dy};
        if (s_->in_bounds(p) && s_->cell(p).station == st) return true;
      }
    }
    return false;
  }

  bool station_exists(Station st) const {
    return std::any_of(s_->grid.begin(), s_->grid.end(), [&](const Cell& c) { return c.station == st; });
  }

  bool material_present(Material m) const {
    return std::any_of(s_->grid.begin(), s_->grid.end(),
                       [&](const Cell& c) { return c.material == m && c.station == Station::none; });
  }

  // ---- navigation ----

  bool safe_ground(Pos p, bool allow_hurt) const {
    const auto& e = cfg_.effect(s_->cell(p).material);
    return !e.dieable && (allow_hurt || e.walk_health >= 0);
  }

  bool walkable(Pos p, bool allow_hurt) const { return s_->free_cell(p) && safe_ground(p, allow_hurt); }

  // Creatures that cannot walk block for good; walkers only when adjacent.
  bool blocker(Pos p, bool adjacent) const {
    const Entity* e = s_->entity_at(p);
    return e && (adjacent || !cfg_.npc_spec(e->kind).can_walk || e->kind == NpcKind::plant);
  }

  // Whether filling `c` would split the walkable cells around it. Only the four
  // edge neighbours touch `c`; two of them stay joined through the corner
  // between them.
  bool cuts_passage(Pos c, Pos standing) const {
    static constexpr std::array<Pos, 8> ring = {Pos{1, 0},  Pos{1, 1},   Pos{0, 1},  Pos{-1, 1},
                                                Pos{-1, 0}, Pos{-1, -1}, Pos{0, -1}, Pos{1, -1}};
    std::array<bool, 8> open{};
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Pos p = c + ring[i];
      open[i] = p == standing || (s_->in_bounds(p) && s_->cell(p).station == Station::none &&
                                  cfg_.effect(s_->cell(p).material).walkable && safe_ground(p, true));
    }
    int groups = 0;
    for (std::size_t i = 0; i < 8; i += 2) {
      if (!open[i]) continue;
      // Count an edge unless it joins the previous edge through their corner.
      const std::size_t prev_edge = (i + 6) % 8;
      if (!(open[prev_edge] && open[(i + 7) % 8])) ++groups;
    }
    if (groups == 0 && std::all_of(open.begin(), open.end(), [](bool b) { return b; })) groups = 1;
    // All four edges joined in a full loop count once.
    bool loop = true;
    for (std::size_t i = 0; i < 8; ++i) loop = loop && open[i];
    if (loop) groups = 1;
    return groups > 1;
  }

  // A cell the agent can clear with `do` and then walk onto.
  bool minable(Pos p) const {
    if (!s_->in_bounds(p) || s_->entity_at(p) || s_->cell(p).station != Station::none) return false;
    const CollectRule* r = cfg_.collect_rule(s_->cell(p).material);
    if (!r || !r->leaves_object.empty() || !has(r->require)) return false;
    const auto& e = cfg_.effect(r->leaves_material);
    return e.walkable && !e.dieable && e.walk_health >= 0;
  }

  bool goal_reached(const Task& t, Pos pos, Pos facing) const {
    const Pos f = pos + facing;
    if (t.kind == Task::near_station) return station_near(pos, t.station);
    if (!s_->in_bounds(f)) return false;
    const Cell& c = s_->cell(f);
    const Entity* e = s_->entity_at(f);
    switch (t.kind) {
      case Task::collect: return !e && c.station == Station::none && c.material == t.material && f != me().pos;
      case Task::place:
        return !e && c.station == Station::none && cfg_.place_rule(t.placeable).allows(c.material) &&
               f != me().pos && !cuts_passage(f, pos);
      case Task::attack:
        if (!e || e->kind != t.creature) return false;
        if (t.creature == NpcKind::plant && cfg_.npc_spec(NpcKind::plant).eatable) {
          return e->grown >= s_->params.plant_ripen;
        }
        return true;
      default: return false;
    }
  }

  // Dijkstra over (position, facing). Returns the first action, or nullopt if
  // the goal is unreachable.
  std::optional<Action> navigate(const Task& t) {
    if (goal_reached(t, me().pos, me().facing)) return std::nullopt;
    const std::string key = t.key();
    // Follow the cached plan while it still matches.
    if (key == path_key_ && !path_.empty() && s_->tick - path_tick_ < 40) {
      if (auto a = follow(t)) return a;
    }
    path_.clear();
    path_dirs_.clear();
    path_key_.clear();
    for (bool hurt : {false, true}) {
      if (hurt && me().health < 3) break;
      if (search(t, hurt)) {
        path_key_ = key;
        path_tick_ = s_->tick;
        if (auto a = follow(t)) return a;
      }
    }
    return std::nullopt;
  }

  std::optional<Action> follow(const Task& t) {
    (void)t;
    while (!path_.empty() && path_.front() == me().pos && path_dirs_.front() == me().facing) {
      path_.erase(path_.begin());
      path_dirs_.erase(path_dirs_.begin());
    }
    if (path_.empty()) return std::nullopt;
    const Pos next = path_.front();
    const Pos dir = path_dirs_.front();
    if (next == me().pos) {
      // A turn: only valid while the cell ahead still blocks.
      if (s_->free_cell(me().pos + dir)) return std::nullopt;
      return move_toward(dir);
    }
    if (next - me().pos != dir) return std::nullopt;
    if (walkable(next, true)) return move_toward(dir);
    if (!minable(next)) return std::nullopt;
    if (me().facing == dir) return Action::do_;
    return move_toward(dir);
  }

  bool search(const Task& t, bool hurt) {
    const int n = s_->size();
    auto id = [&](Pos p, int d) { return (p.x * n + p.y) * 4 + d; };
    const int states = n * n * 4;
    std::vector<int> dist(static_cast<std::size_t>(states), -1);
    std::vector<int> prev(static_cast<std::size_t>(states), -1);
    using Item_ = std::pair<int, int>;
    std::priority_queue<Item_, std::vector<Item_>, std::greater<>> q;
    int start_dir = 0;
    for (int d = 0; d < 4; ++d) {
      if (kDirs[static_cast<std::size_t>(d)] == me().facing) start_dir = d;
    }
    const int start = id(me().pos, start_dir);
    dist[static_cast<std::size_t>(start)] = 0;
    q.push({0, start});
    int found = -1;
    const int limit = 5000;
    while (!q.empty()) {
      auto [c, u] = q.top();
      q.pop();
      if (c != dist[static_cast<std::size_t>(u)]) continue;
      if (c > limit) break;
      const Pos p{(u / 4) / n, (u / 4) % n};
      const Pos f = kDirs[static_cast<std::size_t>(u % 4)];
      if (goal_reached(t, p, f)) {
        found = u;
        break;
      }
      for (int d = 0; d < 4; ++d) {
        const Pos dir = kDirs[static_cast<std::size_t>(d)];
        const Pos np = p + dir;
        int v;
        int cost;
        const bool at_start = p == me().pos;
        // Creatures and stations block; distant creatures move, so only
        // those next to the start are treated as obstacles.
        const bool open = s_->in_bounds(np) && s_->cell(np).station == Station::none &&
                          cfg_.effect(s_->cell(np).material).walkable && safe_ground(np, hurt) &&
                          !blocker(np, at_start);
        if (open) {
          v = id(np, d);
          cost = 1 - 6 * std::min(0, cfg_.effect(s_->cell(np).material).walk_health);
        } else if (minable(np)) {
          // Turn, clear, step.
          v = id(np, d);
          cost = 4;
        } else {
          v = id(p, d);
          cost = 1;
        }
        const int nc = c + cost;
        if (dist[static_cast<std::size_t>(v)] == -1 || nc < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = nc;
          prev[static_cast<std::size_t>(v)] = u;
          q.push({nc, v});
        }
        // Facing a minable cell without stepping in also counts as a turn.
        if (!open && v != id(p, d)) {
          const int w = id(p, d);
          if (dist[static_cast<std::size_t>(w)] == -1 || c + 1 < dist[static_cast<std::size_t>(w)]) {
            dist[static_cast<std::size_t>(w)] = c + 1;
            prev[static_cast<std::size_t>(w)] = u;
            q.push({c + 1, w});
          }
        }
      }
    }
    if (found < 0) return false;
    std::vector<int> chain;
    for (int u = found; u != start; u = prev[static_cast<std::size_t>(u)]) chain.push_back(u);
    std::reverse(chain.begin(), chain.end());
    for (int u : chain) {
      path_.push_back({(u / 4) / n, (u / 4) % n});
      path_dirs_.push_back(kDirs[static_cast<std::size_t>(u % 4)]);
    }
    return true;
  }

  std::optional<Action> execute(const Task& t) {
    const std::string key = t.key();
    if (banned(key)) return std::nullopt;
    if (key != task_key_) {
      task_key_ = key;
      progress_tick_ = s_->tick;
    } else if (s_->tick - progress_tick_ > 400) {
      banned_[key] = s_->tick + 600;
      task_key_.clear();
      return std::nullopt;
    }
    if (t.kind == Task::sleep) return Action::sleep;
    if (t.kind == Task::make) {
      if (!station_near(me().pos, Station::table) && cfg_.make_rule(t.tool).needs(Station::table)) return std::nullopt;
      return make_action(t.tool);
    }
    if (goal_reached(t, me().pos, me().facing)) {
      if (t.kind == Task::place) return place_action(t.placeable);
      if (t.kind == Task::near_station) return std::nullopt;
      return Action::do_;
    }
    if (auto a = navigate(t)) return a;
    banned_[key] = s_->tick + 30;
    return std::nullopt;
  }
};

}  // namespace

std::unique_ptr<Agent> oracle_agent(const WorldConfig& cfg) { return std::make_unique<OracleAgent>(cfg); }

}  // namespace mars
