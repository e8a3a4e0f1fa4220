#include "mars/engine.hpp"

#include <algorithm>

namespace mars {

namespace {

int clamp9(int v) { return std::clamp(v, 0, 9); }

int sign(int v) { return (v > 0) - (v < 0); }

void unlock(GameState& s, Achievement a, std::vector<Achievement>& unlocks) {
  if (s.unlocked.test(idx(a))) return;
  s.unlocked.set(idx(a));
  unlocks.push_back(a);
}

void add_item(AgentState& agent, Item item, int amount) {
  auto& slot = agent.inventory[idx(item)];
  slot = clamp9(slot + amount);
}

bool has_all(const AgentState& agent, const ItemCounts& needs) {
  for (const auto& [item, n] : needs) {
    if (item == Item::drink || agent.count(item) < n) return false;
  }
  return true;
}

void consume(AgentState& agent, const ItemCounts& uses) {
  for (const auto& [item, n] : uses) add_item(agent, item, -n);
}

bool ripe(const GameState& s, const Entity& e) {
  return e.kind == NpcKind::plant && e.grown >= s.params.plant_ripen;
}

void remove_entity(GameState& s, int id) {
  s.entities.erase(std::remove_if(s.entities.begin(), s.entities.end(),
                                  [&](const Entity& e) { return e.id == id; }),
                   s.entities.end());
}

void eat(GameState& s, const Entity& e) {
  const auto& spec = s.config().npc_spec(e.kind);
  const int gain = s.params.eat_gain[idx(e.kind)];
  auto& a = s.agent;
  a.food = clamp9(a.food + spec.inc_food_func * gain);
  a.drink = clamp9(a.drink + spec.inc_thirst_func * gain);
  a.health = clamp9(a.health + spec.eat_health_damage_func);
}

void interact_creature(GameState& s, Entity& e, std::vector<Achievement>& unlocks) {
  const auto& spec = s.config().npc_spec(e.kind);
  if (e.kind == NpcKind::plant && spec.eatable && ripe(s, e)) {
    eat(s, e);
    e.grown = 0;
    unlock(s, Achievement::eat_plant, unlocks);
    return;
  }
  if (e.kind == NpcKind::plant && !spec.defeatable) return;
  const int damage = spec.attackable ? s.params.sword_damage[sword_level(s.agent)] : 1;
  e.health -= damage;
  if (e.health > 0) return;
  if (!spec.removable() || (e.kind == NpcKind::plant && !spec.defeatable)) {
    e.health = s.params.npc_health[idx(e.kind)];
    return;
  }
  const Entity gone = e;
  remove_entity(s, e.id);
  if (spec.eatable && gone.kind != NpcKind::plant) eat(s, gone);
  unlock(s, npc_achievement(gone.kind), unlocks);
}

void collect(GameState& s, Pos target, std::vector<Achievement>& unlocks) {
  Cell& cell = s.cell(target);
  const CollectRule* rule = s.config().collect_rule(cell.material);
  if (!rule || !has_all(s.agent, rule->require)) return;
  auto& a = s.agent;
  const auto liquid = as_liquid(cell.material);
  for (const auto& [item, y] : rule->receive) {
    if (!s.rng.chance(y.probability)) continue;
    if (item == Item::drink) {
      if (liquid) {
        const auto& d = s.config().drink_spec(*liquid);
        a.drink = clamp9(a.drink + d.inc_drink_func * y.amount);
        a.health = clamp9(a.health + d.inc_health_func * y.amount);
        a.food = clamp9(a.food + d.inc_food_func * y.amount);
      } else {
        a.drink = clamp9(a.drink + y.amount);
      }
    } else {
      add_item(a, item, y.amount);
    }
    if (has_collect_achievement(item)) unlock(s, collect_achievement(item), unlocks);
  }
  cell.material = rule->leaves_material;
  for (const auto& [kind, p] : rule->leaves_object) {
    if (!s.rng.chance(p)) continue;
    if (auto spot = nearest_free(s, target)) spawn_entity(s, kind, *spot);
  }
}

bool arrow_passable(const GameState& s, Pos p) {
  if (!s.in_bounds(p)) return false;
  const Cell& c = s.cell(p);
  if (c.station != Station::none || s.entity_at(p)) return false;
  return s.config().effect(c.material).walkable || is_liquid(c.material);
}

bool creature_can_enter(const GameState& s, Pos p) {
  return s.free_cell(p) && !s.config().effect(s.cell(p).material).dieable;
}

void move_creature(GameState& s, Entity& e, Pos dir) {
  const Pos to = e.pos + dir;
  if (creature_can_enter(s, to)) e.pos = to;
}

void tick_arrows(GameState& s) {
  std::vector<Arrow> keep;
  for (Arrow ar : s.arrows) {
    const Pos next = ar.pos + ar.dir;
    if (next == s.agent.pos) {
      const auto& spec = s.config().npc_spec(ar.shooter);
      s.agent.health = clamp9(s.agent.health + spec.arrow_damage_func);
      continue;
    }
    const bool blocked = std::any_of(keep.begin(), keep.end(), [&](const Arrow& o) { return o.pos == next; });
    if (!arrow_passable(s, next) || blocked) continue;
    ar.pos = next;
    keep.push_back(ar);
  }
  s.arrows = std::move(keep);
}

void shoot(GameState& s, Entity& e) {
  const Pos d = s.agent.pos - e.pos;
  if (d.x != 0 && d.y != 0) return;
  const int dist = std::abs(d.x) + std::abs(d.y);
  if (dist == 0 || dist > s.params.arrow_range) return;
  const Pos dir{sign(d.x), sign(d.y)};
  for (Pos p = e.pos + dir; p != s.agent.pos; p = p + dir) {
    if (!arrow_passable(s, p)) return;
  }
  if (!s.rng.chance(s.params.arrow_prob)) return;
  e.reload = s.params.arrow_reload;
  const Pos spot = e.pos + dir;
  if (spot == s.agent.pos) {
    const auto& spec = s.config().npc_spec(e.kind);
    s.agent.health = clamp9(s.agent.health + spec.arrow_damage_func);
    return;
  }
  if (std::any_of(s.arrows.begin(), s.arrows.end(), [&](const Arrow& a) { return a.pos == spot; })) return;
  s.arrows.push_back({s.next_id++, spot, dir, e.kind});
}

}  // namespace

Pos direction_of(Action a) {
  switch (a) {
    case Action::move_left: return {-1, 0};
    case Action::move_right: return {1, 0};
    case Action::move_up: return {0, 1};
    case Action::move_down: return {0, -1};
    default: return {0, 0};
  }
}

Entity* GameState::entity_at(Pos p) {
  for (auto& e : entities) {
    if (e.pos == p) return &e;
  }
  return nullptr;
}

const Entity* GameState::entity_at(Pos p) const {
  for (const auto& e : entities) {
    if (e.pos == p) return &e;
  }
  return nullptr;
}

const Arrow* GameState::arrow_at(Pos p) const {
  for (const auto& a : arrows) {
    if (a.pos == p) return &a;
  }
  return nullptr;
}

bool GameState::free_cell(Pos p) const {
  if (!in_bounds(p) || p == agent.pos) return false;
  const Cell& c = cell(p);
  if (c.station != Station::none || !config().effect(c.material).walkable) return false;
  return entity_at(p) == nullptr;
}

bool GameState::is_night() const {
  return tick % params.daylight_period >= params.night_start;
}

bool GameState::operator==(const GameState& o) const {
  return *cfg == *o.cfg && params == o.params && seed == o.seed && grid == o.grid &&
         agent == o.agent && entities == o.entities && arrows == o.arrows &&
         next_id == o.next_id && tick == o.tick && rng == o.rng && unlocked == o.unlocked &&
         last_action == o.last_action && done == o.done && death_cause == o.death_cause;
}

int sword_level(const AgentState& agent) {
  if (agent.count(Item::iron_sword) > 0) return 3;
  if (agent.count(Item::stone_sword) > 0) return 2;
  if (agent.count(Item::wood_sword) > 0) return 1;
  return 0;
}

int spawn_entity(GameState& s, NpcKind kind, Pos pos) {
  Entity e;
  e.id = s.next_id++;
  e.kind = kind;
  e.pos = pos;
  e.health = s.params.npc_health[idx(kind)];
  s.entities.push_back(e);
  return e.id;
}

std::optional<Pos> nearest_free(const GameState& s, Pos from, int max_radius) {
  for (int r = 0; r <= max_radius; ++r) {
    std::optional<Pos> best;
    int best_d = 0;
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        Pos p{from.x + dx, from.y + dy};
        if (!creature_can_enter(s, p)) continue;
        const int d = dx * dx + dy * dy;
        if (!best || d < best_d) {
          best = p;
          best_d = d;
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

void apply_move(GameState& s, Pos dir) {
  auto& a = s.agent;
  a.facing = dir;
  const Pos to = a.pos + dir;
  if (!s.free_cell(to)) return;
  a.pos = to;
  const auto& e = s.config().effect(s.cell(to).material);
  if (e.dieable) {
    a.health = 0;
    s.death_cause = "stepped into " + std::string(name(s.cell(to).material));
    return;
  }
  a.health = clamp9(a.health + e.walk_health);
}

void apply_do(GameState& s, std::vector<Achievement>& unlocks) {
  const Pos target = s.front();
  if (!s.in_bounds(target)) return;
  if (Entity* e = s.entity_at(target)) {
    interact_creature(s, *e, unlocks);
    return;
  }
  if (s.cell(target).station != Station::none) return;
  collect(s, target, unlocks);
}

void apply_place(GameState& s, Placeable p, std::vector<Achievement>& unlocks) {
  const PlaceRule& rule = s.config().place_rule(p);
  const Pos target = s.front();
  if (!s.in_bounds(target) || s.entity_at(target)) return;
  Cell& cell = s.cell(target);
  if (cell.station != Station::none || !rule.allows(cell.material)) return;
  if (!has_all(s.agent, rule.uses)) return;
  consume(s.agent, rule.uses);
  if (rule.kind == PlaceKind::object) {
    spawn_entity(s, NpcKind::plant, target);
  } else if (p == Placeable::table) {
    cell.station = Station::table;
  } else if (p == Placeable::furnace) {
    cell.station = Station::furnace;
  } else {
    cell.material = Material::stone;
  }
  s.arrows.erase(std::remove_if(s.arrows.begin(), s.arrows.end(),
                                [&](const Arrow& a) { return a.pos == target; }),
                 s.arrows.end());
  unlock(s, place_achievement(p), unlocks);
}

void apply_make(GameState& s, Item tool, std::vector<Achievement>& unlocks) {
  const MakeRule& rule = s.config().make_rule(tool);
  if (!has_all(s.agent, rule.uses)) return;
  const int r = s.params.make_distance;
  for (Station need : rule.nearby) {
    bool found = false;
    for (int dx = -r; dx <= r && !found; ++dx) {
      for (int dy = -r; dy <= r && !found; ++dy) {
        Pos p = s.agent.pos + Pos{dx, dy};
        found = s.in_bounds(p) && s.cell(p).station == need;
      }
    }
    if (!found) return;
  }
  consume(s.agent, rule.uses);
  add_item(s.agent, tool, rule.gives);
  unlock(s, make_achievement(tool), unlocks);
}

void npc_tick(GameState& s) {
  tick_arrows(s);
  std::vector<int> ids;
  ids.reserve(s.entities.size());
  for (const auto& e : s.entities) ids.push_back(e.id);
  for (int id : ids) {
    auto it = std::find_if(s.entities.begin(), s.entities.end(), [&](const Entity& e) { return e.id == id; });
    if (it == s.entities.end()) continue;
    Entity& e = *it;
    const auto& spec = s.config().npc_spec(e.kind);
    if (e.kind == NpcKind::plant && e.grown < s.params.plant_ripen) ++e.grown;
    if (spec.can_walk) {
      const Pos d = s.agent.pos - e.pos;
      const bool near = chebyshev(s.agent.pos, e.pos) <= s.params.chase_radius;
      if (spec.closable && near && s.rng.chance(s.params.chase_prob)) {
        Pos dir = std::abs(d.x) >= std::abs(d.y) ? Pos{sign(d.x), 0} : Pos{0, sign(d.y)};
        move_creature(s, e, dir);
      } else if (s.rng.chance(s.params.wander_prob)) {
        static constexpr std::array<Pos, 4> dirs = {Pos{-1, 0}, Pos{1, 0}, Pos{0, 1}, Pos{0, -1}};
        move_creature(s, e, dirs[s.rng.below(4)]);
      }
    }
    if (spec.closable) {
      if (e.cooldown > 0) {
        --e.cooldown;
      } else {
        const Pos d = s.agent.pos - e.pos;
        if (std::abs(d.x) + std::abs(d.y) == 1) {
          s.agent.health = clamp9(s.agent.health + spec.closable_health_damage_func);
          e.cooldown = s.params.attack_cooldown;
        }
      }
    }
    if (spec.arrowable) {
      if (e.reload > 0) {
        --e.reload;
      } else {
        shoot(s, e);
      }
    }
  }
}

void stat_tick(GameState& s, std::vector<Achievement>& unlocks) {
  auto& a = s.agent;
  const auto& p = s.params;
  a.hunger += a.sleeping ? 1 : 2;
  if (a.hunger > 2 * p.hunger_limit) {
    a.hunger = 0;
    a.food = clamp9(a.food - 1);
  }
  a.thirst += a.sleeping ? 1 : 2;
  if (a.thirst > 2 * p.thirst_limit) {
    a.thirst = 0;
    a.drink = clamp9(a.drink - 1);
  }
  if (a.sleeping) {
    a.fatigue = std::min(a.fatigue - 1, 0);
  } else {
    a.fatigue += 1;
  }
  if (a.fatigue < p.fatigue_low) {
    a.fatigue = 0;
    a.energy = clamp9(a.energy + 1);
  }
  if (a.fatigue > p.fatigue_high) {
    a.fatigue = 0;
    a.energy = clamp9(a.energy - 1);
  }
  const bool needs_met = a.food > 0 && a.drink > 0 && (a.energy > 0 || a.sleeping);
  if (needs_met) {
    a.recover += a.sleeping ? 4 : 2;
  } else {
    a.recover -= a.sleeping ? 1 : 2;
  }
  if (a.recover > 2 * p.recover_high) {
    a.recover = 0;
    a.health = clamp9(a.health + 1);
  }
  if (a.recover < 2 * p.recover_low) {
    a.recover = 0;
    a.health = clamp9(a.health - 1);
  }
  if (a.sleeping && a.energy >= 9) {
    a.sleeping = false;
    unlock(s, Achievement::wake_up, unlocks);
  }
}

void balance_creatures(GameState& s) {
  const auto& p = s.params;
  const int chunks = (s.size() + p.chunk_size - 1) / p.chunk_size;
  const auto& maxima = s.is_night() ? p.chunk_max_night : p.chunk_max_day;
  for (int cx = 0; cx < chunks; ++cx) {
    for (int cy = 0; cy < chunks; ++cy) {
      const int x0 = cx * p.chunk_size;
      const int y0 = cy * p.chunk_size;
      const int x1 = std::min(x0 + p.chunk_size, s.size());
      const int y1 = std::min(y0 + p.chunk_size, s.size());
      for (auto kind : {NpcKind::cow, NpcKind::zombie, NpcKind::skeleton}) {
        std::vector<int> members;
        for (const auto& e : s.entities) {
          if (e.kind == kind && e.pos.x >= x0 && e.pos.x < x1 && e.pos.y >= y0 && e.pos.y < y1) {
            members.push_back(e.id);
          }
        }
        const int count = static_cast<int>(members.size());
        const int max = maxima[idx(kind)];
        if (count < max && s.rng.chance(p.spawn_prob)) {
          Pos at{s.rng.range(x0, x1 - 1), s.rng.range(y0, y1 - 1)};
          if (s.cell(at).material == creature_host(s.config(), kind) && creature_can_enter(s, at) &&
              chebyshev(at, s.agent.pos) >= p.spawn_min_distance) {
            spawn_entity(s, kind, at);
          }
        } else if (count > max && s.rng.chance(p.despawn_prob)) {
          const int id = members[s.rng.below(members.size())];
          const Entity* e = nullptr;
          for (const auto& x : s.entities) {
            if (x.id == id) e = &x;
          }
          if (e && chebyshev(e->pos, s.agent.pos) >= p.despawn_distance) remove_entity(s, id);
        }
      }
    }
  }
}

Observation observe(const GameState& s) {
  Observation o;
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -4; dx <= 4; ++dx) {
      ViewCell& v = o.at(dx, dy);
      const Pos p = s.agent.pos + Pos{dx, dy};
      if (!s.in_bounds(p)) continue;
      v.in_bounds = true;
      v.material = s.cell(p).material;
      v.station = s.cell(p).station;
      if (const Entity* e = s.entity_at(p)) {
        v.creature = e->kind;
        v.ripe = ripe(s, *e);
      }
      v.arrow = s.arrow_at(p) != nullptr;
    }
  }
  const auto& a = s.agent;
  o.pos = a.pos;
  o.facing = a.facing;
  o.health = a.health;
  o.food = a.food;
  o.drink = a.drink;
  o.energy = a.energy;
  o.inventory = a.inventory;
  o.last_action = s.last_action;
  o.sleeping = a.sleeping;
  o.tick = s.tick;
  return o;
}

StepResult step(GameState& s, Action action) {
  if (s.done) throw EpisodeFinished();
  const AgentState before = s.agent;
  std::vector<Achievement> unlocks;
  s.last_action = action;
  const Action act = s.agent.sleeping ? Action::noop : action;

  switch (act) {
    case Action::noop: break;
    case Action::move_left:
    case Action::move_right:
    case Action::move_up:
    case Action::move_down: apply_move(s, direction_of(act)); break;
    case Action::do_: apply_do(s, unlocks); break;
    case Action::sleep:
      if (s.agent.energy < 9) s.agent.sleeping = true;
      break;
    default:
      if (auto p = placed_by(act)) {
        apply_place(s, *p, unlocks);
      } else if (auto t = made_by(act)) {
        apply_make(s, *t, unlocks);
      }
      break;
  }

  if (s.agent.health > 0) {
    npc_tick(s);
    stat_tick(s, unlocks);
  }
  ++s.tick;
  if (s.agent.health > 0 && s.tick % s.params.balance_interval == 0) balance_creatures(s);

  if (s.agent.health <= 0) {
    s.done = true;
    if (s.death_cause.empty()) s.death_cause = "health";
  } else if (s.tick >= s.params.episode_limit) {
    s.done = true;
  }

  StepResult r;
  r.info.deltas = {s.agent.health - before.health, s.agent.food - before.food,
                   s.agent.drink - before.drink, s.agent.energy - before.energy};
  r.info.newly_unlocked = std::move(unlocks);
  r.info.death_cause = s.death_cause;
  r.reward_tenths = 10 * static_cast<int>(r.info.newly_unlocked.size()) + r.info.deltas.health;
  r.done = s.done;
  r.observation = observe(s);
  return r;
}

}  // namespace mars
