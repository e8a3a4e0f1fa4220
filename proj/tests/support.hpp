#pragma once

#include "mars/engine.hpp"

namespace mars::testing {

// A quiet world: uniform ground, no creatures, no balancing, agent mid-map
// facing right.
inline GameState flat_state(const WorldConfig& cfg, Material ground = Material::grass) {
  EngineParams p;
  p.spawn_prob = 0;
  GameState s = generate_world(cfg, 1, p);
  for (auto& c : s.grid) c = {ground, Station::none};
  s.entities.clear();
  s.arrows.clear();
  s.agent = AgentState{};
  s.agent.pos = {32, 32};
  s.agent.facing = {1, 0};
  return s;
}

inline void put(GameState& s, Pos offset, Material m) { s.cell(s.agent.pos + offset).material = m; }

}  // namespace mars::testing
