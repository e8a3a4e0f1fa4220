#include <sstream>

#include "json.hpp"
#include "mars/engine.hpp"

namespace mars {

using nlohmann::json;

int Trajectory::total_reward_tenths() const {
  int sum = 0;
  for (const auto& e : events) sum += e.reward_tenths;
  return sum;
}

StepEvent make_event(const GameState& after, Action action, const StepResult& r) {
  StepEvent e;
  e.tick = after.tick;
  e.action = action;
  e.reward_tenths = r.reward_tenths;
  e.deltas = r.info.deltas;
  e.unlocked = r.info.newly_unlocked;
  e.rng_draws = after.rng.draws();
  e.done = r.done;
  e.death_cause = r.info.death_cause;
  return e;
}

std::string to_jsonl(const Trajectory& t) {
  std::ostringstream out;
  json head = {{"type", "header"},
               {"world", t.world},
               {"seed", t.seed},
               {"agent", t.agent},
               {"config", t.config_text}};
  out << head.dump() << "\n";
  for (const auto& e : t.events) {
    json unlocked = json::array();
    for (auto a : e.unlocked) unlocked.push_back(std::string(name(a)));
    json j = {{"type", "step"},
              {"tick", e.tick},
              {"action", std::string(name(e.action))},
              {"reward_tenths", e.reward_tenths},
              {"health", e.deltas.health},
              {"food", e.deltas.food},
              {"drink", e.deltas.drink},
              {"energy", e.deltas.energy},
              {"unlocked", unlocked},
              {"rng_draws", e.rng_draws},
              {"done", e.done}};
    if (!e.death_cause.empty()) j["death_cause"] = e.death_cause;
    out << j.dump() << "\n";
  }
  return out.str();
}

Trajectory from_jsonl(const std::string& text) {
  Trajectory t;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "header") {
        if (header) throw std::runtime_error("duplicate header");
        header = true;
        t.world = j.at("world");
        t.seed = j.at("seed");
        t.agent = j.value("agent", "");
        t.config_text = j.at("config");
        continue;
      }
      if (type != "step" || !header) throw std::runtime_error("unexpected record");
      StepEvent e;
      e.tick = j.at("tick");
      auto action = parse_action(j.at("action").get<std::string>());
      if (!action) throw std::runtime_error("unknown action");
      e.action = *action;
      e.reward_tenths = j.at("reward_tenths");
      e.deltas = {j.at("health"), j.at("food"), j.at("drink"), j.at("energy")};
      for (const auto& a : j.at("unlocked")) {
        auto ach = parse_achievement(a.get<std::string>());
        if (!ach) throw std::runtime_error("unknown achievement");
        e.unlocked.push_back(*ach);
      }
      e.rng_draws = j.at("rng_draws");
      e.done = j.at("done");
      e.death_cause = j.value("death_cause", "");
      t.events.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw std::runtime_error("corrupt trajectory at line " + std::to_string(lineno) + ": " + ex.what());
  } catch (const std::runtime_error& ex) {
    throw std::runtime_error("corrupt trajectory at line " + std::to_string(lineno) + ": " + ex.what());
  }
  if (!header) throw std::runtime_error("corrupt trajectory: missing header");
  return t;
}

bool replay_matches(const Trajectory& t, const EngineParams& params) {
  const WorldConfig cfg = parse_config(t.config_text);
  GameState s = generate_world(cfg, t.seed, params);
  for (const auto& recorded : t.events) {
    if (s.done) return false;
    StepResult r = step(s, recorded.action);
    if (!(make_event(s, recorded.action, r) == recorded)) return false;
  }
  return true;
}

}  // namespace mars
