#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mars/engine.hpp"

namespace mars {

// What an agent sees each step. `state` is the full game state; only the
// oracle reads it.
struct AgentInput {
  const Observation& obs;
  const std::string& text;
  const GameState& state;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual void on_episode_start(const GameState&) {}
  // std::nullopt is an invalid action; the harness runs noop instead.
  virtual std::optional<Action> act(const AgentInput& in) = 0;
  virtual void on_step(Action, const StepResult&) {}
  virtual void on_episode_end(const Trajectory&) {}

  // Log lines written since the last call.
  std::vector<std::string> take_notes() { return std::exchange(notes_, {}); }

 protected:
  void note(std::string line) { notes_.push_back(std::move(line)); }

 private:
  std::vector<std::string> notes_;
};

struct EpisodeLimits {
  int max_steps = 10000;
  EngineParams params;
};

struct EpisodeResult {
  Trajectory trajectory;
  std::vector<std::string> log;  // coerced actions and agent notes
};

EpisodeResult run_episode(const WorldConfig& cfg, std::uint64_t seed, Agent& agent, const EpisodeLimits& limits = {},
                          const std::string& world_name = "");

// Uniform over all actions from a seeded stream.
std::unique_ptr<Agent> random_agent(std::uint64_t seed);

// Plans from the rules and the full map. Throws std::invalid_argument when
// the config has an infeasible achievement.
std::unique_ptr<Agent> oracle_agent(const WorldConfig& cfg);

}  // namespace mars
