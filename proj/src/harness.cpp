#include "mars/harness.hpp"

#include "mars/descriptor.hpp"

namespace mars {

namespace {

class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  std::optional<Action> act(const AgentInput&) override {
    return static_cast<Action>(rng_.below(kActionCount));
  }

 private:
  Rng rng_;
};

}  // namespace

EpisodeResult run_episode(const WorldConfig& cfg, std::uint64_t seed, Agent& agent, const EpisodeLimits& limits,
                          const std::string& world_name) {
  EpisodeResult out;
  GameState s = generate_world(cfg, seed, limits.params);
  auto& t = out.trajectory;
  t.world = world_name;
  t.config_text = serialize_config(cfg);
  t.seed = seed;
  t.agent = agent.name();
  agent.on_episode_start(s);
  Observation obs = observe(s);
  for (int i = 0; i < limits.max_steps && !s.done; ++i) {
    const std::string text = describe(obs).text();
    std::optional<Action> a = agent.act(AgentInput{obs, text, s});
    if (!a) {
      out.log.push_back("tick " + std::to_string(s.tick) + ": invalid action, ran noop");
      a = Action::noop;
    }
    const StepResult r = step(s, *a);
    t.events.push_back(make_event(s, *a, r));
    agent.on_step(*a, r);
    for (auto& line : agent.take_notes()) out.log.push_back("tick " + std::to_string(s.tick) + ": " + line);
    obs = r.observation;
  }
  agent.on_episode_end(t);
  for (auto& line : agent.take_notes()) out.log.push_back(std::move(line));
  return out;
}

std::unique_ptr<Agent> random_agent(std::uint64_t seed) { return std::make_unique<RandomAgent>(seed); }

}  // namespace mars
