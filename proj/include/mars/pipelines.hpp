#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mars/descriptor.hpp"
#include "mars/gateway.hpp"
#include "mars/harness.hpp"
#include "mars/world_config.hpp"

namespace mars {

struct PipelineParams {
  int history_budget = 3896;  // tokens
  int history_steps = 10;     // observations
  int subgoal_timeout = 100;  // engine steps
  int rule_budget = 1024;     // tokens of rule text per prompt
  int max_calls_per_step = 8;
  int max_replans = 2;
  double temperature = 0.7;
  Tokenizer tok = pretoken_count;
};

// Prompt template text by name ("react", "planner", ...).
std::string prompt_template(std::string_view name);
// Replaces each {key}; throws std::invalid_argument on a slot without a value.
std::string fill_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values);

// An observation step is one user message.
int history_tokens(const std::vector<ChatMessage>& msgs, const Tokenizer& tok = pretoken_count);
// Longest suffix within `budget` tokens and `max_steps` user messages,
// starting at a user message.
std::vector<ChatMessage> trim_history(const std::vector<ChatMessage>& msgs, int budget, int max_steps = 10,
                                      const Tokenizer& tok = pretoken_count);
// True once either bound is exceeded.
bool reflexion_due(const std::vector<ChatMessage>& msgs, int budget, int max_steps,
                   const Tokenizer& tok = pretoken_count);

// Accepts "move_left", "move\_left", "Move Left", "do".
std::optional<Action> parse_action_text(std::string_view s);

struct ReactReply {
  enum class Kind { think, action, invalid };
  Kind kind = Kind::invalid;
  std::string text;
  std::optional<Action> action;
};
ReactReply parse_react(std::string_view completion);

struct Subgoal {
  enum class Kind { mine, attack, sleep, place, make, explore };
  Kind kind = Kind::sleep;
  std::string target;  // block, creature, tool or direction
  int amount = 1;      // count, or steps for explore

  std::string text() const;  // mine("tree", 1)
  bool operator==(const Subgoal&) const = default;
};
std::optional<Subgoal> parse_subgoal(std::string_view s);
// Every subgoal call in the text, or nullopt when none is found or one is invalid.
std::optional<std::vector<Subgoal>> parse_plan(std::string_view text);

struct SkillKey {
  Achievement task = Achievement::collect_wood;
  Inventory init_inventory{};
  bool table_in_view = false;
  bool furnace_in_view = false;

  bool operator==(const SkillKey&) const = default;
};
SkillKey skill_key(Achievement task, const Observation& obs);

struct SkillRecord {
  SkillKey key;
  std::vector<Subgoal> plan;

  bool operator==(const SkillRecord&) const = default;
};

class SkillLibrary {
 public:
  const SkillRecord* find(const SkillKey& key) const;
  // Replaces a record with the same key.
  void store(SkillRecord rec);
  const std::vector<SkillRecord>& records() const { return records_; }
  std::vector<const SkillRecord*> for_task(Achievement task) const;

  std::string to_jsonl() const;
  static SkillLibrary from_jsonl(std::string_view text);

 private:
  std::vector<SkillRecord> records_;
};

// Lowercase, collapse whitespace, strip trailing punctuation.
std::string normalize_rule(std::string_view text);
// Text after each "Mechanism:" label.
std::vector<std::string> parse_mechanisms(std::string_view completion);

struct RuleRecord {
  std::string text;
  std::string key;  // normalize_rule(text)
  int episode = 0;
  int first_tick = 0;
  int last_tick = 0;

  bool operator==(const RuleRecord&) const = default;
};

class RuleLibrary {
 public:
  // False when the normalized key is already present.
  bool add(RuleRecord rec);
  const std::vector<RuleRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  // Newest rules that fit in `budget` tokens, oldest first; "" when empty.
  std::string prompt_text(int budget, const Tokenizer& tok = pretoken_count) const;

  std::string to_jsonl() const;
  static RuleLibrary from_jsonl(std::string_view text);

 private:
  std::vector<RuleRecord> records_;
};

struct RuleScores {
  double precision = 0;
  double recall = 0;
};
using RuleJudge = std::function<bool(std::string_view predicted, std::string_view truth)>;
bool normalized_match(std::string_view predicted, std::string_view truth);
// Throws std::invalid_argument on an empty truth set.
RuleScores evaluate_rules(const std::vector<std::string>& predicted, const std::vector<std::string>& truth,
                          const RuleJudge& judge = normalized_match);
RuleScores evaluate_rules(const RuleLibrary& library, const std::vector<RuleDelta>& truth,
                          const RuleJudge& judge = normalized_match);

struct PipelineStats {
  int gateway_calls = 0;
  int thinks = 0;
  int reflections = 0;
  int parse_failures = 0;
  int tasks_proposed = 0;
  int tasks_confirmed = 0;
  int plans_stored = 0;
  int plans_reused = 0;
  int replans = 0;
  int subgoal_terminals = 0;
  int timeouts = 0;
  int inductions = 0;
  int inductions_skipped = 0;
};

class LlmAgent : public Agent {
 public:
  const PipelineStats& stats() const { return stats_; }

 protected:
  PipelineStats stats_;
};

std::unique_ptr<LlmAgent> react_agent(Gateway& gw, const PipelineParams& params = {});
std::unique_ptr<LlmAgent> reflexion_agent(Gateway& gw, const PipelineParams& params = {});
// Libraries outlive the agent and carry over between episodes.
std::unique_ptr<LlmAgent> skill_library_agent(Gateway& gw, SkillLibrary& skills, const PipelineParams& params = {});
std::unique_ptr<LlmAgent> ifr_agent(Gateway& gw, SkillLibrary& skills, RuleLibrary& rules, int episode,
                                    const PipelineParams& params = {});

}  // namespace mars
