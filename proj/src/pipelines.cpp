#include "mars/pipelines.hpp"

#include <algorithm>
#include <bitset>
#include <cctype>
#include <cstdio>
#include <regex>
#include <set>

#include "embedded_assets.hpp"
#include "json.hpp"
#include "mars/metrics.hpp"

namespace mars {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s, std::string_view chars = " \t\r\n") {
  const auto b = s.find_first_not_of(chars);
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(chars);
  return std::string(s.substr(b, e - b + 1));
}

// Value after "<label>:" on the first line carrying the label.
std::optional<std::string> labelled(std::string_view text, std::string_view label) {
  const std::string want = lower(label) + ":";
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(pos, end - pos), " \t\r*#");
    if (lower(line).rfind(want, 0) == 0) return trim(line.substr(want.size()));
    pos = end + 1;
  }
  return std::nullopt;
}

const std::set<std::string> kMineBlocks = {"stone", "coal", "iron", "tree",  "diamond",
                                           "water", "lava", "grass", "sand", "plant"};
const std::set<std::string> kCreatures = {"zombie", "skeleton", "cow"};
const std::set<std::string> kPlaceBlocks = {"stone", "table", "furnace", "sapling"};
const std::set<std::string> kDirections = {"left", "right", "up", "down"};

std::string word(std::string_view s) {
  std::string w = lower(trim(s, " \t\r\n\"'`"));
  std::replace(w.begin(), w.end(), ' ', '_');
  std::replace(w.begin(), w.end(), '-', '_');
  return w;
}

std::optional<int> positive(std::string_view s) {
  const std::string t = trim(s, " \t\"'");
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  if (t.size() > 6) return std::nullopt;
  const int v = std::stoi(t);
  return v >= 1 ? std::optional<int>(v) : std::nullopt;
}

std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(',', pos);
    out.push_back(trim(s.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

std::string join_messages(const std::vector<ChatMessage>& msgs) {
  std::string out;
  for (const auto& m : msgs) {
    if (!out.empty()) out += "\n";
    out += m.content;
  }
  return out;
}

std::string format_tenths(int tenths) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", tenths / 10.0);
  return buf;
}

std::string episode_score(const std::bitset<kAchievementCount>& unlocked) {
  std::array<double, kAchievementCount> s{};
  for (int i = 0; i < kAchievementCount; ++i) s[i] = unlocked[i] ? 100.0 : 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", score(s));
  return buf;
}

json inventory_json(const Inventory& inv) {
  json o = json::object();
  for (int i = 0; i < kInventorySlots; ++i) {
    if (inv[i] > 0) o[std::string(name(static_cast<Item>(i)))] = inv[i];
  }
  return o;
}

json record_json(const SkillRecord& r) {
  json plan = json::array();
  for (const auto& g : r.plan) plan.push_back(g.text());
  return {{"task", name(r.key.task)},
          {"init_inventory", inventory_json(r.key.init_inventory)},
          {"table_in_view", r.key.table_in_view},
          {"furnace_in_view", r.key.furnace_in_view},
          {"plan", plan}};
}

}  // namespace

std::string prompt_template(std::string_view name) { return std::string(embedded::prompt_text(name)); }

std::string fill_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    const std::string_view key = tmpl.substr(open + 1, close - open - 1);
    const bool slot = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
      return std::islower(static_cast<unsigned char>(c)) || c == '_';
    });
    out.append(tmpl.substr(pos, open - pos));
    if (!slot) {
      out.append(tmpl.substr(open, close - open + 1));
    } else {
      auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
      if (it == values.end()) throw std::invalid_argument("no value for template slot {" + std::string(key) + "}");
      out += it->second;
    }
    pos = close + 1;
  }
  out.append(tmpl.substr(std::min(pos, tmpl.size())));
  return out;
}

int history_tokens(const std::vector<ChatMessage>& msgs, const Tokenizer& tok) {
  int n = 0;
  for (const auto& m : msgs) n += estimate_tokens(m.content, tok);
  return n;
}

std::vector<ChatMessage> trim_history(const std::vector<ChatMessage>& msgs, int budget, int max_steps,
                                      const Tokenizer& tok) {
  int tokens = 0;
  int steps = 0;
  std::size_t keep = msgs.size();
  while (keep > 0) {
    const auto& m = msgs[keep - 1];
    const int t = estimate_tokens(m.content, tok);
    const int s = m.role == "user" ? 1 : 0;
    if (tokens + t > budget || steps + s > max_steps) break;
    tokens += t;
    steps += s;
    --keep;
  }
  while (keep < msgs.size() && msgs[keep].role != "user") ++keep;
  return {msgs.begin() + static_cast<std::ptrdiff_t>(keep), msgs.end()};
}

bool reflexion_due(const std::vector<ChatMessage>& msgs, int budget, int max_steps, const Tokenizer& tok) {
  const auto steps = std::count_if(msgs.begin(), msgs.end(), [](const ChatMessage& m) { return m.role == "user"; });
  return steps > max_steps || history_tokens(msgs, tok) > budget;
}

std::optional<Action> parse_action_text(std::string_view s) {
  std::string t = trim(s, " \t\r\n\"'`.<>[]");
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == '\\') continue;
    out.push_back(t[i]);
  }
  return parse_action(word(out));
}

ReactReply parse_react(std::string_view completion) {
  ReactReply r;
  if (auto a = labelled(completion, "ACTION")) {
    r.text = *a;
    r.action = parse_action_text(*a);
    r.kind = r.action ? ReactReply::Kind::action : ReactReply::Kind::invalid;
    return r;
  }
  if (auto t = labelled(completion, "THINK")) {
    r.kind = ReactReply::Kind::think;
    r.text = *t;
  }
  return r;
}

std::string Subgoal::text() const {
  switch (kind) {
    case Kind::mine: return "mine(\"" + target + "\", " + std::to_string(amount) + ")";
    case Kind::attack: return "attack(\"" + target + "\", " + std::to_string(amount) + ")";
    case Kind::sleep: return "sleep()";
    case Kind::place: return "place(\"" + target + "\")";
    case Kind::make: return "make(\"" + target + "\")";
    case Kind::explore: return "explore(\"" + target + "\", " + std::to_string(amount) + ")";
  }
  return "";
}

std::optional<Subgoal> parse_subgoal(std::string_view s) {
  static const std::regex call(R"(^\s*(mine|attack|sleep|place|make|explore)\s*\(([^()]*)\)\s*;?\s*$)");
  const std::string text(s);
  std::smatch m;
  if (!std::regex_match(text, m, call)) return std::nullopt;
  const std::string verb = m[1];
  const auto args = split_args(m[2].str());
  Subgoal g;
  if (verb == "sleep") {
    if (!args.empty()) return std::nullopt;
    g.kind = Subgoal::Kind::sleep;
    return g;
  }
  if (args.empty()) return std::nullopt;
  std::string target = word(args[0]);
  if (verb == "mine" || verb == "attack" || verb == "explore") {
    if (args.size() > 2) return std::nullopt;
    if (args.size() == 2) {
      auto n = positive(args[1]);
      if (!n) return std::nullopt;
      g.amount = *n;
    }
    if (verb == "mine") {
      if (target == "ripe_plant") target = "plant";
      if (!kMineBlocks.count(target)) return std::nullopt;
      g.kind = Subgoal::Kind::mine;
    } else if (verb == "attack") {
      if (!kCreatures.count(target) && target.size() > 1 && target.back() == 's') target.pop_back();
      if (!kCreatures.count(target)) return std::nullopt;
      g.kind = Subgoal::Kind::attack;
    } else {
      if (!kDirections.count(target) || args.size() != 2) return std::nullopt;
      g.kind = Subgoal::Kind::explore;
    }
  } else {
    if (args.size() != 1) return std::nullopt;
    if (verb == "place") {
      if (target == "plant") target = "sapling";
      if (!kPlaceBlocks.count(target)) return std::nullopt;
      g.kind = Subgoal::Kind::place;
    } else {
      auto item = parse_item(target);
      if (!item || !is_tool(*item)) return std::nullopt;
      g.kind = Subgoal::Kind::make;
    }
  }
  g.target = target;
  return g;
}

std::optional<std::vector<Subgoal>> parse_plan(std::string_view text) {
  static const std::regex call(R"(\b(mine|attack|sleep|place|make|explore)\s*\([^()]*\))");
  const std::string t(text);
  std::vector<Subgoal> plan;
  for (auto it = std::sregex_iterator(t.begin(), t.end(), call); it != std::sregex_iterator(); ++it) {
    auto g = parse_subgoal(it->str());
    if (!g) return std::nullopt;
    plan.push_back(*g);
  }
  if (plan.empty()) return std::nullopt;
  return plan;
}

SkillKey skill_key(Achievement task, const Observation& obs) {
  SkillKey k;
  k.task = task;
  k.init_inventory = obs.inventory;
  for (const auto& c : obs.view) {
    if (!c.in_bounds) continue;
    k.table_in_view |= c.station == Station::table;
    k.furnace_in_view |= c.station == Station::furnace;
  }
  return k;
}

const SkillRecord* SkillLibrary::find(const SkillKey& key) const {
  for (const auto& r : records_) {
    if (r.key == key) return &r;
  }
  return nullptr;
}

void SkillLibrary::store(SkillRecord rec) {
  for (auto& r : records_) {
    if (r.key == rec.key) {
      r = std::move(rec);
      return;
    }
  }
  records_.push_back(std::move(rec));
}

std::vector<const SkillRecord*> SkillLibrary::for_task(Achievement task) const {
  std::vector<const SkillRecord*> out;
  for (const auto& r : records_) {
    if (r.key.task == task) out.push_back(&r);
  }
  return out;
}

std::string SkillLibrary::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) out += record_json(r).dump() + "\n";
  return out;
}

SkillLibrary SkillLibrary::from_jsonl(std::string_view text) {
  SkillLibrary lib;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (trim(line).empty()) continue;
    const json j = json::parse(line);
    SkillRecord r;
    auto task = parse_achievement(j.at("task").get<std::string>());
    if (!task) throw std::invalid_argument("unknown task in skill record");
    r.key.task = *task;
    for (const auto& [k, v] : j.at("init_inventory").items()) {
      auto item = parse_item(k);
      if (!item || idx(*item) >= kInventorySlots) throw std::invalid_argument("unknown item in skill record");
      r.key.init_inventory[idx(*item)] = v.get<int>();
    }
    r.key.table_in_view = j.at("table_in_view").get<bool>();
    r.key.furnace_in_view = j.at("furnace_in_view").get<bool>();
    for (const auto& g : j.at("plan")) {
      auto sg = parse_subgoal(g.get<std::string>());
      if (!sg) throw std::invalid_argument("bad subgoal in skill record");
      r.plan.push_back(*sg);
    }
    lib.store(std::move(r));
  }
  return lib;
}

std::string normalize_rule(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : trim(text)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && std::string_view(".!?;:,").find(out.back()) != std::string_view::npos) out.pop_back();
  return trim(out);
}

std::vector<std::string> parse_mechanisms(std::string_view completion) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= completion.size()) {
    auto end = completion.find('\n', pos);
    if (end == std::string_view::npos) end = completion.size();
    const std::string line = trim(completion.substr(pos, end - pos), " \t\r*#-");
    if (lower(line).rfind("mechanism:", 0) == 0) {
      std::string rule = trim(line.substr(10));
      if (!rule.empty()) out.push_back(rule);
    }
    pos = end + 1;
  }
  return out;
}

bool RuleLibrary::add(RuleRecord rec) {
  rec.key = normalize_rule(rec.text);
  if (rec.key.empty()) return false;
  for (const auto& r : records_) {
    if (r.key == rec.key) return false;
  }
  records_.push_back(std::move(rec));
  return true;
}

std::string RuleLibrary::prompt_text(int budget, const Tokenizer& tok) const {
  std::vector<const RuleRecord*> kept;
  int used = 0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    const int t = estimate_tokens("- " + it->text, tok);
    if (used + t > budget) break;
    used += t;
    kept.push_back(&*it);
  }
  std::string out;
  for (auto it = kept.rbegin(); it != kept.rend(); ++it) out += "- " + (*it)->text + "\n";
  return out;
}

std::string RuleLibrary::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += json{{"text", r.text}, {"episode", r.episode}, {"first_tick", r.first_tick}, {"last_tick", r.last_tick}}
               .dump() +
           "\n";
  }
  return out;
}

RuleLibrary RuleLibrary::from_jsonl(std::string_view text) {
  RuleLibrary lib;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (trim(line).empty()) continue;
    const json j = json::parse(line);
    lib.add(RuleRecord{j.at("text").get<std::string>(), "", j.at("episode").get<int>(),
                       j.at("first_tick").get<int>(), j.at("last_tick").get<int>()});
  }
  return lib;
}

bool normalized_match(std::string_view predicted, std::string_view truth) {
  return normalize_rule(predicted) == normalize_rule(truth);
}

RuleScores evaluate_rules(const std::vector<std::string>& predicted, const std::vector<std::string>& truth,
                          const RuleJudge& judge) {
  if (truth.empty()) throw std::invalid_argument("empty ground-truth rule set");
  int good = 0;
  for (const auto& p : predicted) {
    good += std::any_of(truth.begin(), truth.end(), [&](const std::string& t) { return judge(p, t); });
  }
  int found = 0;
  for (const auto& t : truth) {
    found += std::any_of(predicted.begin(), predicted.end(), [&](const std::string& p) { return judge(p, t); });
  }
  RuleScores s;
  s.precision = predicted.empty() ? 0.0 : static_cast<double>(good) / predicted.size();
  s.recall = static_cast<double>(found) / truth.size();
  return s;
}

RuleScores evaluate_rules(const RuleLibrary& library, const std::vector<RuleDelta>& truth, const RuleJudge& judge) {
  std::vector<std::string> p;
  for (const auto& r : library.records()) p.push_back(r.text);
  std::vector<std::string> t;
  for (const auto& d : truth) t.push_back(d.text);
  return evaluate_rules(p, t, judge);
}

namespace {

class LlmBase : public LlmAgent {
 protected:
  LlmBase(Gateway& gw, const PipelineParams& params) : gw_(gw), params_(params) {}

  std::string ask(std::string system, std::vector<ChatMessage> messages) {
    GatewayRequest req;
    req.system = std::move(system);
    req.messages = std::move(messages);
    req.temperature = params_.temperature;
    ++stats_.gateway_calls;
    return gw_.complete(req);
  }

  void track(const StepResult& r) {
    reward_tenths_ += r.reward_tenths;
    for (auto a : r.info.newly_unlocked) unlocked_.set(idx(a));
  }

  Gateway& gw_;
  PipelineParams params_;
  int reward_tenths_ = 0;
  std::bitset<kAchievementCount> unlocked_;
};

class ReactAgent : public LlmBase {
 public:
  ReactAgent(Gateway& gw, const PipelineParams& params, bool reflect) : LlmBase(gw, params), reflect_(reflect) {}

  std::string name() const override { return reflect_ ? "reflexion" : "react"; }

  std::optional<Action> act(const AgentInput& in) override {
    history_.push_back({"user", in.text});
    if (reflect_ && reflexion_due(history_, params_.history_budget, params_.history_steps, params_.tok)) reflect();
    bool retried = false;
    for (int c = 0; c < params_.max_calls_per_step; ++c) {
      const std::string system = fill_template(
          prompt_template("react"),
          {{"reflection", reflection_.empty() ? "" : "\nReflection on past experience: " + reflection_ + "\n"}});
      const std::string reply =
          ask(system, trim_history(history_, params_.history_budget, params_.history_steps, params_.tok));
      history_.push_back({"assistant", reply});
      const ReactReply r = parse_react(reply);
      if (r.kind == ReactReply::Kind::action) {
        if (!reflect_) history_ = trim_history(history_, params_.history_budget, params_.history_steps, params_.tok);
        return r.action;
      }
      if (r.kind == ReactReply::Kind::think) {
        ++stats_.thinks;
        continue;
      }
      ++stats_.parse_failures;
      if (retried) {
        note("unparseable completion, running noop");
        return std::nullopt;
      }
      retried = true;
    }
    note("no action within the call budget");
    return std::nullopt;
  }

  void on_step(Action, const StepResult& r) override { track(r); }

 private:
  void reflect() {
    ++stats_.reflections;
    std::vector<ChatMessage> past(history_.begin(), history_.end() - 1);
    past = trim_history(past, params_.history_budget, params_.history_steps, params_.tok);
    std::string text;
    for (const auto& m : past) text += (m.role == "user" ? "observation:\n" : "response: ") + m.content + "\n";
    const std::string system =
        fill_template(prompt_template("reflexion"), {{"history", text},
                                                      {"reward", format_tenths(reward_tenths_)},
                                                      {"score", episode_score(unlocked_)}});
    const std::string reply = ask(system, {{"user", "Reflect on the history above."}});
    auto r = labelled(reply, "REFLECTION");
    reflection_ = r ? *r : trim(reply);
    history_.erase(history_.begin(), history_.end() - 1);
  }

  bool reflect_;
  std::vector<ChatMessage> history_;
  std::string reflection_;
};

constexpr const char* kProposerExamples =
    "\nReasoning: There is a tree next to the player and the inventory is empty, so collecting wood is a good "
    "first step.\nTask: collect wood\n";
constexpr const char* kControllerExamples =
    "\nReasoning: The goal is mine(\"tree\", 1). The tree is in front of me, so I should interact with it.\n"
    "Action: do\n";
constexpr const char* kExplainerExamples =
    "\nFailed subgoal: mine(\"stone\", 1). Explanation: The player kept mining the stone block without getting "
    "stone, so the stone block may need a pickaxe.\n";

enum class Terminal { succeed, failed, timeout };

std::string_view terminal_name(Terminal t) {
  switch (t) {
    case Terminal::succeed: return "succeed";
    case Terminal::failed: return "failed";
    case Terminal::timeout: return "timeout";
  }
  return "";
}

class PlanAgent : public LlmBase {
 public:
  PlanAgent(Gateway& gw, SkillLibrary& skills, RuleLibrary* rules, int episode, const PipelineParams& params)
      : LlmBase(gw, params), skills_(skills), rules_(rules), episode_(episode) {}

  std::string name() const override { return rules_ ? "ifr" : "skill"; }

  std::optional<Action> act(const AgentInput& in) override {
    obs_ = in.obs;
    text_ = in.text;
    fresh_obs_ = true;
    bool retried = false;
    for (int c = 0; c < params_.max_calls_per_step; ++c) {
      if (!executing_) {
        start_task();
        continue;
      }
      if (seg_steps_ >= params_.subgoal_timeout) {
        ++stats_.timeouts;
        end_subgoal(Terminal::timeout);
        continue;
      }
      const std::string reply = controller();
      const auto a = labelled(reply, "Action");
      const std::string token = a ? lower(trim(*a, " \t\"'`.")) : "";
      if (token == "succeed") {
        end_subgoal(Terminal::succeed);
        continue;
      }
      if (token == "failed") {
        end_subgoal(Terminal::failed);
        continue;
      }
      if (auto act = a ? parse_action_text(*a) : std::nullopt) return act;
      ++stats_.parse_failures;
      if (retried) {
        note("unparseable controller reply, running noop");
        return std::nullopt;
      }
      retried = true;
    }
    note("no action within the call budget");
    return std::nullopt;
  }

  void on_step(Action a, const StepResult& r) override {
    track(r);
    if (!executing_) return;
    ++seg_steps_;
    std::string line = "step " + std::to_string(r.observation.tick) + ": action " + std::string(mars::name(a));
    const auto& d = r.info.deltas;
    line += " (health " + std::to_string(d.health) + ", food " + std::to_string(d.food) + ", drink " +
            std::to_string(d.drink) + ", energy " + std::to_string(d.energy) + ")";
    for (auto u : r.info.newly_unlocked) line += ", unlocked " + task_phrase(u);
    line += "\n" + describe(r.observation).text();
    segment_.push_back({"user", line});
    segment_ = trim_history(segment_, params_.history_budget, params_.subgoal_timeout, params_.tok);
    last_tick_ = r.observation.tick;
    const bool confirmed =
        std::find(r.info.newly_unlocked.begin(), r.info.newly_unlocked.end(), task_) != r.info.newly_unlocked.end();
    if (!confirmed) return;
    ++stats_.tasks_confirmed;
    completed_.insert(task_);
    if (!reused_) {
      skills_.store(SkillRecord{key_, {plan_.begin(), plan_.begin() + static_cast<std::ptrdiff_t>(step_ + 1)}});
      ++stats_.plans_stored;
    }
    terminal(Terminal::succeed);
    executing_ = false;
  }

 private:
  std::string rules_text() const {
    if (!rules_ || rules_->size() == 0) return "";
    return "\nGame rules found so far:\n" + rules_->prompt_text(params_.rule_budget, params_.tok);
  }

  std::string done_list(const std::set<Achievement>& s) const {
    std::string out;
    for (auto a : s) out += (out.empty() ? "" : ", ") + task_phrase(a);
    return out.empty() ? "none" : out;
  }

  void start_task() {
    const std::string system = fill_template(prompt_template("proposer"),
                                             {{"examples", kProposerExamples}, {"rules", rules_text()}});
    const std::string user = "Player's in-game observation:\n" + text_ + "\nCompleted tasks so far: " +
                             done_list(completed_) + "\nFailed tasks: " + done_list(failed_);
    const std::string reply = ask(system, {{"user", user}});
    const auto t = labelled(reply, "Task");
    const auto task = t ? parse_task_phrase(*t) : std::nullopt;
    if (!task) {
      ++stats_.parse_failures;
      note("proposer gave no task from the pool");
      return;
    }
    ++stats_.tasks_proposed;
    task_ = *task;
    key_ = skill_key(task_, obs_);
    attempts_ = 0;
    dialogue_.clear();
    if (const SkillRecord* rec = skills_.find(key_)) {
      ++stats_.plans_reused;
      reused_ = true;
      begin_plan(rec->plan);
      return;
    }
    reused_ = false;
    dialogue_.push_back({"user", "Task: " + task_phrase(task_) + "\nObservation:\n" + text_});
    plan_task();
  }

  std::string planner_examples() const {
    std::string out;
    for (const SkillRecord* r : skills_.for_task(task_)) out += "\n" + record_json(*r).dump();
    return out.empty() ? "none" : out + "\n";
  }

  // Asks the planner with the current dialogue; one more try on a malformed plan.
  void plan_task() {
    const std::string system = fill_template(prompt_template("planner"),
                                             {{"examples", planner_examples()}, {"rules", rules_text()}});
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::string reply = ask(system, dialogue_);
      dialogue_.push_back({"assistant", reply});
      if (auto plan = parse_plan(reply)) {
        begin_plan(*plan);
        return;
      }
      ++stats_.parse_failures;
      dialogue_.push_back(
          {"user", "The plan could not be parsed.\n" +
                       fill_template(prompt_template("replanner"), {{"task", task_phrase(task_)}})});
    }
    give_up("malformed plan");
  }

  void begin_plan(std::vector<Subgoal> plan) {
    plan_ = std::move(plan);
    step_ = 0;
    executing_ = true;
    reset_segment();
  }

  void reset_segment() {
    segment_.clear();
    controller_history_.clear();
    seg_steps_ = 0;
    first_tick_ = obs_.tick;
    last_tick_ = obs_.tick;
    fresh_obs_ = true;
  }

  void give_up(const std::string& why) {
    failed_.insert(task_);
    executing_ = false;
    note("task " + task_phrase(task_) + " failed: " + why);
  }

  std::string controller() {
    if (fresh_obs_) {
      controller_history_.push_back({"user", text_});
      fresh_obs_ = false;
    }
    const std::string system =
        fill_template(prompt_template("controller"),
                      {{"examples", kControllerExamples}, {"rules", rules_text()}, {"subgoal", plan_[step_].text()}});
    const std::string reply =
        ask(system, trim_history(controller_history_, params_.history_budget, params_.history_steps, params_.tok));
    controller_history_.push_back({"assistant", reply});
    return reply;
  }

  void terminal(Terminal t) {
    ++stats_.subgoal_terminals;
    if (rules_) induce(t);
  }

  void induce(Terminal t) {
    ++stats_.inductions;
    const std::string system = fill_template(
        prompt_template("induction"),
        {{"examples", "\n" + prompt_template("induction_examples")}, {"history", join_messages(segment_)}});
    const std::string reply = ask(system, {{"user", "subgoal: " + plan_[step_].text() +
                                                        "\nstatus: " + std::string(terminal_name(t))}});
    const auto rules = parse_mechanisms(reply);
    if (rules.empty()) {
      ++stats_.inductions_skipped;
      note("induction reply had no mechanism, segment skipped");
      return;
    }
    for (const auto& text : rules) rules_->add(RuleRecord{text, "", episode_, first_tick_, last_tick_});
  }

  void end_subgoal(Terminal t) {
    terminal(t);
    if (t == Terminal::succeed && step_ + 1 < plan_.size()) {
      ++step_;
      reset_segment();
      return;
    }
    const std::string failure =
        t == Terminal::succeed
            ? "The controller finished every subgoal but the task " + task_phrase(task_) + " was not accomplished."
            : "Subgoal " + plan_[step_].text() + " ended with status " + std::string(terminal_name(t)) + ".";
    reset_segment();
    if (++attempts_ > params_.max_replans) {
      give_up("out of replans");
      return;
    }
    ++stats_.replans;
    if (reused_) {
      reused_ = false;
      dialogue_.push_back({"user", "Task: " + task_phrase(task_) + "\nObservation:\n" + text_});
      dialogue_.push_back({"assistant", "Plan:\n" + plan_text()});
    }
    const std::string explainer =
        fill_template(prompt_template("explainer"), {{"examples", kExplainerExamples}});
    std::vector<ChatMessage> msgs = dialogue_;
    msgs.push_back({"user", failure + "\nObservation:\n" + text_});
    const std::string explanation = ask(explainer, msgs);
    dialogue_.push_back({"user", failure + "\nExplanation: " + trim(explanation) + "\n" +
                                     fill_template(prompt_template("replanner"), {{"task", task_phrase(task_)}})});
    plan_task();
  }

  std::string plan_text() const {
    std::string out;
    for (const auto& g : plan_) out += g.text() + "\n";
    return out;
  }

  SkillLibrary& skills_;
  RuleLibrary* rules_;
  int episode_;

  Observation obs_;
  std::string text_;
  bool fresh_obs_ = true;

  bool executing_ = false;
  Achievement task_ = Achievement::collect_wood;
  SkillKey key_;
  bool reused_ = false;
  int attempts_ = 0;
  std::vector<Subgoal> plan_;
  std::size_t step_ = 0;
  std::vector<ChatMessage> dialogue_;
  std::vector<ChatMessage> controller_history_;
  std::vector<ChatMessage> segment_;
  int seg_steps_ = 0;
  int first_tick_ = 0;
  int last_tick_ = 0;
  std::set<Achievement> completed_;
  std::set<Achievement> failed_;
};

}  // namespace

std::unique_ptr<LlmAgent> react_agent(Gateway& gw, const PipelineParams& params) {
  return std::make_unique<ReactAgent>(gw, params, false);
}

std::unique_ptr<LlmAgent> reflexion_agent(Gateway& gw, const PipelineParams& params) {
  return std::make_unique<ReactAgent>(gw, params, true);
}

std::unique_ptr<LlmAgent> skill_library_agent(Gateway& gw, SkillLibrary& skills, const PipelineParams& params) {
  return std::make_unique<PlanAgent>(gw, skills, nullptr, 0, params);
}

std::unique_ptr<LlmAgent> ifr_agent(Gateway& gw, SkillLibrary& skills, RuleLibrary& rules, int episode,
                                    const PipelineParams& params) {
  return std::make_unique<PlanAgent>(gw, skills, &rules, episode, params);
}

}  // namespace mars
