#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <thread>

#include "cli_runner.hpp"
#include "httplib.h"
#include "json.hpp"
#include "mars/engine.hpp"
#include "mars/sampler.hpp"
#include "mars/world_config.hpp"

using namespace mars;
using namespace mars::testing;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return "'" + source_dir() + "/tests/fixtures/" + name + "'"; }

const CollectRule& collect(const WorldConfig& cfg, Material m) {
  for (const auto& r : cfg.collect) {
    if (r.target == m) return r;
  }
  throw std::out_of_range("no rule");
}

Trajectory fake_trial(bool wood, std::uint64_t seed) {
  Trajectory t;
  t.world = "fake";
  t.config_text = serialize_config(builtin_world("default"));
  t.seed = seed;
  t.agent = "random";
  StepEvent e;
  e.tick = 1;
  e.action = Action::do_;
  if (wood) {
    e.unlocked = {Achievement::collect_wood};
    e.reward_tenths = 10;
  }
  t.events.push_back(e);
  return t;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("worlds lists the builtin fixtures") {
  const auto r = run_cli("worlds");
  CHECK(r.code == 0);
  std::string expected;
  for (auto n : kBuiltinWorldNames) expected += std::string(n) + "\n";
  CHECK(r.out == expected);
}

TEST_CASE("gen terrain changes only terrain sections") {
  const auto r = run_cli("gen --axes terrain --seed 7");
  REQUIRE(r.code == 0);
  CHECK(r.err.find("# mars gen --axes terrain --seed 7") != std::string::npos);
  CHECK(r.err.find("pass: true") != std::string::npos);

  ModificationSpec spec;
  spec.axes = {Axis::terrain};
  spec.seed = 7;
  CHECK(r.out == serialize_config(sample_world(spec)));

  const WorldConfig cfg = load_world_text(r.out);
  const auto deltas = diff_configs(builtin_world("default"), cfg);
  CHECK_FALSE(deltas.empty());
  for (const auto& d : deltas) {
    INFO(d.path);
    CHECK((d.path.rfind("terrain_neighbour", 0) == 0 || d.path.rfind("terrain_effect", 0) == 0));
  }
}

TEST_CASE("gen writes the config with --out and the report to stdout") {
  const auto dir = scratch_dir("gen");
  const auto path = dir / "w.yaml";
  const auto r = run_cli("gen --axes survival,task --seed 3 --out '" + path.string() + "'");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("pass: true", 0) == 0);
  CHECK(run_cli("gen --axes survival,task --seed 3").out == slurp(path));
  CHECK(run_cli("verify '" + path.string() + "'").code == 0);
  fs::remove_all(dir);
}

TEST_CASE("gen visual misleading is a bijection on the six yields") {
  for (int seed : {0, 1, 2}) {
    const auto r = run_cli("gen --axes task --variant visual_misleading --seed " + std::to_string(seed));
    REQUIRE(r.code == 0);
    const WorldConfig cfg = load_world_text(r.out);
    std::set<Item> items;
    for (auto m : {Material::tree, Material::stone, Material::coal, Material::iron, Material::diamond,
                   Material::grass}) {
      const auto& rec = collect(cfg, m).receive;
      REQUIRE(rec.size() == 1);
      items.insert(rec.begin()->first);
    }
    CHECK(items == std::set<Item>(kResourceItems.begin(), kResourceItems.end()));
  }
}

TEST_CASE("gen usage errors exit 2") {
  CHECK(run_cli("gen").code == 2);
  CHECK(run_cli("gen --axes weather").code == 2);
  CHECK(run_cli("gen --axes task --variant nope").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("").code == 2);
}

TEST_CASE("verify exit codes") {
  for (auto n : kBuiltinWorldNames) {
    INFO(n);
    CHECK(run_cli("verify " + std::string(n)).code == 0);
    CHECK(run_cli("verify '" + source_dir() + "/worlds/" + std::string(n) + ".yaml'").code == 0);
  }
  const auto dead = run_cli("verify " + fixture("deadlock.yaml"));
  CHECK(dead.code == 1);
  CHECK(dead.out.find("cycle: wood -> wood_pickaxe -> wood") != std::string::npos);
  CHECK(dead.out.rfind("pass: false", 0) == 0);

  const auto bad = run_cli("verify " + fixture("garbage.yaml"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("error:") != std::string::npos);
  CHECK(run_cli("verify /nonexistent/world.yaml").code == 2);
}

TEST_CASE("run random is reproducible from its banner") {
  const auto a = scratch_dir("runa"), b = scratch_dir("runb");
  const auto ra = run_cli("run --world survival --agent random --trials 3 --seed 40 --max-steps 300 --out '" +
                          a.string() + "'");
  REQUIRE(ra.code == 0);
  CHECK(ra.err.rfind("# mars run --world survival", 0) == 0);
  const auto rb = run_cli("run --world survival --agent random --trials 3 --seed 40 --max-steps 300 --out '" +
                          b.string() + "'");
  REQUIRE(rb.code == 0);
  CHECK(ra.out == rb.out);
  for (int i = 0; i < 3; ++i) {
    const std::string f = "trial_" + std::to_string(i) + ".jsonl";
    const std::string ta = slurp(a / f);
    CHECK_FALSE(ta.empty());
    CHECK(ta == slurp(b / f));
    const Trajectory t = from_jsonl(ta);
    CHECK(t.seed == 40u + static_cast<unsigned>(i));
    CHECK(t.world == "survival");
    CHECK(replay_matches(t));
  }
  CHECK(slurp(a / "summary.txt") == ra.out);
  CHECK(nlohmann::json::parse(slurp(a / "summary.json")).is_array());

  const auto e = run_cli("eval '" + a.string() + "'");
  CHECK(e.code == 0);
  CHECK(e.out.rfind(ra.out, 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("run oracle on task_dep mines diamonds from stone") {
  const auto dir = scratch_dir("oracle");
  const auto r = run_cli("run --world task_dep --agent oracle --trials 5 --seed 2 --out '" + dir.string() + "'");
  REQUIRE(r.code == 0);
  int from_stone = 0;
  for (int i = 0; i < 5; ++i) {
    const Trajectory t = from_jsonl(slurp(dir / ("trial_" + std::to_string(i) + ".jsonl")));
    CHECK(t.agent == "oracle");
    GameState s = generate_world(builtin_world("task_dep"), t.seed);
    for (const auto& e : t.events) {
      const Material front = s.cell(s.front()).material;
      const StepResult res = step(s, e.action);
      const auto& u = res.info.newly_unlocked;
      if (std::find(u.begin(), u.end(), Achievement::collect_diamond) != u.end()) {
        CHECK(e.action == Action::do_);
        from_stone += front == Material::stone;
      }
    }
  }
  CHECK(from_stone >= 4);
  CHECK(run_cli("run --agent oracle --world " + fixture("deadlock.yaml") + " --out '" + dir.string() + "'").code ==
        1);
  CHECK(run_cli("run --agent nope --out '" + dir.string() + "'").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("eval counts success rates over trials") {
  const auto dir = scratch_dir("eval");
  for (int i = 0; i < 20; ++i) write(dir / ("trial_" + std::to_string(i) + ".jsonl"), to_jsonl(fake_trial(i < 9, i)));
  const auto r = run_cli("eval '" + dir.string() + "'");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("  collect_wood          45.0\n") != std::string::npos);
  CHECK(r.out.find("  collect_coal           0.0\n") != std::string::npos);
  CHECK(r.out.find("fake             20    0.45 ± 0.51") != std::string::npos);

  const auto j = run_cli("eval --json '" + dir.string() + "'");
  REQUIRE(j.code == 0);
  const auto js = nlohmann::json::parse(j.out);
  CHECK(js[0]["trials"] == 20);

  Trajectory bad = fake_trial(true, 99);
  bad.events[0].reward_tenths = 20;
  write(dir / "trial_99.jsonl", to_jsonl(bad));
  const auto c = run_cli("eval '" + dir.string() + "'");
  CHECK(c.code == 1);
  CHECK(c.err.find("corrupt") != std::string::npos);

  const auto empty = scratch_dir("empty");
  CHECK(run_cli("eval '" + empty.string() + "'").code == 1);
  fs::remove_all(dir);
  fs::remove_all(empty);
}

TEST_CASE("eval of one all-zero trajectory") {
  const auto dir = scratch_dir("zero");
  write(dir / "trial_0.jsonl", to_jsonl(fake_trial(false, 0)));
  const auto r = run_cli("eval --json '" + dir.string() + "'");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out)[0];
  CHECK(j["score"] == 0.0);
  CHECK(j["reward_mean"] == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("describe prints the text observation") {
  const auto r = run_cli("describe --world default --seed 3");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("My status: <health: 9/9, food: 9/9, drink: 9/9, energy: 9/9>") != std::string::npos);
  CHECK(r.out == run_cli("describe --world default --seed 3").out);
}

TEST_CASE("llm agents report an unreachable gateway") {
  const auto dir = scratch_dir("unreach");
  const auto r = run_cli("run --agent react --trials 1 --max-steps 5 --out '" + dir.string() + "'",
                         "MARS_LLM_BASE_URL=http://127.0.0.1:9/v1 MARS_LLM_API_KEY=k");
  CHECK(r.code == 1);
  CHECK(r.err.find("gateway unreachable") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("ifr run replays byte-equal from a cassette") {
  httplib::Server srv;
  int calls = 0;
  srv.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const auto body = nlohmann::json::parse(req.body);
    const std::string sys = body["messages"][0]["content"];
    std::string reply = "Action: do";
    if (sys.find("choose the next task") != std::string::npos) reply = "Task: collect wood";
    if (sys.find("sequences of subgoals") != std::string::npos) reply = "Plan: mine(\"tree\", 1)";
    if (sys.find("explanation of action execution failure") != std::string::npos) reply = "Explanation: no tree.";
    if (sys.find("inductive reasoning") != std::string::npos) reply = "Mechanism: trees give wood.";
    nlohmann::json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}};
    res.set_content(out.dump(), "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  const auto a = scratch_dir("rec"), b = scratch_dir("play");
  const auto cassette = a / "cassette.jsonl";
  const std::string common = "run --world default --agent ifr --episodes 1 --trials 1 --seed 5 --max-steps 120 ";
  const auto rec = run_cli(common + "--gateway 'record:" + cassette.string() + "' --out '" + a.string() + "'",
                           "MARS_LLM_BASE_URL=http://127.0.0.1:" + std::to_string(port) + "/v1 MARS_LLM_API_KEY=k");
  srv.stop();
  th.join();
  REQUIRE(rec.code == 0);
  CHECK(calls > 0);

  const auto play = run_cli(common + "--gateway 'cassette:" + cassette.string() + "' --out '" + b.string() + "'",
                            "MARS_LLM_BASE_URL=http://127.0.0.1:9/v1");
  REQUIRE(play.code == 0);
  CHECK(play.out == rec.out);
  for (auto f : {"learn_0.jsonl", "trial_0.jsonl", "skills.jsonl", "rules.jsonl", "summary.json"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "rules.jsonl").find("trees give wood") != std::string::npos);

  // A cassette is consumed in order; an exhausted one is an error.
  const auto extra = run_cli("run --world default --agent ifr --episodes 2 --trials 1 --seed 5 --max-steps 120 "
                             "--gateway 'cassette:" + cassette.string() + "' --out '" + b.string() + "'");
  CHECK(extra.code == 1);
  fs::remove_all(a);
  fs::remove_all(b);
}
