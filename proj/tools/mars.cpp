// mars: sample, verify, run, evaluate, describe and serve Mars worlds.
#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mars/descriptor.hpp"
#include "mars/gateway.hpp"
#include "mars/harness.hpp"
#include "mars/metrics.hpp"
#include "mars/pipelines.hpp"
#include "mars/sampler.hpp"
#include "mars/server.hpp"
#include "mars/verifier.hpp"

namespace fs = std::filesystem;
using namespace mars;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

WorldConfig load_world(const std::string& name_or_path) {
  if (!is_builtin_world(name_or_path) && !fs::exists(name_or_path)) {
    throw Usage("no builtin world or file named '" + name_or_path + "'");
  }
  try {
    return resolve_world(name_or_path);
  } catch (const std::exception& e) {
    throw Usage(std::string("cannot load world: ") + e.what());
  }
}

std::string world_label(const std::string& name_or_path) {
  return is_builtin_world(name_or_path) ? name_or_path : fs::path(name_or_path).stem().string();
}

// --- gen ---

struct GenOpts {
  std::vector<std::string> axes;
  std::string variant = "traditional_exceptions";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenOpts& o) {
  ModificationSpec spec;
  for (const auto& a : o.axes) {
    auto axis = parse_axis(a);
    if (!axis) throw Usage("unknown axis '" + a + "' (terrain, survival, task)");
    spec.axes.insert(*axis);
  }
  auto v = parse_collect_variant(o.variant);
  if (!v) throw Usage("unknown variant '" + o.variant + "'");
  spec.collect_variant = *v;
  spec.seed = o.seed;
  WorldConfig cfg;
  try {
    cfg = sample_world(spec);
  } catch (const SamplingExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  const std::string report = report_to_yaml(verify(cfg, spec.seed));
  if (o.out.empty()) {
    std::cout << serialize_config(cfg);
    std::cerr << report;
  } else {
    write_file(o.out, serialize_config(cfg));
    std::cout << report;
  }
  return kOk;
}

// --- verify ---

int cmd_verify(const std::string& world, std::uint64_t seed) {
  const WorldConfig cfg = load_world(world);
  const VerificationReport r = verify(cfg, seed);
  std::cout << report_to_yaml(r);
  return r.pass() ? kOk : kFail;
}

// --- run ---

struct RunOpts {
  std::string world = "default";
  std::string agent = "random";
  int trials = 1;
  std::uint64_t seed = 0;
  std::string gateway = "http";
  int episodes = 5;
  int max_steps = 10000;
  std::string out = "mars-run";
  bool json = false;
};

bool is_llm(const std::string& a) { return a == "react" || a == "reflexion" || a == "skill" || a == "ifr"; }

int cmd_run(const RunOpts& o) {
  static const std::set<std::string> kAgents = {"random", "oracle", "react", "reflexion", "skill", "ifr"};
  if (!kAgents.count(o.agent)) throw Usage("unknown agent '" + o.agent + "'");
  if (o.trials < 1) throw Usage("--trials must be at least 1");
  const WorldConfig cfg = load_world(o.world);
  const std::string label = world_label(o.world);
  fs::create_directories(o.out);

  std::unique_ptr<Gateway> gw;
  if (is_llm(o.agent)) gw = make_gateway(o.gateway);
  SkillLibrary skills;
  RuleLibrary rules;
  EpisodeLimits lim;
  lim.max_steps = o.max_steps;

  auto make_agent = [&](std::uint64_t seed, int episode) -> std::unique_ptr<Agent> {
    if (o.agent == "random") return random_agent(seed);
    if (o.agent == "oracle") return oracle_agent(cfg);
    if (o.agent == "react") return react_agent(*gw);
    if (o.agent == "reflexion") return reflexion_agent(*gw);
    if (o.agent == "skill") return skill_library_agent(*gw, skills);
    return ifr_agent(*gw, skills, rules, episode);
  };
  auto save = [&](const std::string& stem, const EpisodeResult& r) {
    write_file(fs::path(o.out) / (stem + ".jsonl"), to_jsonl(r.trajectory));
    if (!r.log.empty()) {
      std::string text;
      for (const auto& l : r.log) text += l + "\n";
      write_file(fs::path(o.out) / (stem + ".log"), text);
    }
  };

  if (o.agent == "skill" || o.agent == "ifr") {
    for (int e = 0; e < o.episodes; ++e) {
      const std::uint64_t seed = o.seed + 1000000 + static_cast<std::uint64_t>(e);
      auto agent = make_agent(seed, e);
      save("learn_" + std::to_string(e), run_episode(cfg, seed, *agent, lim, label));
    }
  }
  std::vector<TrialRecord> records;
  for (int i = 0; i < o.trials; ++i) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(i);
    auto agent = make_agent(seed, o.episodes + i);
    const EpisodeResult r = run_episode(cfg, seed, *agent, lim, label);
    save("trial_" + std::to_string(i), r);
    records.push_back(trial_from(r.trajectory));
  }
  if (o.agent == "skill" || o.agent == "ifr") {
    write_file(fs::path(o.out) / "skills.jsonl", skills.to_jsonl());
    write_file(fs::path(o.out) / "rules.jsonl", rules.to_jsonl());
  }
  const std::vector<WorldRow> rows = {{label, summarize(records)}};
  write_file(fs::path(o.out) / "summary.txt", summary_table(rows));
  write_file(fs::path(o.out) / "summary.json", summary_json(rows) + "\n");
  std::cout << (o.json ? summary_json(rows) + "\n" : summary_table(rows));
  return kOk;
}

// --- eval ---

int cmd_eval(const std::string& path, bool json) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      const std::string n = e.path().filename().string();
      if (n.rfind("trial_", 0) == 0 && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw Usage("no such file or directory '" + path + "'");
  }
  if (files.empty()) {
    std::cerr << "error: no trajectories (trial_*.jsonl) in " << path << "\n";
    return kFail;
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::vector<TrialRecord>> by_world;
  for (const auto& f : files) {
    try {
      const Trajectory t = from_jsonl(read_file(f));
      int logged = 0;
      for (const auto& e : t.events) logged += e.reward_tenths;
      const int recomputed = episode_reward_tenths(t);
      if (recomputed != logged) {
        throw CorruptTrajectory("logged reward " + std::to_string(logged) + " != recomputed " +
                                std::to_string(recomputed));
      }
      by_world[t.world].push_back(trial_from(t));
    } catch (const std::exception& e) {
      std::cerr << "error: corrupt trajectory " << f.string() << ": " << e.what() << "\n";
      return kFail;
    }
  }
  std::vector<WorldRow> rows;
  for (const auto& [w, recs] : by_world) rows.push_back({w, summarize(recs)});
  if (json) {
    std::cout << summary_json(rows) << "\n";
    return kOk;
  }
  std::cout << summary_table(rows);
  for (const auto& r : rows) {
    std::cout << "\nsuccess rates (%) for " << r.world << "\n";
    for (int i = 0; i < kAchievementCount; ++i) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  %-20s %5.1f\n", std::string(name(static_cast<Achievement>(i))).c_str(),
                    r.summary.s[i]);
      std::cout << buf;
    }
  }
  return kOk;
}

// --- describe ---

int cmd_describe(const std::string& world, std::uint64_t seed, int steps) {
  const WorldConfig cfg = load_world(world);
  GameState s = generate_world(cfg, seed);
  auto agent = random_agent(seed);
  Observation obs = observe(s);
  const std::string none;
  for (int i = 0; i < steps && !s.done; ++i) obs = step(s, *agent->act(AgentInput{obs, none, s})).observation;
  std::cout << describe(obs).text() << "\n";
  return kOk;
}

// --- serve ---

int cmd_serve(const std::string& host, int port, int threads) {
  ServerOptions opts;
  opts.host = host;
  opts.port = static_cast<std::uint16_t>(port);
  opts.threads = threads;
  Server server(opts);
  server.start();
  std::cout << "listening on http://" << host << ":" << server.port() << " (ws /play)" << std::endl;
  std::signal(SIGINT, [](int) { std::_Exit(0); });
  std::signal(SIGTERM, [](int) { std::_Exit(0); });
  server.wait();
  return kOk;
}

std::string banner(int argc, char** argv) {
  std::string b = "#";
  for (int i = 0; i < argc; ++i) b += std::string(" ") + (i == 0 ? "mars" : argv[i]);
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mars: counter-commonsense survival worlds"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen", "sample a world and verify it");
  c_gen->add_option("--axes", gen.axes, "terrain, survival, task (comma separated)")->required()->delimiter(',');
  c_gen->add_option("--variant", gen.variant, "visual_misleading, traditional_exceptions or probabilistic");
  c_gen->add_option("--seed", gen.seed);
  c_gen->add_option("--out", gen.out, "write the config here instead of stdout");

  std::string verify_world;
  std::uint64_t verify_seed = 0;
  auto* c_verify = app.add_subcommand("verify", "check the four world principles; exit 1 on failure");
  c_verify->add_option("world", verify_world, "builtin name or config path")->required();
  c_verify->add_option("--seed", verify_seed, "map seed for the supply check");

  RunOpts run;
  auto* c_run = app.add_subcommand("run", "run agents and summarize");
  c_run->add_option("--world", run.world, "builtin name or config path");
  c_run->add_option("--agent", run.agent, "random, oracle, react, reflexion, skill, ifr");
  c_run->add_option("--trials", run.trials);
  c_run->add_option("--seed", run.seed, "seed of trial 0; trial i uses seed + i");
  c_run->add_option("--gateway", run.gateway, "http, cassette:<file> or record:<file>");
  c_run->add_option("--episodes", run.episodes, "learning episodes for skill and ifr");
  c_run->add_option("--max-steps", run.max_steps);
  c_run->add_option("--out", run.out, "output directory");
  c_run->add_flag("--json", run.json, "print the summary as JSON");

  std::string eval_path;
  bool eval_json = false;
  auto* c_eval = app.add_subcommand("eval", "metrics over recorded trajectories");
  c_eval->add_option("path", eval_path, "run directory or trajectory file")->required();
  c_eval->add_flag("--json", eval_json);

  std::string desc_world = "default";
  std::uint64_t desc_seed = 0;
  int desc_steps = 0;
  auto* c_desc = app.add_subcommand("describe", "print the text observation");
  c_desc->add_option("--world", desc_world);
  c_desc->add_option("--seed", desc_seed);
  c_desc->add_option("--steps", desc_steps, "random steps before describing");

  std::string host = "127.0.0.1";
  int port = 8080;
  int threads = 2;
  auto* c_serve = app.add_subcommand("serve", "lobby over HTTP and play sessions over WebSocket");
  c_serve->add_option("--host", host);
  c_serve->add_option("--port", port);
  c_serve->add_option("--threads", threads);

  auto* c_worlds = app.add_subcommand("worlds", "list builtin worlds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_worlds) {
      for (auto n : kBuiltinWorldNames) std::cout << n << "\n";
      return kOk;
    }
    if (*c_serve) return cmd_serve(host, port, threads);
    std::cerr << banner(argc, argv) << "\n";
    if (*c_gen) return cmd_gen(gen);
    if (*c_verify) return cmd_verify(verify_world, verify_seed);
    if (*c_run) return cmd_run(run);
    if (*c_eval) return cmd_eval(eval_path, eval_json);
    if (*c_desc) return cmd_describe(desc_world, desc_seed, desc_steps);
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GatewayError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
