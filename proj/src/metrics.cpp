#include "mars/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace mars {

int episode_reward_tenths(const Trajectory& t) {
  std::bitset<kAchievementCount> seen;
  int tenths = 0;
  int last_tick = -1;
  bool done = false;
  for (const auto& e : t.events) {
    if (done) throw CorruptTrajectory("step after episode end");
    if (e.tick <= last_tick) throw CorruptTrajectory("tick " + std::to_string(e.tick) + " out of order");
    last_tick = e.tick;
    for (auto a : e.unlocked) {
      if (seen.test(idx(a))) throw CorruptTrajectory("repeated unlock " + std::string(name(a)));
      seen.set(idx(a));
      tenths += 10;
    }
    tenths += e.deltas.health;
    done = e.done;
  }
  return tenths;
}

double episode_reward(const Trajectory& t) { return episode_reward_tenths(t) / 10.0; }

TrialRecord trial_from(const Trajectory& t) {
  TrialRecord r;
  r.world = t.world;
  r.seed = t.seed;
  r.reward_tenths = episode_reward_tenths(t);
  for (const auto& e : t.events) {
    for (auto a : e.unlocked) r.unlocked.set(idx(a));
  }
  r.steps = static_cast<int>(t.events.size());
  return r;
}

std::array<double, kAchievementCount> success_rates(const std::vector<TrialRecord>& trials) {
  if (trials.empty()) throw std::invalid_argument("no trials");
  std::array<double, kAchievementCount> s{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    int n = 0;
    for (const auto& t : trials) n += t.unlocked.test(i);
    s[i] = 100.0 * n / static_cast<double>(trials.size());
  }
  return s;
}

double score(const std::array<double, kAchievementCount>& s) {
  double sum = 0;
  for (double v : s) {
    if (!(v >= 0 && v <= 100)) throw std::invalid_argument("success rate out of range");
    sum += std::log1p(v);
  }
  return std::exp(sum / static_cast<double>(s.size())) - 1;
}

ScoreSummary summarize(const std::vector<TrialRecord>& trials) {
  ScoreSummary out;
  out.s = success_rates(trials);
  out.score = score(out.s);
  out.trials = static_cast<int>(trials.size());
  double sum = 0;
  for (const auto& t : trials) sum += t.reward();
  out.reward_mean = sum / out.trials;
  if (out.trials > 1) {
    double sq = 0;
    for (const auto& t : trials) sq += (t.reward() - out.reward_mean) * (t.reward() - out.reward_mean);
    out.reward_std = std::sqrt(sq / (out.trials - 1));
  }
  return out;
}

std::string summary_table(const std::vector<WorldRow>& rows) {
  std::string out = "world        trials  reward          score\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %6d  %6.2f ± %-5.2f  %6.2f\n", r.world.c_str(), r.summary.trials,
                  r.summary.reward_mean, r.summary.reward_std, r.summary.score);
    out += buf;
  }
  return out;
}

std::string summary_json(const std::vector<WorldRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json rates = nlohmann::json::object();
    for (std::size_t i = 0; i < r.summary.s.size(); ++i) {
      rates[std::string(name(static_cast<Achievement>(i)))] = r.summary.s[i];
    }
    arr.push_back({{"world", r.world},
                   {"trials", r.summary.trials},
                   {"reward_mean", r.summary.reward_mean},
                   {"reward_std", r.summary.reward_std},
                   {"score", r.summary.score},
                   {"success_rates", rates}});
  }
  return arr.dump(2);
}

}  // namespace mars
