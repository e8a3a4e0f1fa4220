#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <string>
#include <vector>

#include "mars/engine.hpp"

namespace mars {

struct TrialRecord {
  std::string world;
  std::uint64_t seed = 0;
  int reward_tenths = 0;
  std::bitset<kAchievementCount> unlocked;
  int steps = 0;

  double reward() const { return reward_tenths / 10.0; }
};

struct ScoreSummary {
  std::array<double, kAchievementCount> s{};  // percent
  double score = 0;
  double reward_mean = 0;
  double reward_std = 0;  // sample standard deviation
  int trials = 0;
};

class CorruptTrajectory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unlock count * 10 + sum of health deltas, in tenths. Throws CorruptTrajectory
// when an achievement unlocks twice, ticks go backwards, or a step follows done.
int episode_reward_tenths(const Trajectory& t);
double episode_reward(const Trajectory& t);

TrialRecord trial_from(const Trajectory& t);

// Throws std::invalid_argument on an empty trial set.
std::array<double, kAchievementCount> success_rates(const std::vector<TrialRecord>& trials);
// Throws std::invalid_argument unless every rate lies in [0, 100].
double score(const std::array<double, kAchievementCount>& s);
ScoreSummary summarize(const std::vector<TrialRecord>& trials);

struct WorldRow {
  std::string world;
  ScoreSummary summary;
};

// Plain text table: world, reward mean ± std, score.
std::string summary_table(const std::vector<WorldRow>& rows);
std::string summary_json(const std::vector<WorldRow>& rows);

}  // namespace mars
