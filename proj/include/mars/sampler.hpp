#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mars/rng.hpp"
#include "mars/world_config.hpp"

namespace mars {

enum class Axis : std::uint8_t { terrain, survival, task_dependency };
enum class CollectVariant : std::uint8_t { visual_misleading, traditional_exceptions, probabilistic };

std::string_view name(Axis a);
std::string_view name(CollectVariant v);
std::optional<Axis> parse_axis(std::string_view s);
std::optional<CollectVariant> parse_collect_variant(std::string_view s);

struct ModificationSpec {
  std::set<Axis> axes;
  CollectVariant collect_variant = CollectVariant::traditional_exceptions;
  std::uint64_t seed = 0;
};

class SamplingExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerParams {
  int max_attempts = 200;
  double secondary_drop = 0.10;
  double liquid_creature = 0.10;
  int tool_rounds = 64;  // redraws of collect requirements per attempt
};

// Each sampler rewrites only its own sections of `cfg`.
void sample_terrain(Rng& rng, WorldConfig& cfg);
void sample_survival(Rng& rng, WorldConfig& cfg);
void sample_task_dependency(Rng& rng, CollectVariant variant, WorldConfig& cfg,
                            const SamplerParams& params = {});

// Zero creature fields whose enabling flag is off.
void normalize_inert_creatures(WorldConfig& cfg);

// Rejection-sample a world passing verify(). Throws std::invalid_argument on
// an empty axis set and SamplingExhausted after max_attempts.
WorldConfig sample_world(const ModificationSpec& spec, const SamplerParams& params = {});

}  // namespace mars
