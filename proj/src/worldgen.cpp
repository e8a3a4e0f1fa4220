#include <algorithm>
#include <cmath>

#include "mars/engine.hpp"

namespace mars {

namespace {

constexpr std::array<Material, 4> kBaseMaterials = {Material::grass, Material::sand,
                                                    Material::stone, Material::path};

// Placement order of the special materials: big water bodies first so other
// specials can be hosted by them.
constexpr std::array<NeighbourKey, 6> kSpecialOrder = {
    NeighbourKey::water, NeighbourKey::tree, NeighbourKey::lava,
    NeighbourKey::coal,  NeighbourKey::iron, NeighbourKey::diamond};

Material special_material(NeighbourKey k) {
  switch (k) {
    case NeighbourKey::coal: return Material::coal;
    case NeighbourKey::iron: return Material::iron;
    case NeighbourKey::diamond: return Material::diamond;
    case NeighbourKey::lava: return Material::lava;
    case NeighbourKey::tree: return Material::tree;
    case NeighbourKey::water: return Material::water;
    case NeighbourKey::player: break;
  }
  throw std::invalid_argument("player is not a material");
}

bool is_base(Material m) {
  return std::find(kBaseMaterials.begin(), kBaseMaterials.end(), m) != kBaseMaterials.end();
}

double lattice(std::uint64_t seed, int ix, int iy) {
  const std::uint64_t h = mix_seed(seed ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32),
                                   static_cast<std::uint32_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, double x, double y) {
  const int ix = static_cast<int>(std::floor(x));
  const int iy = static_cast<int>(std::floor(y));
  const double fx = x - ix;
  const double fy = y - iy;
  const double sx = fx * fx * (3 - 2 * fx);
  const double sy = fy * fy * (3 - 2 * fy);
  const double a = lattice(seed, ix, iy);
  const double b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1);
  const double d = lattice(seed, ix + 1, iy + 1);
  return (a + (b - a) * sx) * (1 - sy) + (c + (d - c) * sx) * sy;
}

double fractal(std::uint64_t seed, int x, int y, double scale, int octaves) {
  double sum = 0;
  double amp = 1;
  double norm = 0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(mix_seed(seed, static_cast<std::uint64_t>(o)), x / scale, y / scale);
    norm += amp;
    amp *= 0.5;
    scale *= 0.5;
  }
  return sum / norm;
}

struct Generator {
  const WorldConfig& cfg;
  const EngineParams& params;
  Rng rng;
  int n;
  std::vector<Cell> grid;

  Material& at(Pos p) { return grid[static_cast<std::size_t>(p.x * n + p.y)].material; }
  Material at(Pos p) const { return grid[static_cast<std::size_t>(p.x * n + p.y)].material; }
  bool inside(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < n && p.y < n; }

  template <typename F>
  void neighbours8(Pos p, F&& f) const {
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        Pos q{p.x + dx, p.y + dy};
        if (inside(q)) f(q);
      }
    }
  }

  template <typename F>
  void neighbours4(Pos p, F&& f) const {
    for (Pos d : {Pos{1, 0}, Pos{-1, 0}, Pos{0, 1}, Pos{0, -1}}) {
      if (inside(p + d)) f(p + d);
    }
  }

  bool base_terrain(std::uint64_t seed) {
    const double c = (n - 1) / 2.0;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        const double dist = std::hypot(x - c, y - c);
        const double calm = std::max(0.0, 1.0 - dist / 10.0) * 0.25;
        const double mountain = fractal(mix_seed(seed, 11), x, y, 16, 3) - calm;
        const double beach = fractal(mix_seed(seed, 12), x, y, 12, 3) - calm;
        const double cave = fractal(mix_seed(seed, 13), x, y, 6, 2);
        Material m = Material::grass;
        if (beach > 0.62) {
          m = Material::sand;
        } else if (mountain > 0.56) {
          m = (cave > 0.64 || (mountain > 0.6 && std::abs(cave - 0.5) < 0.025)) ? Material::path
                                                                                 : Material::stone;
        }
        at({x, y}) = m;
      }
    }
    std::array<bool, kMaterialCount> seen{};
    bool grass_sand = false, grass_stone = false, stone_path = false, grass_path = false;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        const Material m = at({x, y});
        seen[idx(m)] = true;
        neighbours4({x, y}, [&](Pos q) {
          const Material o = at(q);
          grass_sand |= m == Material::grass && o == Material::sand;
          grass_stone |= m == Material::grass && o == Material::stone;
          stone_path |= m == Material::stone && o == Material::path;
          grass_path |= m == Material::grass && o == Material::path;
        });
      }
    }
    for (auto m : kBaseMaterials) {
      if (!seen[idx(m)]) return false;
    }
    return grass_sand && grass_stone && stone_path && grass_path;
  }

  int host_neighbours(Pos p, Material host, Pos except) const {
    int count = 0;
    neighbours4(p, [&](Pos q) {
      if (q != except && at(q) == host) ++count;
    });
    return count;
  }

  // Overwriting p keeps every neighbouring special hosted.
  bool keeps_hosts(Pos p) const {
    bool ok = true;
    neighbours4(p, [&](Pos q) {
      const Material m = at(q);
      if (is_base(m)) return;
      for (auto k : kSpecialOrder) {
        if (special_material(k) != m) continue;
        const Material host = cfg.neighbour(k);
        if (host == at(p) && host_neighbours(q, host, p) == 0) ok = false;
      }
    });
    return ok;
  }

  bool candidate(Pos p, Material host) const {
    if (!inside(p) || !is_base(at(p))) return false;
    return host_neighbours(p, host, p) > 0 && keeps_hosts(p);
  }

  int sprinkle(NeighbourKey k) {
    const auto& s = params.sprinkle[idx(k)];
    const Material mat = special_material(k);
    const Material host = cfg.neighbour(k);
    int placed = 0;
    for (int c = 0; c < s.clusters; ++c) {
      std::optional<Pos> seed;
      for (int tries = 0; tries < 200 && !seed; ++tries) {
        Pos p{rng.range(0, n - 1), rng.range(0, n - 1)};
        if (candidate(p, host)) seed = p;
      }
      if (!seed) continue;
      const int size = rng.range(s.min_size, s.max_size);
      std::vector<Pos> cluster{*seed};
      at(*seed) = mat;
      ++placed;
      for (int grow = 1; grow < size; ++grow) {
        std::vector<Pos> frontier;
        for (Pos p : cluster) {
          for (Pos d : {Pos{1, 0}, Pos{-1, 0}, Pos{0, 1}, Pos{0, -1}}) {
            Pos q = p + d;
            if (candidate(q, host) && std::find(frontier.begin(), frontier.end(), q) == frontier.end()) {
              frontier.push_back(q);
            }
          }
        }
        if (frontier.empty()) break;
        Pos q = rng.pick(frontier);
        at(q) = mat;
        cluster.push_back(q);
        ++placed;
      }
    }
    return placed;
  }

  bool specials() {
    std::vector<NeighbourKey> pending(kSpecialOrder.begin(), kSpecialOrder.end());
    while (!pending.empty()) {
      bool progress = false;
      for (auto it = pending.begin(); it != pending.end();) {
        const Material host = cfg.neighbour(*it);
        const bool waiting = std::any_of(pending.begin(), pending.end(), [&](NeighbourKey o) {
          return special_material(o) == host;
        });
        if (waiting) {
          ++it;
          continue;
        }
        if (params.sprinkle[idx(*it)].clusters > 0 && sprinkle(*it) == 0) return false;
        it = pending.erase(it);
        progress = true;
      }
      if (!progress) throw GenerationError("terrain neighbours form a cycle among special materials");
    }
    return true;
  }
};

bool creature_ground(const WorldConfig& cfg, Material m) {
  const auto& e = cfg.effect(m);
  return e.walkable && !e.dieable;
}

}  // namespace

Material creature_host(const WorldConfig& cfg, NpcKind kind) {
  Material m = kind == NpcKind::skeleton ? Material::path : Material::grass;
  if (creature_ground(cfg, m)) return m;
  return cfg.spawn_material();
}

GameState generate_world(const WorldConfig& cfg, std::uint64_t seed, const EngineParams& params) {
  const int n = params.world_size;
  for (int attempt = 0; attempt < params.gen_attempts; ++attempt) {
    const std::uint64_t sub = mix_seed(seed, 1000 + static_cast<std::uint64_t>(attempt));
    Generator g{cfg, params, Rng(mix_seed(sub, 1)), n, std::vector<Cell>(static_cast<std::size_t>(n * n))};
    if (!g.base_terrain(sub)) continue;
    if (!g.specials()) continue;

    // Spawn on the configured material, nearest to the centre, preferring a
    // cell with no deadly terrain around it.
    const Material spawn = cfg.spawn_material();
    const auto& se = cfg.effect(spawn);
    if (!se.walkable || se.dieable) throw GenerationError("player spawn material is not safe to stand on");
    const Pos centre{n / 2, n / 2};
    std::optional<Pos> best;
    int best_score = 0;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        if (g.at({x, y}) != spawn) continue;
        int deadly = 0;
        g.neighbours8({x, y}, [&](Pos q) { deadly += cfg.effect(g.at(q)).dieable; });
        const int dx = x - centre.x;
        const int dy = y - centre.y;
        const int score = dx * dx + dy * dy + (deadly ? 10000 : 0);
        if (!best || score < best_score) {
          best = Pos{x, y};
          best_score = score;
        }
      }
    }
    if (!best) continue;

    GameState s;
    s.cfg = std::make_shared<const WorldConfig>(cfg);
    s.params = params;
    s.seed = seed;
    s.grid = std::move(g.grid);
    s.agent.pos = *best;
    s.rng = Rng(mix_seed(seed, 2));

    const std::array<double, 3> density = {params.initial_creature_density,
                                           params.initial_creature_density * 0.5,
                                           params.initial_creature_density * 2};
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        Pos p{x, y};
        if (!s.free_cell(p) || !creature_ground(cfg, s.cell(p).material)) continue;
        const int d = chebyshev(p, s.agent.pos);
        for (auto kind : {NpcKind::cow, NpcKind::zombie, NpcKind::skeleton}) {
          if (s.cell(p).material != creature_host(cfg, kind)) continue;
          const int min_d = kind == NpcKind::zombie ? 10 : params.spawn_min_distance;
          if (d <= min_d) continue;
          if (g.rng.chance(density[idx(kind)])) {
            spawn_entity(s, kind, p);
            break;
          }
        }
      }
    }
    return s;
  }
  throw GenerationError("could not generate a world within the attempt budget");
}

}  // namespace mars
