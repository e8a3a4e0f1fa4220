#include "mars/world_config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "embedded_assets.hpp"

namespace mars {

namespace {

std::string join_path(const std::string& a, std::string_view b) {
  return a.empty() ? std::string(b) : a + "." + std::string(b);
}

std::string scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, "expected a scalar");
  return n.Scalar();
}

bool as_bool(const YAML::Node& n, const std::string& path) {
  const std::string s = scalar(n, path);
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  throw ConfigError(path, "expected true or false, got '" + s + "'");
}

int as_int(const YAML::Node& n, const std::string& path, int lo, int hi) {
  const std::string s = scalar(n, path);
  int v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e) throw ConfigError(path, "expected an integer, got '" + s + "'");
  if (v < lo || v > hi) {
    throw ConfigError(path, "value " + std::to_string(v) + " out of range [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

double as_probability(const YAML::Node& n, const std::string& path) {
  const std::string s = scalar(n, path);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError(path, "expected a probability, got '" + s + "'");
  }
  if (!(v > 0.0 && v <= 1.0)) throw ConfigError(path, "probability must be in (0, 1]");
  return v;
}

bool is_nullish(const YAML::Node& n) {
  if (!n || n.IsNull()) return true;
  if (n.IsScalar()) {
    const auto& s = n.Scalar();
    return s == "null" || s == "None" || s == "none" || s == "~" || s.empty();
  }
  if (n.IsMap() && n.size() == 0) return true;
  return false;
}

const YAML::Node& require_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) throw ConfigError(path, "expected a mapping");
  return n;
}

Material material_of(const YAML::Node& n, const std::string& path) {
  auto s = scalar(n, path);
  auto m = parse_material(s);
  if (!m) throw ConfigError(path, "unknown material '" + s + "'");
  return *m;
}

Item item_of(const std::string& s, const std::string& path, bool allow_drink) {
  auto i = parse_item(s);
  if (!i || (!allow_drink && *i == Item::drink)) throw ConfigError(path, "unknown item '" + s + "'");
  return *i;
}

// Visit every key of a mapping once, rejecting duplicates and unknown keys.
template <typename F>
void for_each_key(const YAML::Node& map, const std::string& path, F&& f) {
  require_map(map, path);
  std::set<std::string> seen;
  for (const auto& kv : map) {
    const std::string key = scalar(kv.first, path);
    if (!seen.insert(key).second) throw ConfigError(join_path(path, key), "duplicate key");
    f(key, kv.second, join_path(path, key));
  }
}

// Reads a fixed set of named fields from a mapping. Every field must appear.
class FieldReader {
 public:
  FieldReader(const YAML::Node& map, std::string path,
              std::map<std::string, std::string> aliases = {})
      : path_(std::move(path)) {
    for_each_key(map, path_, [&](const std::string& key, const YAML::Node& v, const std::string&) {
      auto it = aliases.find(key);
      const std::string canonical = it == aliases.end() ? key : it->second;
      if (fields_.count(canonical)) throw ConfigError(join_path(path_, key), "duplicate field");
      fields_.emplace(canonical, v);
    });
  }

  const YAML::Node& get(const std::string& key) {
    auto it = fields_.find(key);
    if (it == fields_.end()) throw ConfigError(join_path(path_, key), "missing field");
    used_.insert(key);
    return it->second;
  }

  bool boolean(const std::string& key) { return as_bool(get(key), join_path(path_, key)); }
  int func(const std::string& key) { return as_int(get(key), join_path(path_, key), -1, 1); }

  void finish() const {
    for (const auto& [k, v] : fields_) {
      if (!used_.count(k)) throw ConfigError(join_path(path_, k), "unknown field");
    }
  }

 private:
  std::string path_;
  std::map<std::string, YAML::Node> fields_;
  std::set<std::string> used_;
};

ItemCounts parse_counts(const YAML::Node& n, const std::string& path, int lo) {
  ItemCounts out;
  if (is_nullish(n)) return out;
  for_each_key(n, path, [&](const std::string& key, const YAML::Node& v, const std::string& p) {
    out[item_of(key, p, false)] = as_int(v, p, lo, 9);
  });
  return out;
}

std::map<Item, Yield> parse_receive(const YAML::Node& n, const std::string& path) {
  std::map<Item, Yield> out;
  if (is_nullish(n)) return out;
  for_each_key(n, path, [&](const std::string& key, const YAML::Node& v, const std::string& p) {
    Item item = item_of(key, p, true);
    Yield y;
    if (v.IsMap()) {
      FieldReader r(v, p);
      y.amount = as_int(r.get("amount"), join_path(p, "amount"), 1, 9);
      y.probability = as_probability(r.get("probability"), join_path(p, "probability"));
      r.finish();
    } else {
      y.amount = as_int(v, p, 1, 9);
    }
    out[item] = y;
  });
  return out;
}

template <typename T, std::size_t N, typename ParseFn>
std::array<T, N> parse_keyed_section(const YAML::Node& n, const std::string& path,
                                     const std::array<std::string_view, N>& keys, ParseFn&& parse) {
  std::array<T, N> out{};
  std::array<bool, N> seen{};
  for_each_key(n, path, [&](const std::string& key, const YAML::Node& v, const std::string& p) {
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) throw ConfigError(p, "unknown key '" + key + "'");
    const auto i = static_cast<std::size_t>(it - keys.begin());
    out[i] = parse(v, p);
    seen[i] = true;
  });
  for (std::size_t i = 0; i < N; ++i) {
    if (!seen[i]) throw ConfigError(join_path(path, keys[i]), "missing entry");
  }
  return out;
}

template <typename E, std::size_t N>
std::array<std::string_view, N> names_of(const std::array<E, N>& values) {
  std::array<std::string_view, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = name(values[i]);
  return out;
}

TerrainEffect parse_effect(const YAML::Node& n, const std::string& path) {
  FieldReader r(n, path);
  TerrainEffect e;
  e.walkable = r.boolean("walkable");
  e.walk_health = r.func("walk_health");
  e.dieable = r.boolean("dieable");
  r.finish();
  return e;
}

NpcSpec parse_npc(const YAML::Node& n, const std::string& path) {
  FieldReader r(n, path);
  NpcSpec s;
  s.eatable = r.boolean("eatable");
  s.arrowable = r.boolean("arrowable");
  s.closable = r.boolean("closable");
  s.can_walk = r.boolean("can_walk");
  s.attackable = r.boolean("attackable");
  s.defeatable = r.boolean("defeatable");
  s.eat_health_damage_func = r.func("eat_health_damage_func");
  s.inc_food_func = r.func("inc_food_func");
  s.inc_thirst_func = r.func("inc_thirst_func");
  s.arrow_damage_func = r.func("arrow_damage_func");
  s.closable_health_damage_func = r.func("closable_health_damage_func");
  r.finish();
  return s;
}

DrinkSpec parse_drink(const YAML::Node& n, const std::string& path) {
  FieldReader r(n, path, {{"inc_damage_func", "inc_health_func"}});
  DrinkSpec d;
  d.inc_drink_func = r.func("inc_drink_func");
  d.inc_health_func = r.func("inc_health_func");
  d.inc_food_func = r.func("inc_food_func");
  r.finish();
  return d;
}

CollectRule parse_collect_rule(Material target, const YAML::Node& n, const std::string& path) {
  FieldReader r(n, path);
  CollectRule rule;
  rule.target = target;
  rule.require = parse_counts(r.get("require"), join_path(path, "require"), 1);
  rule.receive = parse_receive(r.get("receive"), join_path(path, "receive"));
  const std::string lpath = join_path(path, "leaves");
  FieldReader leaves(r.get("leaves"), lpath);
  rule.leaves_material = material_of(leaves.get("material"), join_path(lpath, "material"));
  const YAML::Node& obj = leaves.get("object");
  const std::string opath = join_path(lpath, "object");
  if (!is_nullish(obj)) {
    for_each_key(obj, opath, [&](const std::string& key, const YAML::Node& v, const std::string& p) {
      auto kind = parse_npc_kind(key);
      if (!kind || *kind == NpcKind::plant) throw ConfigError(p, "unknown creature '" + key + "'");
      rule.leaves_object[*kind] = as_probability(v, p);
    });
  }
  leaves.finish();
  r.finish();
  return rule;
}

std::vector<Material> parse_where(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(path, "expected a list of materials");
  std::vector<Material> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(material_of(n[i], path + "[" + std::to_string(i) + "]"));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PlaceRule parse_place_rule(Placeable p, const YAML::Node& n, const std::string& path) {
  FieldReader r(n, path);
  PlaceRule rule;
  rule.placed = p;
  rule.uses = parse_counts(r.get("uses"), join_path(path, "uses"), 1);
  rule.where = parse_where(r.get("where"), join_path(path, "where"));
  const std::string t = scalar(r.get("type"), join_path(path, "type"));
  if (t == "material") {
    rule.kind = PlaceKind::material;
  } else if (t == "object") {
    rule.kind = PlaceKind::object;
  } else {
    throw ConfigError(join_path(path, "type"), "expected material or object, got '" + t + "'");
  }
  r.finish();
  return rule;
}

MakeRule parse_make_rule(Item tool, const YAML::Node& n, const std::string& path) {
  FieldReader r(n, path);
  MakeRule rule;
  rule.tool = tool;
  rule.uses = parse_counts(r.get("uses"), join_path(path, "uses"), 1);
  const YAML::Node& nearby = r.get("nearby");
  const std::string npath = join_path(path, "nearby");
  if (!nearby.IsSequence()) throw ConfigError(npath, "expected a list");
  for (std::size_t i = 0; i < nearby.size(); ++i) {
    const std::string s = scalar(nearby[i], npath);
    if (s == "table") {
      rule.nearby.push_back(Station::table);
    } else if (s == "furnace") {
      rule.nearby.push_back(Station::furnace);
    } else {
      throw ConfigError(npath + "[" + std::to_string(i) + "]", "unknown station '" + s + "'");
    }
  }
  std::sort(rule.nearby.begin(), rule.nearby.end());
  rule.nearby.erase(std::unique(rule.nearby.begin(), rule.nearby.end()), rule.nearby.end());
  rule.gives = as_int(r.get("gives"), join_path(path, "gives"), 1, 9);
  r.finish();
  return rule;
}

// Section name -> canonical section name.
const std::map<std::string, std::string>& section_aliases() {
  static const std::map<std::string, std::string> m = {
      {"terrain_neighbour", "terrain_neighbour"},
      {"terrain_effect", "terrain_effect"},
      {"walkable_effect", "terrain_effect"},
      {"npc_objects", "npc"},
      {"npc", "npc"},
      {"drink", "drink"},
      {"ignitability", "ignitability"},
      {"collect", "collect"},
      {"place", "place"},
      {"make", "make"}};
  return m;
}

constexpr std::array<std::string_view, 8> kSectionOrder = {
    "terrain_neighbour", "terrain_effect", "npc", "drink", "ignitability", "collect", "place",
    "make"};

}  // namespace

bool PlaceRule::allows(Material m) const {
  return std::binary_search(where.begin(), where.end(), m);
}

bool MakeRule::needs(Station s) const {
  return std::find(nearby.begin(), nearby.end(), s) != nearby.end();
}

bool WorldConfig::ignitable(Item i) const {
  auto it = std::find(kIgnitableItems.begin(), kIgnitableItems.end(), i);
  if (it == kIgnitableItems.end()) return false;
  return ignitability[static_cast<std::size_t>(it - kIgnitableItems.begin())];
}

void WorldConfig::set_ignitable(Item i, bool v) {
  auto it = std::find(kIgnitableItems.begin(), kIgnitableItems.end(), i);
  if (it == kIgnitableItems.end()) throw std::invalid_argument("item has no ignitability");
  ignitability[static_cast<std::size_t>(it - kIgnitableItems.begin())] = v;
}

const CollectRule* WorldConfig::collect_rule(Material m) const {
  for (const auto& r : collect) {
    if (r.target == m) return &r;
  }
  return nullptr;
}

const PlaceRule& WorldConfig::place_rule(Placeable p) const { return place.at(idx(p)); }

const MakeRule& WorldConfig::make_rule(Item tool) const {
  return make.at(static_cast<std::size_t>(idx(tool) - idx(Item::wood_pickaxe)));
}

void normalize_inert(WorldConfig& cfg) {
  for (auto& e : cfg.terrain_effect) {
    if (!e.walkable) {
      e.walk_health = 0;
      e.dieable = false;
    }
  }
}

void validate(const WorldConfig& cfg) {
  if (cfg.place.size() != 4) throw ConfigError("place", "expected 4 rules");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& r = cfg.place[i];
    const std::string path = "place." + std::string(name(r.placed));
    if (r.placed != kAllPlaceables[i]) throw ConfigError("place", "rules out of order");
    const auto want = r.placed == Placeable::plant ? PlaceKind::object : PlaceKind::material;
    if (r.kind != want) throw ConfigError(path + ".type", "wrong placement type");
    if (r.where.empty()) throw ConfigError(path + ".where", "empty placement set");
    if (r.uses.count(Item::drink)) throw ConfigError(path + ".uses", "drink cannot be spent");
  }
  if (cfg.make.size() != kToolItems.size()) throw ConfigError("make", "expected 6 rules");
  for (std::size_t i = 0; i < kToolItems.size(); ++i) {
    const auto& r = cfg.make[i];
    if (r.tool != kToolItems[i]) throw ConfigError("make", "rules out of order");
    if (r.uses.count(Item::drink)) throw ConfigError("make." + std::string(name(r.tool)), "drink cannot be spent");
  }
  std::set<Material> targets;
  for (const auto& r : cfg.collect) {
    const std::string path = "collect." + std::string(name(r.target));
    if (!targets.insert(r.target).second) throw ConfigError(path, "duplicate collect rule");
    if (r.require.count(Item::drink)) throw ConfigError(path + ".require", "drink is not a tool");
    for (const auto& [item, y] : r.receive) {
      if (!(y.probability > 0.0 && y.probability <= 1.0) || y.amount < 1) {
        throw ConfigError(path + ".receive." + std::string(name(item)), "invalid yield");
      }
    }
    for (const auto& [kind, p] : r.leaves_object) {
      if (kind == NpcKind::plant || !(p > 0.0 && p <= 1.0)) {
        throw ConfigError(path + ".leaves.object", "invalid creature spawn");
      }
    }
  }
  for (int i = 0; i < kMaterialCount; ++i) {
    const auto& e = cfg.terrain_effect[i];
    if (e.walk_health < -1 || e.walk_health > 1) {
      throw ConfigError("terrain_effect." + std::string(name(static_cast<Material>(i))),
                        "walk_health out of range");
    }
  }
}

WorldConfig parse_config(std::string_view text, const WorldConfig* base) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  if (root && !root.IsNull() && !root.IsMap()) throw ConfigError("", "document must be a mapping");

  std::map<std::string, YAML::Node> sections;
  if (root && root.IsMap()) {
    for_each_key(root, "", [&](const std::string& key, const YAML::Node& v, const std::string& p) {
      auto it = section_aliases().find(key);
      if (it == section_aliases().end()) throw ConfigError(p, "unknown section");
      if (sections.count(it->second)) throw ConfigError(p, "duplicate section");
      sections.emplace(it->second, v);
    });
  }
  if (!base) {
    for (auto s : kSectionOrder) {
      if (!sections.count(std::string(s))) throw ConfigError("", "missing section " + std::string(s));
    }
  }

  WorldConfig cfg = base ? *base : WorldConfig{};
  auto has = [&](const char* s) { return sections.count(s) != 0; };

  if (has("terrain_neighbour")) {
    cfg.terrain_neighbour = parse_keyed_section<Material>(
        sections["terrain_neighbour"], "terrain_neighbour", names_of(kAllNeighbourKeys),
        [](const YAML::Node& v, const std::string& p) { return material_of(v, p); });
  }
  if (has("terrain_effect")) {
    cfg.terrain_effect = parse_keyed_section<TerrainEffect>(
        sections["terrain_effect"], "terrain_effect", names_of(kAllMaterials), parse_effect);
  }
  if (has("npc")) {
    cfg.npc = parse_keyed_section<NpcSpec>(sections["npc"], "npc_objects", names_of(kAllNpcKinds),
                                           parse_npc);
  }
  if (has("drink")) {
    cfg.drink = parse_keyed_section<DrinkSpec>(sections["drink"], "drink",
                                               std::array<std::string_view, 2>{"water", "lava"},
                                               parse_drink);
  }
  if (has("ignitability")) {
    cfg.ignitability = parse_keyed_section<bool>(
        sections["ignitability"], "ignitability", names_of(kIgnitableItems),
        [](const YAML::Node& v, const std::string& p) { return as_bool(v, p); });
  }
  if (has("collect")) {
    cfg.collect.clear();
    for_each_key(sections["collect"], "collect",
                 [&](const std::string& key, const YAML::Node& v, const std::string& p) {
                   auto m = parse_material(key);
                   if (!m) throw ConfigError(p, "unknown material '" + key + "'");
                   cfg.collect.push_back(parse_collect_rule(*m, v, p));
                 });
  }
  if (has("place")) {
    cfg.place = [&] {
      auto arr = parse_keyed_section<PlaceRule>(
          sections["place"], "place", names_of(kAllPlaceables),
          [](const YAML::Node& v, const std::string& p) {
            auto key = p.substr(p.rfind('.') + 1);
            return parse_place_rule(*parse_placeable(key), v, p);
          });
      return std::vector<PlaceRule>(arr.begin(), arr.end());
    }();
  }
  if (has("make")) {
    cfg.make = [&] {
      auto arr = parse_keyed_section<MakeRule>(
          sections["make"], "make", names_of(kToolItems),
          [](const YAML::Node& v, const std::string& p) {
            auto key = p.substr(p.rfind('.') + 1);
            return parse_make_rule(*parse_item(key), v, p);
          });
      return std::vector<MakeRule>(arr.begin(), arr.end());
    }();
  }
  normalize_inert(cfg);
  validate(cfg);
  return cfg;
}

std::string format_probability(double p) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
  if (ec != std::errc{}) return std::to_string(p);
  std::string s(buf, end);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string render_bool(bool b) { return b ? "true" : "false"; }

std::string render_counts(const ItemCounts& c) {
  std::string s = "{";
  bool first = true;
  for (const auto& [item, n] : c) {
    if (!first) s += ", ";
    first = false;
    s += std::string(name(item)) + ": " + std::to_string(n);
  }
  return s + "}";
}

std::string render_yield(const Yield& y) {
  if (y.probability == 1.0) return std::to_string(y.amount);
  return "{amount: " + std::to_string(y.amount) +
         ", probability: " + format_probability(y.probability) + "}";
}

std::string render_receive(const std::map<Item, Yield>& r) {
  std::string s = "{";
  bool first = true;
  for (const auto& [item, y] : r) {
    if (!first) s += ", ";
    first = false;
    s += std::string(name(item)) + ": " + render_yield(y);
  }
  return s + "}";
}

std::string render_objects(const std::map<NpcKind, double>& o) {
  if (o.empty()) return "null";
  std::string s = "{";
  bool first = true;
  for (const auto& [k, p] : o) {
    if (!first) s += ", ";
    first = false;
    s += std::string(name(k)) + ": " + format_probability(p);
  }
  return s + "}";
}

std::string render_materials(const std::vector<Material>& ms) {
  std::string s = "[";
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (i) s += ", ";
    s += name(ms[i]);
  }
  return s + "]";
}

std::string render_stations(const std::vector<Station>& ss) {
  std::string s = "[";
  for (std::size_t i = 0; i < ss.size(); ++i) {
    if (i) s += ", ";
    s += name(ss[i]);
  }
  return s + "]";
}

std::string signed_str(int v) { return v > 0 ? "+" + std::to_string(v) : std::to_string(v); }

}  // namespace

std::string serialize_config(const WorldConfig& cfg) {
  std::ostringstream o;
  o << "terrain_neighbour:\n";
  for (auto k : kAllNeighbourKeys) o << "  " << name(k) << ": " << name(cfg.neighbour(k)) << "\n";
  o << "terrain_effect:\n";
  for (auto m : kAllMaterials) {
    const auto& e = cfg.effect(m);
    o << "  " << name(m) << ": {walkable: " << render_bool(e.walkable)
      << ", walk_health: " << e.walk_health << ", dieable: " << render_bool(e.dieable) << "}\n";
  }
  o << "npc_objects:\n";
  for (auto k : kAllNpcKinds) {
    const auto& s = cfg.npc_spec(k);
    o << "  " << name(k) << ":\n"
      << "    eatable: " << render_bool(s.eatable) << "\n"
      << "    defeatable: " << render_bool(s.defeatable) << "\n"
      << "    attackable: " << render_bool(s.attackable) << "\n"
      << "    arrowable: " << render_bool(s.arrowable) << "\n"
      << "    closable: " << render_bool(s.closable) << "\n"
      << "    can_walk: " << render_bool(s.can_walk) << "\n"
      << "    closable_health_damage_func: " << s.closable_health_damage_func << "\n"
      << "    eat_health_damage_func: " << s.eat_health_damage_func << "\n"
      << "    arrow_damage_func: " << s.arrow_damage_func << "\n"
      << "    inc_food_func: " << s.inc_food_func << "\n"
      << "    inc_thirst_func: " << s.inc_thirst_func << "\n";
  }
  o << "drink:\n";
  for (auto l : {Liquid::water, Liquid::lava}) {
    const auto& d = cfg.drink_spec(l);
    o << "  " << name(l) << ":\n"
      << "    inc_drink_func: " << d.inc_drink_func << "\n"
      << "    inc_health_func: " << d.inc_health_func << "\n"
      << "    inc_food_func: " << d.inc_food_func << "\n";
  }
  o << "ignitability:\n";
  for (auto i : kIgnitableItems) o << "  " << name(i) << ": " << render_bool(cfg.ignitable(i)) << "\n";
  o << "collect:\n";
  for (const auto& r : cfg.collect) {
    o << "  " << name(r.target) << ": {require: " << render_counts(r.require)
      << ", receive: " << render_receive(r.receive) << ", leaves: {material: "
      << name(r.leaves_material) << ", object: " << render_objects(r.leaves_object) << "}}\n";
  }
  o << "place:\n";
  for (const auto& r : cfg.place) {
    o << "  " << name(r.placed) << ": {uses: " << render_counts(r.uses)
      << ", where: " << render_materials(r.where)
      << ", type: " << (r.kind == PlaceKind::material ? "material" : "object") << "}\n";
  }
  o << "make:\n";
  for (const auto& r : cfg.make) {
    o << "  " << name(r.tool) << ": {uses: " << render_counts(r.uses)
      << ", nearby: " << render_stations(r.nearby) << ", gives: " << r.gives << "}\n";
  }
  return o.str();
}

bool is_builtin_world(std::string_view n) {
  return std::find(kBuiltinWorldNames.begin(), kBuiltinWorldNames.end(), n) !=
         kBuiltinWorldNames.end();
}

std::string_view builtin_world_text(std::string_view n) {
  if (!is_builtin_world(n)) throw std::out_of_range("unknown world '" + std::string(n) + "'");
  return embedded::world_text(n);
}

const WorldConfig& crafter_default() {
  static const WorldConfig cfg = parse_config(embedded::world_text("default"));
  return cfg;
}

const WorldConfig& builtin_world(std::string_view n) {
  static const std::map<std::string, WorldConfig, std::less<>> worlds = [] {
    std::map<std::string, WorldConfig, std::less<>> m;
    for (auto w : kBuiltinWorldNames) {
      m.emplace(std::string(w), w == "default" ? crafter_default()
                                               : parse_config(embedded::world_text(w),
                                                              &crafter_default()));
    }
    return m;
  }();
  auto it = worlds.find(n);
  if (it == worlds.end()) throw std::out_of_range("unknown world '" + std::string(n) + "'");
  return it->second;
}

WorldConfig load_world_text(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  if (!root || root.IsNull() || (root.IsMap() && root.size() == 0)) {
    throw ConfigError("", "missing section terrain_neighbour");
  }
  return parse_config(text, &crafter_default());
}

WorldConfig load_world_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_world_text(ss.str());
}

WorldConfig resolve_world(const std::string& name_or_path) {
  if (is_builtin_world(name_or_path)) return builtin_world(name_or_path);
  return load_world_file(name_or_path);
}

// ---- diffing ------------------------------------------------------------

namespace {

std::string change_phrase(int v) {
  if (v == 0) return "does not change";
  return "changes by " + signed_str(v);
}

std::string yield_phrase(const Yield& y, Item item) {
  std::string s = std::to_string(y.amount) + " " + std::string(name(item));
  if (y.probability != 1.0) s += " with probability " + format_probability(y.probability);
  return s;
}

std::string require_phrase(const ItemCounts& req) {
  if (req.empty()) return "no tool";
  std::string s;
  bool first = true;
  for (const auto& [item, n] : req) {
    if (!first) s += " and ";
    first = false;
    s += std::string(name(item));
    if (n > 1) s += " x" + std::to_string(n);
  }
  return s;
}

std::string uses_phrase(const ItemCounts& uses) {
  if (uses.empty()) return "nothing";
  std::string s;
  bool first = true;
  for (const auto& [item, n] : uses) {
    if (!first) s += " and ";
    first = false;
    s += std::to_string(n) + " " + std::string(name(item));
  }
  return s;
}

std::string stations_phrase(const std::vector<Station>& ss) {
  if (ss.empty()) return "no station";
  std::string s = "a nearby ";
  for (std::size_t i = 0; i < ss.size(); ++i) {
    if (i) s += " and ";
    s += name(ss[i]);
  }
  return s;
}

std::string materials_phrase(const std::vector<Material>& ms) {
  std::string s;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (i) s += (i + 1 == ms.size()) ? " or " : ", ";
    s += name(ms[i]);
  }
  return s;
}

class Differ {
 public:
  std::vector<RuleDelta> out;

  void add(std::string path, std::string oldv, std::string newv, std::string text) {
    if (oldv == newv) return;
    out.push_back({std::move(path), std::move(oldv), std::move(newv), std::move(text)});
  }
};

}  // namespace

std::vector<RuleDelta> diff_configs(const WorldConfig& a, const WorldConfig& b) {
  Differ d;
  for (auto k : kAllNeighbourKeys) {
    const auto ov = std::string(name(a.neighbour(k)));
    const auto nv = std::string(name(b.neighbour(k)));
    std::string text = k == NeighbourKey::player
                           ? "the player spawns on " + nv
                           : std::string(name(k)) + " is found next to " + nv;
    d.add("terrain_neighbour." + std::string(name(k)), ov, nv, text);
  }
  for (auto m : kAllMaterials) {
    const auto& e0 = a.effect(m);
    const auto& e1 = b.effect(m);
    const std::string p = "terrain_effect." + std::string(name(m));
    const std::string mn(name(m));
    d.add(p + ".walkable", render_bool(e0.walkable), render_bool(e1.walkable),
          mn + (e1.walkable ? " is walkable" : " is not walkable"));
    d.add(p + ".walk_health", std::to_string(e0.walk_health), std::to_string(e1.walk_health),
          "walking on " + mn + " " + change_phrase(e1.walk_health) + " health");
    d.add(p + ".dieable", render_bool(e0.dieable), render_bool(e1.dieable),
          "stepping onto " + mn + (e1.dieable ? " is deadly" : " is not deadly"));
  }
  for (auto k : kAllNpcKinds) {
    const auto& s0 = a.npc_spec(k);
    const auto& s1 = b.npc_spec(k);
    const std::string kn(name(k));
    const std::string p = "npc." + kn;
    auto flag = [&](const char* field, bool v0, bool v1, const std::string& yes,
                    const std::string& no) {
      d.add(p + "." + field, render_bool(v0), render_bool(v1), kn + " " + (v1 ? yes : no));
    };
    auto func = [&](const char* field, int v0, int v1, const std::string& what) {
      d.add(p + "." + field, std::to_string(v0), std::to_string(v1),
            what + " " + change_phrase(v1) + (std::string(field) == "inc_food_func"
                                                  ? " food"
                                                  : std::string(field) == "inc_thirst_func"
                                                        ? " drink"
                                                        : " health"));
    };
    flag("eatable", s0.eatable, s1.eatable, "is edible", "is not edible");
    flag("defeatable", s0.defeatable, s1.defeatable, "can be defeated", "cannot be defeated");
    flag("attackable", s0.attackable, s1.attackable, "can be attacked with weapons",
         "cannot be attacked with weapons");
    flag("arrowable", s0.arrowable, s1.arrowable, "shoots arrows", "does not shoot arrows");
    flag("closable", s0.closable, s1.closable, "approaches the player",
         "does not approach the player");
    flag("can_walk", s0.can_walk, s1.can_walk, "can move", "cannot move");
    func("closable_health_damage_func", s0.closable_health_damage_func,
         s1.closable_health_damage_func, "being next to " + kn);
    func("eat_health_damage_func", s0.eat_health_damage_func, s1.eat_health_damage_func,
         "eating " + kn);
    func("arrow_damage_func", s0.arrow_damage_func, s1.arrow_damage_func,
         "being shot by " + kn);
    func("inc_food_func", s0.inc_food_func, s1.inc_food_func, "eating " + kn);
    func("inc_thirst_func", s0.inc_thirst_func, s1.inc_thirst_func, "eating " + kn);
  }
  for (auto l : {Liquid::water, Liquid::lava}) {
    const auto& d0 = a.drink_spec(l);
    const auto& d1 = b.drink_spec(l);
    const std::string ln(name(l));
    const std::string p = "drink." + ln;
    d.add(p + ".inc_drink_func", std::to_string(d0.inc_drink_func),
          std::to_string(d1.inc_drink_func),
          "drinking " + ln + " " + change_phrase(d1.inc_drink_func) + " drink");
    d.add(p + ".inc_health_func", std::to_string(d0.inc_health_func),
          std::to_string(d1.inc_health_func),
          "drinking " + ln + " " + change_phrase(d1.inc_health_func) + " health");
    d.add(p + ".inc_food_func", std::to_string(d0.inc_food_func),
          std::to_string(d1.inc_food_func),
          "drinking " + ln + " " + change_phrase(d1.inc_food_func) + " food");
  }
  for (auto i : kIgnitableItems) {
    d.add("ignitability." + std::string(name(i)), render_bool(a.ignitable(i)),
          render_bool(b.ignitable(i)),
          std::string(name(i)) + (b.ignitable(i) ? " is flammable" : " is not flammable"));
  }
  for (auto m : kAllMaterials) {
    const CollectRule* r0 = a.collect_rule(m);
    const CollectRule* r1 = b.collect_rule(m);
    if (!r0 && !r1) continue;
    const std::string mn(name(m));
    const std::string p = "collect." + mn;
    if (!r0 || !r1) {
      d.add(p, r0 ? "rule" : "", r1 ? "rule" : "",
            r1 ? mn + " can be collected" : mn + " cannot be collected");
      if (!r0 || !r1) {
        if (!r1) continue;
      }
    }
    static const CollectRule empty_rule{};
    const CollectRule& c0 = r0 ? *r0 : empty_rule;
    const CollectRule& c1 = *r1;
    d.add(p + ".require", r0 ? render_counts(c0.require) : "", render_counts(c1.require),
          "collecting " + mn + " requires " + require_phrase(c1.require));
    std::set<Item> items;
    for (const auto& [i, y] : c0.receive) items.insert(i);
    for (const auto& [i, y] : c1.receive) items.insert(i);
    for (Item i : items) {
      auto i0 = c0.receive.find(i);
      auto i1 = c1.receive.find(i);
      const std::string ov = i0 == c0.receive.end() ? "" : render_yield(i0->second);
      const std::string nv = i1 == c1.receive.end() ? "" : render_yield(i1->second);
      const std::string text = i1 == c1.receive.end()
                                   ? "collecting " + mn + " yields no " + std::string(name(i))
                                   : "collecting " + mn + " yields " + yield_phrase(i1->second, i);
      d.add(p + ".receive." + std::string(name(i)), ov, nv, text);
    }
    d.add(p + ".leaves.material", r0 ? std::string(name(c0.leaves_material)) : "",
          std::string(name(c1.leaves_material)),
          "collecting " + mn + " leaves " + std::string(name(c1.leaves_material)));
    std::set<NpcKind> kinds;
    for (const auto& [k, q] : c0.leaves_object) kinds.insert(k);
    for (const auto& [k, q] : c1.leaves_object) kinds.insert(k);
    for (NpcKind k : kinds) {
      auto k0 = c0.leaves_object.find(k);
      auto k1 = c1.leaves_object.find(k);
      const std::string ov = k0 == c0.leaves_object.end() ? "" : format_probability(k0->second);
      const std::string nv = k1 == c1.leaves_object.end() ? "" : format_probability(k1->second);
      const std::string text =
          k1 == c1.leaves_object.end()
              ? "collecting " + mn + " never leaves a " + std::string(name(k))
              : "collecting " + mn + " leaves a " + std::string(name(k)) + " with probability " +
                    nv;
      d.add(p + ".leaves.object." + std::string(name(k)), ov, nv, text);
    }
  }
  for (auto pl : kAllPlaceables) {
    const auto& r0 = a.place_rule(pl);
    const auto& r1 = b.place_rule(pl);
    const std::string pn(name(pl));
    const std::string p = "place." + pn;
    d.add(p + ".uses", render_counts(r0.uses), render_counts(r1.uses),
          "placing " + pn + " uses " + uses_phrase(r1.uses));
    d.add(p + ".where", render_materials(r0.where), render_materials(r1.where),
          pn + " can be placed on " + materials_phrase(r1.where));
  }
  for (auto t : kToolItems) {
    const auto& r0 = a.make_rule(t);
    const auto& r1 = b.make_rule(t);
    const std::string tn(name(t));
    const std::string p = "make." + tn;
    d.add(p + ".uses", render_counts(r0.uses), render_counts(r1.uses),
          "making " + tn + " uses " + uses_phrase(r1.uses));
    d.add(p + ".nearby", render_stations(r0.nearby), render_stations(r1.nearby),
          "making " + tn + " requires " + stations_phrase(r1.nearby));
    d.add(p + ".gives", std::to_string(r0.gives), std::to_string(r1.gives),
          "making " + tn + " gives " + std::to_string(r1.gives));
  }
  return std::move(d.out);
}

}  // namespace mars
