#include "mars/descriptor.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace mars {

namespace {

constexpr std::array<Pos, 8> kRing = {Pos{-1, 0}, Pos{1, 0},  Pos{0, -1}, Pos{0, 1},
                                      Pos{-1, -1}, Pos{1, -1}, Pos{-1, 1}, Pos{1, 1}};

std::string coord(const std::string& n, Pos d) {
  return n + "(" + std::to_string(d.x) + ", " + std::to_string(d.y) + ")";
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

int chars_per_four_tokens(std::string_view text) { return static_cast<int>((text.size() + 3) / 4); }

int pretoken_count(std::string_view s) {
  int n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    if (s[j] == ' ' && j + 1 < s.size() && !is_space(s[j + 1])) ++j;
    if (is_alpha(s[j])) {
      while (j < s.size() && is_alpha(s[j])) ++j;
    } else if (is_digit(s[j])) {
      const std::size_t start = j;
      while (j < s.size() && is_digit(s[j]) && j - start < 3) ++j;
    } else if (!is_space(s[j])) {
      while (j < s.size() && !is_space(s[j]) && !is_alpha(s[j]) && !is_digit(s[j])) ++j;
    } else {
      while (j < s.size() && is_space(s[j])) ++j;
    }
    ++n;
    i = j;
  }
  return n;
}

std::string TextFrame::text() const {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string cell_name(const ViewCell& c) {
  if (c.creature) return std::string(name(*c.creature));
  if (c.arrow) return "arrow";
  if (c.station != Station::none) return std::string(name(c.station));
  return std::string(name(c.material));
}

TextFrame describe(const Observation& obs) {
  TextFrame f;
  if (obs.last_action) f.lines.push_back("I took action " + std::string(name(*obs.last_action)) + ".");
  f.lines.push_back("I am on the " + std::string(name(obs.standing().material)) + ".");
  f.lines.push_back("I see: (object with coordinate)");
  const ViewCell& front = obs.front();
  f.lines.push_back((front.in_bounds ? cell_name(front) : std::string("nothing")) + " is in front of me.");

  std::vector<std::string> items;
  std::set<std::string> named;
  for (Pos d : kRing) {
    const ViewCell& c = obs.at(d.x, d.y);
    if (!c.in_bounds) continue;
    items.push_back(coord(cell_name(c), d));
    named.insert(cell_name(c));
  }
  // Farther cells by distance, then by dy, then by dx.
  std::vector<Pos> far;
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -4; dx <= 4; ++dx) {
      if (std::max(std::abs(dx), std::abs(dy)) > 1) far.push_back({dx, dy});
    }
  }
  std::stable_sort(far.begin(), far.end(), [](Pos a, Pos b) {
    return std::max(std::abs(a.x), std::abs(a.y)) < std::max(std::abs(b.x), std::abs(b.y));
  });
  for (Pos d : far) {
    const ViewCell& c = obs.at(d.x, d.y);
    if (!c.in_bounds) continue;
    const std::string n = cell_name(c);
    const bool object = c.creature || c.arrow;
    if (!object && named.count(n)) continue;
    items.push_back(coord(n, d));
    named.insert(n);
  }
  std::string list = "<";
  for (std::size_t i = 0; i < items.size(); ++i) list += (i ? ", " : "") + items[i];
  f.lines.push_back(list + ">");

  f.lines.push_back("My status: <health: " + std::to_string(obs.health) + "/9, food: " + std::to_string(obs.food) +
                    "/9, drink: " + std::to_string(obs.drink) + "/9, energy: " + std::to_string(obs.energy) + "/9>");
  std::string inv;
  for (int i = 0; i < kInventorySlots; ++i) {
    const int n = obs.inventory[static_cast<std::size_t>(i)];
    if (n <= 0) continue;
    inv += (inv.empty() ? "" : ", ") + std::string(name(kAllItems[static_cast<std::size_t>(i)])) + ": " +
           std::to_string(n);
  }
  f.lines.push_back(inv.empty() ? "I have nothing in your inventory." : "My inventory: <" + inv + ">");
  return f;
}

int estimate_tokens(std::string_view text, const Tokenizer& tok) { return text.empty() ? 0 : tok(text); }
int estimate_tokens(const TextFrame& frame, const Tokenizer& tok) { return estimate_tokens(frame.text(), tok); }

}  // namespace mars
