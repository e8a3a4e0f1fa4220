#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mars/engine.hpp"

namespace mars {

// Counts tokens of a piece of text.
using Tokenizer = std::function<int(std::string_view)>;

// ceil(chars / 4).
int chars_per_four_tokens(std::string_view text);
// Number of pieces a GPT-style pre-tokenizer splits the text into: words and
// punctuation runs with their leading space, digits in groups of three,
// whitespace runs.
int pretoken_count(std::string_view text);

struct TextFrame {
  std::vector<std::string> lines;

  std::string text() const;  // lines joined by '\n'
  bool operator==(const TextFrame&) const = default;
};

TextFrame describe(const Observation& obs);

// Default tokenizer is pretoken_count.
int estimate_tokens(const TextFrame& frame, const Tokenizer& tok = pretoken_count);
int estimate_tokens(std::string_view text, const Tokenizer& tok = pretoken_count);

// Name shown for a view cell: creature, then arrow, then station, then material.
std::string cell_name(const ViewCell& c);

}  // namespace mars
