#pragma once

#include <string_view>

namespace mars::embedded {

// Text of worlds/<name>.yaml compiled into the binary; throws std::out_of_range.
std::string_view world_text(std::string_view name);
// Text of prompts/<name>.txt compiled into the binary; throws std::out_of_range.
std::string_view prompt_text(std::string_view name);

}  // namespace mars::embedded
