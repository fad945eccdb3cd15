#pragma once

#include <optional>
#include <string>
#include <vector>

namespace misq::prompts {

// System prompts for the three pipeline stages and the two dataset
// generators. The user message carries the #knowledge#/#question#/#choices#
// fields via format_fields().
const std::string &mis_generation_halueval();
const std::string &mis_generation_cqa();
const std::string &detection();
const std::string &correction();
const std::string &answering();

// Renders the field block, e.g.
//   #knowledge#: "..."
//
//   #question#: "..."
std::string format_fields(const std::optional<std::string> &knowledge,
                          const std::string &question,
                          const std::optional<std::vector<std::string>> &choices = std::nullopt);

} // namespace misq::prompts
