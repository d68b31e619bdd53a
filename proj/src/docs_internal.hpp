#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tableq::docs::detail {

// Replaces each <ask>...</ask> span with "\x01<mark><index>\x01" and appends
// the raw query text to queries.
std::string extract_ask_spans(std::string_view text, std::vector<std::string>& queries,
                              const std::string& mark);

}  // namespace tableq::docs::detail
