#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moose::llm {

/// Content of «name»...«/name», trimmed; nullopt when either delimiter is absent.
std::optional<std::string> find_field(std::string_view raw, std::string_view name);

/// All schema fields, order-insensitive. Throws ParseError (carrying `raw`) on any missing field.
std::map<std::string, std::string> parse_fields(std::string_view raw,
                                                const std::vector<std::string>& schema);

std::string wrap_field(std::string_view name, std::string_view value);

/// Splits an id list on commas, semicolons, whitespace and newlines.
std::vector<std::string> split_id_list(std::string_view s);

}  // namespace moose::llm
