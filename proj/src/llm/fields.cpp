#include "moose/llm/fields.hpp"

#include "moose/core/types.hpp"
#include "moose/error.hpp"

namespace moose::llm {

namespace {
constexpr std::string_view kOpen = "\xC2\xAB";   // «
constexpr std::string_view kClose = "\xC2\xBB";  // »
}  // namespace

std::string wrap_field(std::string_view name, std::string_view value) {
  std::string out;
  out.append(kOpen).append(name).append(kClose).append(value);
  out.append(kOpen).append("/").append(name).append(kClose);
  return out;
}

std::optional<std::string> find_field(std::string_view raw, std::string_view name) {
  std::string open, close;
  open.append(kOpen).append(name).append(kClose);
  close.append(kOpen).append("/").append(name).append(kClose);
  const auto b = raw.find(open);
  if (b == std::string_view::npos) return std::nullopt;
  const auto start = b + open.size();
  const auto e = raw.find(close, start);
  if (e == std::string_view::npos) return std::nullopt;
  return trim(raw.substr(start, e - start));
}

std::map<std::string, std::string> parse_fields(std::string_view raw, const std::vector<std::string>& schema) {
  std::map<std::string, std::string> out;
  for (const auto& f : schema) {
    auto v = find_field(raw, f);
    if (!v) throw ParseError("missing field '" + f + "'", std::string(raw));
    out.emplace(f, std::move(*v));
  }
  return out;
}

std::vector<std::string> split_id_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto t = trim(cur);
    // tolerate list decorations such as "1." or "- " or quotes around ids
    while (!t.empty() && (t.front() == '"' || t.front() == '\'' || t.front() == '[')) t.erase(t.begin());
    while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == ']' || t.back() == '.'))
      t.pop_back();
    if (!t.empty() && t != "-") out.push_back(std::move(t));
    cur.clear();
  };
  for (char c : s) {
    if (c == ',' || c == ';' || c == '\n' || c == ' ' || c == '\t' || c == '\r') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace moose::llm
