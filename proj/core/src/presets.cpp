#include "pbgfluor/presets.hpp"

#include <algorithm>
#include <utility>

#include "pbgfluor/error.hpp"

namespace pbgfluor::presets {

namespace {

struct Entry {
    std::string_view name;
    std::string_view text;
};

constexpr Entry table[] = {
#include "preset_table.inc"
};

} // namespace

std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto& e : table) out.emplace_back(e.name);
    std::sort(out.begin(), out.end());
    return out;
}

bool exists(std::string_view name) {
    return std::any_of(std::begin(table), std::end(table), [&](const Entry& e) { return e.name == name; });
}

std::string_view text(std::string_view name) {
    for (const auto& e : table)
        if (e.name == name) return e.text;
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw Error("config", "unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

} // namespace pbgfluor::presets
