#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "movidx/document.hpp"
#include "movidx/error.hpp"

namespace movidx {

// ─── Story-unit tree ─────────────────────────────────────────────
//
// A storyboard decomposes one multimedia story into recursive
// Begin/Middle/End units. Each unit is addressed by its path code
// ("B1,M2,E3"); stage numbers are always consecutive from 1, so the
// address stores roles only and derives the stages from position.

enum class Role { Begin = 0, Middle = 1, End = 2 };

inline char role_code(Role r) {
    switch (r) {
        case Role::Begin: return 'B';
        case Role::Middle: return 'M';
        case Role::End: return 'E';
    }
    return '?';
}

inline std::optional<Role> role_from_code(char c) {
    switch (c) {
        case 'B': return Role::Begin;
        case 'M': return Role::Middle;
        case 'E': return Role::End;
        default: return std::nullopt;
    }
}

class StoryAddress {
public:
    StoryAddress() = default;
    explicit StoryAddress(std::vector<Role> roles) : roles_(std::move(roles)) {}

    bool empty() const { return roles_.empty(); }
    std::size_t depth() const { return roles_.size(); }
    Role role_at(std::size_t i) const { return roles_[i]; }
    Role last_role() const { return roles_.back(); }
    const std::vector<Role>& roles() const { return roles_; }

    StoryAddress child(Role r) const {
        auto ext = roles_;
        ext.push_back(r);
        return StoryAddress(std::move(ext));
    }

    StoryAddress parent() const {
        auto up = roles_;
        up.pop_back();
        return StoryAddress(std::move(up));
    }

    friend bool operator==(const StoryAddress&, const StoryAddress&) = default;
    friend auto operator<=>(const StoryAddress&, const StoryAddress&) = default;

private:
    std::vector<Role> roles_;
};

// Canonical form: roles and stages joined with commas, no spaces ("B1,M2").
inline std::string format_address(const StoryAddress& addr) {
    std::string out;
    for (std::size_t i = 0; i < addr.depth(); ++i) {
        if (i > 0) out += ',';
        out += role_code(addr.role_at(i));
        out += std::to_string(i + 1);
    }
    return out;
}

// Accepts the canonical form plus surrounding whitespace ("B1, M2").
inline StoryAddress parse_address(const std::string& text) {
    std::vector<Role> roles;
    std::size_t pos = 0;
    std::size_t index = 0;
    while (true) {
        std::size_t end = text.find(',', pos);
        std::string token = text.substr(pos, end == std::string::npos ? end : end - pos);
        auto first = token.find_first_not_of(" \t");
        auto last = token.find_last_not_of(" \t");
        if (first == std::string::npos) {
            throw ParseError("address '" + text + "': empty token");
        }
        token = token.substr(first, last - first + 1);
        auto role = role_from_code(token[0]);
        if (!role) {
            throw ParseError("address '" + text + "': unknown role letter in '" + token + "'");
        }
        int stage = 0;
        auto [ptr, ec] = std::from_chars(token.data() + 1, token.data() + token.size(), stage);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            throw ParseError("address '" + text + "': bad stage in '" + token + "'");
        }
        if (stage != static_cast<int>(index) + 1) {
            throw ParseError("address '" + text + "': non-consecutive stage in '" + token + "'");
        }
        roles.push_back(*role);
        ++index;
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    return StoryAddress(std::move(roles));
}

struct StoryUnit {
    StoryAddress address;
    std::optional<std::string> problem;
    std::string narrative;
    bool instantiated = false;
    // Children keyed by role, kept sorted B, M, E; the key can disagree with
    // the child's stored address only on hand-corrupted trees, which
    // validate_storyboard reports.
    std::vector<std::pair<Role, StoryUnit>> children;

    const StoryUnit* child(Role r) const {
        for (const auto& [key, unit] : children) {
            if (key == r) return &unit;
        }
        return nullptr;
    }

    StoryUnit* child(Role r) {
        for (auto& [key, unit] : children) {
            if (key == r) return &unit;
        }
        return nullptr;
    }

    friend bool operator==(const StoryUnit&, const StoryUnit&) = default;
};

struct Storyboard {
    std::string main_problem;
    std::string story_type;
    std::vector<std::pair<Role, StoryUnit>> units;  // stage-1 roots, sorted by role

    const StoryUnit* root(Role r) const {
        for (const auto& [key, unit] : units) {
            if (key == r) return &unit;
        }
        return nullptr;
    }

    StoryUnit* root(Role r) {
        for (auto& [key, unit] : units) {
            if (key == r) return &unit;
        }
        return nullptr;
    }

    friend bool operator==(const Storyboard&, const Storyboard&) = default;
};

// ─── Story type table ────────────────────────────────────────────

// Story-type to character-type table; keys matched case-insensitively.
inline const std::vector<std::pair<std::string, std::string>>& character_type_table() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"Humanistic", "Human Beings"},
        {"Animated", "Animation Beings"},
        {"Game", "Game Beings"},
        {"Education", "Knowladge elements"},
        {"Song", "Word, metaphors"},
        {"Musik", "Notes, Movements"},
        {"Multisensory story", "\" + Touch, Smell & Taste"},
        {"Formal Story", "Any of the above"},
    };
    return table;
}

namespace detail {

inline bool iequals(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        char ca = a[i], cb = b[i];
        if (ca >= 'A' && ca <= 'Z') ca = static_cast<char>(ca - 'A' + 'a');
        if (cb >= 'A' && cb <= 'Z') cb = static_cast<char>(cb - 'A' + 'a');
        if (ca != cb) return false;
    }
    return true;
}

}  // namespace detail

inline bool known_story_type(const std::string& story_type) {
    for (const auto& [key, value] : character_type_table()) {
        if (detail::iequals(key, story_type)) return true;
    }
    return false;
}

inline std::string character_type_for(const std::string& story_type) {
    for (const auto& [key, value] : character_type_table()) {
        if (detail::iequals(key, story_type)) return value;
    }
    throw ValidationError("unknown story type '" + story_type + "'");
}

// ─── Tree operations ─────────────────────────────────────────────

inline const StoryUnit* find_unit(const Storyboard& board, const StoryAddress& addr) {
    if (addr.empty()) return nullptr;
    const StoryUnit* unit = board.root(addr.role_at(0));
    for (std::size_t i = 1; unit != nullptr && i < addr.depth(); ++i) {
        unit = unit->child(addr.role_at(i));
    }
    return unit;
}

inline StoryUnit* find_unit(Storyboard& board, const StoryAddress& addr) {
    return const_cast<StoryUnit*>(find_unit(std::as_const(board), addr));
}

inline const StoryUnit& get_unit(const Storyboard& board, const StoryAddress& addr) {
    const StoryUnit* unit = find_unit(board, addr);
    if (!unit) throw ValidationError("no unit at '" + format_address(addr) + "'");
    return *unit;
}

namespace detail {

inline StoryUnit& insert_child(std::vector<std::pair<Role, StoryUnit>>& slots,
                               Role role, StoryUnit unit, const std::string& where) {
    auto it = std::find_if(slots.begin(), slots.end(),
                           [&](const auto& entry) { return entry.first >= role; });
    if (it != slots.end() && it->first == role) {
        throw ValidationError("duplicate role " + std::string(1, role_code(role)) +
                              " at " + where);
    }
    it = slots.insert(it, {role, std::move(unit)});
    return it->second;
}

}  // namespace detail

// Adds one child under `parent` (the empty address addresses the board
// itself, creating a stage-1 root). A unit counts as instantiated exactly
// when its narrative is non-empty.
inline StoryAddress expand_unit(Storyboard& board, const StoryAddress& parent,
                                Role role, std::optional<std::string> problem,
                                std::string narrative) {
    StoryAddress child_addr = parent.child(role);
    StoryUnit unit;
    unit.address = child_addr;
    unit.problem = std::move(problem);
    unit.instantiated = !narrative.empty();
    unit.narrative = std::move(narrative);

    if (parent.empty()) {
        detail::insert_child(board.units, role, std::move(unit), "storyboard root");
    } else {
        StoryUnit* parent_unit = find_unit(board, parent);
        if (!parent_unit) {
            throw ValidationError("parent '" + format_address(parent) + "' not found");
        }
        detail::insert_child(parent_unit->children, role, std::move(unit),
                             "'" + format_address(parent) + "'");
    }
    return child_addr;
}

// ─── Validation ──────────────────────────────────────────────────

struct Violation {
    std::string address;
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<Violation> warnings;

    bool ok() const { return violations.empty(); }
};

// Depth past which validation warns; the tree itself is unbounded.
inline constexpr std::size_t kDepthWarningThreshold = 16;

namespace detail {

inline void validate_unit(const StoryUnit& unit, const StoryAddress& expected,
                          ValidationReport& report) {
    const std::string where = format_address(unit.address);
    if (unit.address != expected) {
        report.violations.push_back(
            {where, "address mismatch, expected '" + format_address(expected) + "'"});
    }
    if (!unit.instantiated && !unit.narrative.empty()) {
        report.violations.push_back({where, "un-instantiated unit has a narrative"});
    }
    if (unit.instantiated && unit.narrative.empty()) {
        report.violations.push_back({where, "instantiated unit has an empty narrative"});
    }
    if (unit.address.depth() == kDepthWarningThreshold + 1) {
        report.warnings.push_back(
            {where, "depth exceeds " + std::to_string(kDepthWarningThreshold)});
    }
    for (std::size_t i = 0; i < unit.children.size(); ++i) {
        const auto& [key, child] = unit.children[i];
        if (i > 0 && unit.children[i - 1].first >= key) {
            report.violations.push_back(
                {where, "children out of B,M,E order or duplicate role"});
        }
        validate_unit(child, unit.address.child(key), report);
    }
}

}  // namespace detail

// Structural check over arbitrary (possibly hand-built or corrupted) trees.
// Violations are data, not errors; an empty violation list means the board
// satisfies every invariant. Excessive depth is reported as a warning only.
inline ValidationReport validate_storyboard(const Storyboard& board) {
    ValidationReport report;
    if (!board.story_type.empty() && !known_story_type(board.story_type)) {
        report.violations.push_back({"", "unknown story type '" + board.story_type + "'"});
    }
    for (std::size_t i = 0; i < board.units.size(); ++i) {
        const auto& [key, unit] = board.units[i];
        if (i > 0 && board.units[i - 1].first >= key) {
            report.violations.push_back({"", "roots out of B,M,E order or duplicate role"});
        }
        detail::validate_unit(unit, StoryAddress({key}), report);
    }
    return report;
}

// ─── Flattening ──────────────────────────────────────────────────

namespace detail {

inline void flatten_unit(const StoryUnit& unit, std::vector<Document>& docs) {
    if (unit.instantiated) {
        std::string text;
        if (unit.problem && !unit.problem->empty()) {
            text = *unit.problem + " " + unit.narrative;
        } else {
            text = unit.narrative;
        }
        docs.push_back({format_address(unit.address), std::move(text)});
    }
    for (const auto& [key, child] : unit.children) {
        flatten_unit(child, docs);
    }
}

}  // namespace detail

// One document per instantiated unit, depth-first, children visited B, M, E.
// Document ids are canonical addresses; the text is the problem statement
// (when present) followed by the narrative.
inline std::vector<Document> flatten_storyboard(const Storyboard& board) {
    ValidationReport report = validate_storyboard(board);
    if (!report.ok()) {
        throw ValidationError("storyboard invalid: " + report.violations.front().rule +
                              " at '" + report.violations.front().address + "'");
    }
    std::vector<Document> docs;
    for (const auto& [key, unit] : board.units) {
        detail::flatten_unit(unit, docs);
    }
    return docs;
}

// ─── JSON round-trip ─────────────────────────────────────────────
//
// File format: {"main_problem": str, "story_type": str, "units": [...]}
// with one entry per unit ("address", "problem" (nullable), "narrative",
// "instantiated"). Units may appear in any order; the tree is rebuilt
// from addresses. Serialization always emits depth-first B,M,E order.

namespace detail {

inline void storyboard_units_to_json(const StoryUnit& unit, nlohmann::json& arr) {
    nlohmann::json entry;
    entry["address"] = format_address(unit.address);
    if (unit.problem) {
        entry["problem"] = *unit.problem;
    } else {
        entry["problem"] = nullptr;
    }
    entry["narrative"] = unit.narrative;
    entry["instantiated"] = unit.instantiated;
    arr.push_back(std::move(entry));
    for (const auto& [key, child] : unit.children) {
        storyboard_units_to_json(child, arr);
    }
}

}  // namespace detail

inline nlohmann::json storyboard_to_json(const Storyboard& board) {
    nlohmann::json j;
    j["main_problem"] = board.main_problem;
    j["story_type"] = board.story_type;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [key, unit] : board.units) {
        detail::storyboard_units_to_json(unit, arr);
    }
    j["units"] = std::move(arr);
    return j;
}

inline Storyboard storyboard_from_json(const nlohmann::json& j) {
    Storyboard board;
    try {
        board.main_problem = j.at("main_problem").get<std::string>();
        board.story_type = j.at("story_type").get<std::string>();

        struct RawUnit {
            StoryAddress address;
            std::optional<std::string> problem;
            std::string narrative;
            bool instantiated;
        };
        std::vector<RawUnit> raw;
        for (const auto& entry : j.at("units")) {
            RawUnit u;
            u.address = parse_address(entry.at("address").get<std::string>());
            if (!entry.at("problem").is_null()) {
                u.problem = entry.at("problem").get<std::string>();
            }
            u.narrative = entry.at("narrative").get<std::string>();
            u.instantiated = entry.at("instantiated").get<bool>();
            raw.push_back(std::move(u));
        }
        // Parents first, so every insert lands on an existing unit.
        std::stable_sort(raw.begin(), raw.end(), [](const RawUnit& a, const RawUnit& b) {
            return a.address.depth() < b.address.depth();
        });
        for (auto& u : raw) {
            const std::string where = format_address(u.address);
            StoryAddress parent = u.address.parent();
            if (!parent.empty() && find_unit(board, parent) == nullptr) {
                throw ParseError("unit '" + where + "' has no parent in the file");
            }
            if (find_unit(board, u.address) != nullptr) {
                throw ParseError("duplicate unit address '" + where + "'");
            }
            StoryUnit unit;
            unit.address = u.address;
            unit.problem = std::move(u.problem);
            unit.narrative = std::move(u.narrative);
            unit.instantiated = u.instantiated;
            Role role = u.address.last_role();
            if (parent.empty()) {
                detail::insert_child(board.units, role, std::move(unit), "storyboard root");
            } else {
                detail::insert_child(find_unit(board, parent)->children, role,
                                     std::move(unit), "'" + format_address(parent) + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("storyboard json: ") + e.what());
    }
    return board;
}

inline std::string serialize_storyboard(const Storyboard& board) {
    return storyboard_to_json(board).dump(2) + "\n";
}

inline Storyboard deserialize_storyboard(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("storyboard json: ") + e.what());
    }
    return storyboard_from_json(j);
}

inline Storyboard load_storyboard(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_storyboard(buf.str());
}

inline void save_storyboard(const Storyboard& board, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << serialize_storyboard(board);
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace movidx
