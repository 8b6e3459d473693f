#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "movidx/document.hpp"
#include "movidx/error.hpp"
#include "movidx/frame.hpp"
#include "movidx/partition.hpp"

namespace movidx {

// ─── Media kinds and grammars ────────────────────────────────────
//
// Feature extraction is grammar-driven: a grammar is an ordered list of
// detector rules, each bound to a media kind. Running a grammar over one
// media object yields a parse tree — one node per executed rule — and the
// tree flattens into unique (object, path, attribute, value) tuples that
// feed the same inverted index as the story units.

enum class MediaKind { Voice, Image, Text };

inline const char* media_kind_name(MediaKind kind) {
    switch (kind) {
        case MediaKind::Voice: return "voice";
        case MediaKind::Image: return "image";
        case MediaKind::Text: return "text";
    }
    return "?";
}

inline MediaKind media_kind_from(const std::string& name) {
    if (name == "voice") return MediaKind::Voice;
    if (name == "image") return MediaKind::Image;
    if (name == "text") return MediaKind::Text;
    throw ParseError("unknown media kind '" + name + "'");
}

struct DetectorRule {
    MediaKind kind = MediaKind::Image;
    std::string detector;
    std::map<std::string, std::string> params;

    friend bool operator==(const DetectorRule&, const DetectorRule&) = default;
};

struct DetectorGrammar {
    std::vector<DetectorRule> rules;

    friend bool operator==(const DetectorGrammar&, const DetectorGrammar&) = default;
};

namespace detail {

inline int int_param(const DetectorRule& rule, const std::string& name,
                     int fallback, int lo, int hi) {
    auto it = rule.params.find(name);
    if (it == rule.params.end()) return fallback;
    int value = 0;
    const std::string& text = it->second;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ValidationError("rule " + rule.detector + ": param " + name + " '" +
                              text + "' is not an integer");
    }
    if (value < lo || value > hi) {
        throw ValidationError("rule " + rule.detector + ": param " + name + " = " +
                              text + " outside " + std::to_string(lo) + ".." +
                              std::to_string(hi));
    }
    return value;
}

struct DetectorSpec {
    MediaKind kind;
    const char* name;
    std::vector<std::string> params;  // accepted parameter keys
};

inline const std::vector<DetectorSpec>& detector_registry() {
    static const std::vector<DetectorSpec> registry = {
        {MediaKind::Image, "histogram", {"bins"}},
        {MediaKind::Image, "edges", {"threshold"}},
        {MediaKind::Voice, "speaker", {}},
        {MediaKind::Text, "textstats", {"field"}},
    };
    return registry;
}

}  // namespace detail

// Rejects rules naming unknown detectors, duplicate (kind, detector) pairs,
// and parameters a detector does not accept or cannot parse.
inline void validate_grammar(const DetectorGrammar& grammar) {
    std::set<std::pair<MediaKind, std::string>> seen;
    for (const DetectorRule& rule : grammar.rules) {
        const detail::DetectorSpec* spec = nullptr;
        for (const auto& entry : detail::detector_registry()) {
            if (entry.kind == rule.kind && entry.name == rule.detector) {
                spec = &entry;
                break;
            }
        }
        if (!spec) {
            throw ValidationError("unregistered detector '" + rule.detector +
                                  "' for kind " + media_kind_name(rule.kind));
        }
        if (!seen.insert({rule.kind, rule.detector}).second) {
            throw ValidationError("duplicate rule (" +
                                  std::string(media_kind_name(rule.kind)) + ", " +
                                  rule.detector + ")");
        }
        for (const auto& [key, value] : rule.params) {
            bool known = false;
            for (const auto& accepted : spec->params) {
                if (accepted == key) known = true;
            }
            if (!known) {
                throw ValidationError("rule " + rule.detector +
                                      ": unknown param '" + key + "'");
            }
        }
        // Range-check eagerly so broken grammars fail before any media runs.
        if (rule.detector == "histogram") detail::int_param(rule, "bins", 8, 2, 256);
        if (rule.detector == "edges") detail::int_param(rule, "threshold", 32, 1, 255);
        if (rule.detector == "textstats") {
            auto it = rule.params.find("field");
            if (it != rule.params.end() && it->second.empty()) {
                throw ValidationError("rule textstats: param field is empty");
            }
        }
    }
}

inline nlohmann::json grammar_to_json(const DetectorGrammar& grammar) {
    nlohmann::json arr = nlohmann::json::array();
    for (const DetectorRule& rule : grammar.rules) {
        nlohmann::json entry;
        entry["kind"] = media_kind_name(rule.kind);
        entry["detector"] = rule.detector;
        entry["params"] = rule.params;
        arr.push_back(std::move(entry));
    }
    return arr;
}

inline DetectorGrammar grammar_from_json(const nlohmann::json& j) {
    DetectorGrammar grammar;
    try {
        for (const auto& entry : j) {
            DetectorRule rule;
            rule.kind = media_kind_from(entry.at("kind").get<std::string>());
            rule.detector = entry.at("detector").get<std::string>();
            if (entry.contains("params")) {
                rule.params =
                    entry.at("params").get<std::map<std::string, std::string>>();
            }
            grammar.rules.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("grammar json: ") + e.what());
    }
    validate_grammar(grammar);
    return grammar;
}

// ─── Parse trees and tuples ──────────────────────────────────────

struct TreeNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<TreeNode> children;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct ParseTree {
    std::string object_id;
    std::vector<TreeNode> nodes;

    friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

struct FeatureTuple {
    std::string object_id;
    std::string path;  // detector names, slash-joined for nested nodes
    std::string attribute;
    std::string value;

    friend bool operator==(const FeatureTuple&, const FeatureTuple&) = default;
};

// ─── Image detectors ─────────────────────────────────────────────

// Bin i covers pixel values [⌊256·i/bins⌋, ⌊256·(i+1)/bins⌋); when bins does
// not divide 256 the boundaries spread the slack evenly rather than dumping
// it all into the last bin — a value→bin table keeps per-pixel lookup O(1).
inline std::vector<std::int64_t> color_histogram(const SyntheticFrame& frame, int bins) {
    if (bins < 2 || bins > 256) {
        throw ValidationError("histogram bins = " + std::to_string(bins) +
                              " outside 2..256");
    }
    std::array<std::uint8_t, 256> bin_of{};
    for (int i = 0; i < bins; ++i) {
        const int lo = 256 * i / bins;
        const int hi = 256 * (i + 1) / bins;
        for (int v = lo; v < hi; ++v) bin_of[v] = static_cast<std::uint8_t>(i);
    }
    std::vector<std::int64_t> counts(bins, 0);
    for (std::uint8_t p : frame.pixels) ++counts[bin_of[p]];
    return counts;
}

// A pixel is an edge pixel when it differs by at least `threshold` from its
// right or below neighbor; the last column and row compare only the
// neighbor that exists. Returns edge pixels / total pixels.
inline double edge_density(const SyntheticFrame& frame, int threshold) {
    if (threshold < 1 || threshold > 255) {
        throw ValidationError("edge threshold = " + std::to_string(threshold) +
                              " outside 1..255");
    }
    if (frame.width < 2 || frame.height < 2) {
        throw ValidationError("edge density needs a frame of at least 2x2");
    }
    std::int64_t edges = 0;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const int v = frame.at(x, y);
            bool edge = false;
            if (x + 1 < frame.width &&
                std::abs(v - frame.at(x + 1, y)) >= threshold) {
                edge = true;
            }
            if (!edge && y + 1 < frame.height &&
                std::abs(v - frame.at(x, y + 1)) >= threshold) {
                edge = true;
            }
            edges += edge ? 1 : 0;
        }
    }
    return static_cast<double>(edges) / static_cast<double>(frame.pixel_count());
}

// ─── Rule execution ──────────────────────────────────────────────

namespace detail {

inline std::string format_ratio(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

inline TreeNode histogram_node(const DetectorRule& rule, const SyntheticFrame& frame) {
    const int bins = int_param(rule, "bins", 8, 2, 256);
    std::vector<std::int64_t> counts = color_histogram(frame, bins);
    std::size_t dominant = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] > counts[dominant]) dominant = i;  // ties keep lowest index
    }
    TreeNode node{"histogram", {}, {}};
    node.attributes.push_back({"dominant_bin", std::to_string(dominant)});
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > 0) {
            node.attributes.push_back(
                {"bin_" + std::to_string(i), std::to_string(counts[i])});
        }
    }
    return node;
}

inline TreeNode edges_node(const DetectorRule& rule, const SyntheticFrame& frame) {
    const int threshold = int_param(rule, "threshold", 32, 1, 255);
    TreeNode node{"edges", {}, {}};
    node.attributes.push_back({"edge_density", format_ratio(edge_density(frame, threshold))});
    return node;
}

inline std::string age_band(const DetectorRule& rule, const std::string& text) {
    int age = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), age);
    if (ec != std::errc() || ptr != text.data() + text.size() || age < 0) {
        throw ValidationError("rule " + rule.detector + ": age '" + text +
                              "' is not a non-negative integer");
    }
    const int lo = age / 10 * 10;
    return std::to_string(lo) + "-" + std::to_string(lo + 9);
}

inline TreeNode speaker_node(const DetectorRule& rule,
                             const std::map<std::string, std::string>& metadata) {
    TreeNode node{"speaker", {}, {}};
    if (auto it = metadata.find("gender"); it != metadata.end()) {
        node.attributes.push_back({"gender", it->second});
    }
    if (auto it = metadata.find("region"); it != metadata.end()) {
        node.attributes.push_back({"region", it->second});
    }
    if (auto it = metadata.find("age"); it != metadata.end()) {
        node.attributes.push_back({"age_band", age_band(rule, it->second)});
    }
    return node;
}

inline TreeNode textstats_node(const DetectorRule& rule,
                               const std::map<std::string, std::string>& metadata) {
    std::string field = "caption";
    if (auto it = rule.params.find("field"); it != rule.params.end()) {
        field = it->second;
    }
    auto it = metadata.find(field);
    if (it == metadata.end()) {
        throw ValidationError("rule " + rule.detector + ": metadata field '" + field +
                              "' is missing");
    }
    const std::string& text = it->second;
    std::int64_t words = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        const bool alnum = std::isalnum(c) != 0;
        if (alnum && !in_word) ++words;
        in_word = alnum;
    }
    TreeNode node{"textstats", {}, {}};
    node.attributes.push_back({"chars", std::to_string(text.size())});
    node.attributes.push_back({"words", std::to_string(words)});
    return node;
}

inline TreeNode run_rule(const DetectorRule& rule, const SyntheticFrame* frame,
                         const std::map<std::string, std::string>& metadata) {
    if (rule.kind == MediaKind::Image) {
        if (!frame) {
            throw ValidationError("rule " + rule.detector + ": no frame provided");
        }
        if (rule.detector == "histogram") return histogram_node(rule, *frame);
        if (rule.detector == "edges") return edges_node(rule, *frame);
    } else if (rule.kind == MediaKind::Voice) {
        if (rule.detector == "speaker") return speaker_node(rule, metadata);
    } else if (rule.kind == MediaKind::Text) {
        if (rule.detector == "textstats") return textstats_node(rule, metadata);
    }
    throw InternalError("rule " + rule.detector + ": registered but not executable");
}

}  // namespace detail

// Runs every rule of `kind`, in grammar order, over one media object.
// Detectors are deterministic functions of (frame, metadata, params).
inline ParseTree run_grammar(const DetectorGrammar& grammar, const std::string& object_id,
                             MediaKind kind, const SyntheticFrame* frame,
                             const std::map<std::string, std::string>& metadata) {
    validate_grammar(grammar);
    ParseTree tree{object_id, {}};
    for (const DetectorRule& rule : grammar.rules) {
        if (rule.kind != kind) continue;
        tree.nodes.push_back(detail::run_rule(rule, frame, metadata));
    }
    return tree;
}

// Whole-object convenience over all kinds at once. Without a layout, rules
// execute in grammar order against the full frame. With a layout, metadata
// rules (voice/text) stay at top level and the image rules run once per
// tile, nested under a "tile_<row>_<col>" node; tiles follow the layout's
// column-major order.
inline ParseTree detect_object(const DetectorGrammar& grammar, const std::string& object_id,
                               const SyntheticFrame* frame,
                               const std::map<std::string, std::string>& metadata,
                               const PartitionLayout* layout = nullptr) {
    validate_grammar(grammar);
    ParseTree tree{object_id, {}};
    if (!layout) {
        for (const DetectorRule& rule : grammar.rules) {
            tree.nodes.push_back(detail::run_rule(rule, frame, metadata));
        }
        return tree;
    }
    for (const DetectorRule& rule : grammar.rules) {
        if (rule.kind == MediaKind::Image) continue;
        tree.nodes.push_back(detail::run_rule(rule, frame, metadata));
    }
    bool any_image = false;
    for (const DetectorRule& rule : grammar.rules) {
        if (rule.kind == MediaKind::Image) any_image = true;
    }
    if (!any_image) return tree;
    if (!frame) throw ValidationError("tiled detection: no frame provided");
    for (const Tile& t : layout->tiles) {
        SyntheticFrame crop = subframe(*frame, t.x, t.y, t.width, t.height);
        TreeNode tile_node{"tile_" + std::to_string(t.row_index) + "_" +
                               std::to_string(t.col_index),
                           {},
                           {}};
        for (const DetectorRule& rule : grammar.rules) {
            if (rule.kind != MediaKind::Image) continue;
            tile_node.children.push_back(detail::run_rule(rule, &crop, metadata));
        }
        tree.nodes.push_back(std::move(tile_node));
    }
    return tree;
}

// ─── Tuple extraction and indexing ───────────────────────────────

namespace detail {

inline void collect_tuples(const TreeNode& node, const std::string& prefix,
                           const std::string& object_id,
                           std::set<std::pair<std::string, std::string>>& seen,
                           std::vector<FeatureTuple>& out) {
    const std::string path = prefix.empty() ? node.name : prefix + "/" + node.name;
    for (const auto& [attribute, value] : node.attributes) {
        if (!seen.insert({path, attribute}).second) {
            throw InternalError("duplicate tuple key (" + object_id + ", " + path +
                                ", " + attribute + ")");
        }
        out.push_back({object_id, path, attribute, value});
    }
    for (const TreeNode& child : node.children) {
        collect_tuples(child, path, object_id, seen, out);
    }
}

}  // namespace detail

// Depth-first flattening of a tree into tuples; a repeated (path, attribute)
// within one tree signals a detector bug and is an internal error.
inline std::vector<FeatureTuple> tuples_from_tree(const ParseTree& tree) {
    std::vector<FeatureTuple> tuples;
    std::set<std::pair<std::string, std::string>> seen;
    for (const TreeNode& node : tree.nodes) {
        detail::collect_tuples(node, "", tree.object_id, seen, tuples);
    }
    return tuples;
}

// "histogram", "dominant_bin", "0" → "histogram_dominant_bin_0": the tuple
// collapsed to a single indexable token sequence (non-alphanumerics become
// underscores, which tokenization later splits on).
inline std::string term_for_tuple(const FeatureTuple& tuple) {
    std::string term = tuple.path + "_" + tuple.attribute + "_" + tuple.value;
    for (char& c : term) {
        const unsigned char u = static_cast<unsigned char>(c);
        const bool alnum = (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') ||
                           (u >= 'A' && u <= 'Z');
        if (!alnum) c = '_';
    }
    return term;
}

// One document per object (first-appearance order), its text the space-
// joined rewritten tuples — detector facts become ordinary searchable text.
inline std::vector<Document> tuples_to_terms(const std::vector<FeatureTuple>& tuples) {
    std::vector<Document> docs;
    std::map<std::string, std::size_t> slot;
    for (const FeatureTuple& tuple : tuples) {
        auto [it, inserted] = slot.insert({tuple.object_id, docs.size()});
        if (inserted) docs.push_back({tuple.object_id, ""});
        std::string& text = docs[it->second].text;
        if (!text.empty()) text += ' ';
        text += term_for_tuple(tuple);
    }
    return docs;
}

}  // namespace movidx
