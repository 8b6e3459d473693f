#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "movidx/detectors.hpp"
#include "movidx/error.hpp"
#include "movidx/frame.hpp"
#include "movidx/partition.hpp"
#include "movidx/pgm.hpp"
#include "movidx/storyboard.hpp"
#include "movidx/textindex.hpp"

namespace movidx {

// ─── Catalog records ─────────────────────────────────────────────
//
// A catalog binds one storyboard to the video fragments that realize it:
// each fragment names its source file, time span, story unit, frames, and
// the metadata its voice/text detectors read. Ingesting a catalog flattens
// the storyboard and runs the detector grammar over every frame, merging
// everything into one searchable index.

// A frame is either a PGM file on disk or a deterministic generator seed
// (so fixtures and benchmarks need no binary assets). Exactly one of
// path/seed is set; seeds carry explicit dimensions.
struct FrameRef {
    std::optional<std::string> path;
    std::optional<std::uint32_t> seed;
    int width = 0;
    int height = 0;

    friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

struct FragmentRecord {
    std::string fragment_id;
    std::string source;  // original video name, opaque
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    StoryAddress story_address;
    std::vector<FrameRef> frames;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const FragmentRecord&, const FragmentRecord&) = default;
};

struct Catalog {
    Storyboard storyboard;
    DetectorGrammar grammar;
    std::vector<FragmentRecord> fragments;  // sorted by (source, start_ms)

    friend bool operator==(const Catalog&, const Catalog&) = default;
};

inline SyntheticFrame resolve_frame(const FrameRef& ref) {
    if (ref.path) return read_pgm(*ref.path);
    if (ref.seed) return frame_from_seed(*ref.seed, ref.width, ref.height);
    throw ValidationError("frame reference has neither path nor seed");
}

// ─── Validation ──────────────────────────────────────────────────

// Checks every catalog invariant; structural problems throw, same-source
// time overlaps are appended to `warnings` (the cut list may legitimately
// reuse footage). Fragments must already be in (source, start_ms) order —
// the loader establishes that order.
inline void validate_catalog(const Catalog& catalog,
                             std::vector<std::string>* warnings = nullptr) {
    ValidationReport board_report = validate_storyboard(catalog.storyboard);
    if (!board_report.ok()) {
        throw ValidationError("catalog storyboard: " +
                              board_report.violations.front().rule + " at '" +
                              board_report.violations.front().address + "'");
    }
    validate_grammar(catalog.grammar);

    std::set<std::string> ids;
    for (std::size_t i = 0; i < catalog.fragments.size(); ++i) {
        const FragmentRecord& frag = catalog.fragments[i];
        const std::string where = "fragment '" + frag.fragment_id + "'";
        if (!ids.insert(frag.fragment_id).second) {
            throw ValidationError("duplicate fragment id '" + frag.fragment_id + "'");
        }
        if (frag.start_ms < 0 || frag.end_ms < 0 || frag.start_ms >= frag.end_ms) {
            throw ValidationError(where + ": start_ms must be < end_ms and both ≥ 0");
        }
        if (find_unit(catalog.storyboard, frag.story_address) == nullptr) {
            throw ValidationError(where + ": story address '" +
                                  format_address(frag.story_address) +
                                  "' not in the storyboard");
        }
        for (const FrameRef& ref : frag.frames) {
            if (ref.path.has_value() == ref.seed.has_value()) {
                throw ValidationError(where + ": frame must have exactly one of "
                                             "path or seed");
            }
            if (ref.seed && (ref.width < 1 || ref.height < 1)) {
                throw ValidationError(where + ": seeded frame needs positive "
                                             "width and height");
            }
        }
        if (i > 0) {
            const FragmentRecord& prev = catalog.fragments[i - 1];
            if (std::tie(prev.source, prev.start_ms) >
                std::tie(frag.source, frag.start_ms)) {
                throw ValidationError("fragments not sorted by (source, start_ms) at '" +
                                      frag.fragment_id + "'");
            }
        }
    }

    if (warnings) {
        // Track the furthest end per source; any later fragment starting
        // before it overlaps something already seen.
        std::map<std::string, std::pair<std::int64_t, std::string>> furthest;
        for (const FragmentRecord& frag : catalog.fragments) {
            auto it = furthest.find(frag.source);
            if (it != furthest.end() && frag.start_ms < it->second.first) {
                warnings->push_back("fragments '" + it->second.second + "' and '" +
                                    frag.fragment_id + "' overlap in source '" +
                                    frag.source + "'");
            }
            if (it == furthest.end() || frag.end_ms > it->second.first) {
                furthest[frag.source] = {frag.end_ms, frag.fragment_id};
            }
        }
    }
}

// ─── JSON round-trip ─────────────────────────────────────────────
//
// {"storyboard": {...}, "grammar": [...], "fragments": [{"fragment_id",
//  "source", "start_ms", "end_ms", "story_address",
//  "frames": [{"path"} | {"seed","width","height"}], "metadata": {...}}]}

inline nlohmann::json catalog_to_json(const Catalog& catalog) {
    nlohmann::json j;
    j["storyboard"] = storyboard_to_json(catalog.storyboard);
    j["grammar"] = grammar_to_json(catalog.grammar);
    nlohmann::json frags = nlohmann::json::array();
    for (const FragmentRecord& frag : catalog.fragments) {
        nlohmann::json f;
        f["fragment_id"] = frag.fragment_id;
        f["source"] = frag.source;
        f["start_ms"] = frag.start_ms;
        f["end_ms"] = frag.end_ms;
        f["story_address"] = format_address(frag.story_address);
        nlohmann::json frames = nlohmann::json::array();
        for (const FrameRef& ref : frag.frames) {
            nlohmann::json r;
            if (ref.path) {
                r["path"] = *ref.path;
            } else {
                r["seed"] = *ref.seed;
                r["width"] = ref.width;
                r["height"] = ref.height;
            }
            frames.push_back(std::move(r));
        }
        f["frames"] = std::move(frames);
        f["metadata"] = frag.metadata;
        frags.push_back(std::move(f));
    }
    j["fragments"] = std::move(frags);
    return j;
}

inline Catalog catalog_from_json(const nlohmann::json& j,
                                 std::vector<std::string>* warnings = nullptr) {
    Catalog catalog;
    try {
        catalog.storyboard = storyboard_from_json(j.at("storyboard"));
        catalog.grammar = grammar_from_json(j.at("grammar"));
        for (const auto& f : j.at("fragments")) {
            FragmentRecord frag;
            frag.fragment_id = f.at("fragment_id").get<std::string>();
            frag.source = f.at("source").get<std::string>();
            frag.start_ms = f.at("start_ms").get<std::int64_t>();
            frag.end_ms = f.at("end_ms").get<std::int64_t>();
            frag.story_address = parse_address(f.at("story_address").get<std::string>());
            for (const auto& r : f.at("frames")) {
                FrameRef ref;
                if (r.contains("path")) ref.path = r.at("path").get<std::string>();
                if (r.contains("seed")) {
                    ref.seed = r.at("seed").get<std::uint32_t>();
                    ref.width = r.at("width").get<int>();
                    ref.height = r.at("height").get<int>();
                }
                frag.frames.push_back(std::move(ref));
            }
            if (f.contains("metadata")) {
                frag.metadata =
                    f.at("metadata").get<std::map<std::string, std::string>>();
            }
            catalog.fragments.push_back(std::move(frag));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("catalog json: ") + e.what());
    }
    // Establish the canonical order, then check everything else.
    std::stable_sort(catalog.fragments.begin(), catalog.fragments.end(),
                     [](const FragmentRecord& a, const FragmentRecord& b) {
                         return std::tie(a.source, a.start_ms, a.fragment_id) <
                                std::tie(b.source, b.start_ms, b.fragment_id);
                     });
    validate_catalog(catalog, warnings);
    return catalog;
}

inline std::string serialize_catalog(const Catalog& catalog) {
    return catalog_to_json(catalog).dump(2) + "\n";
}

inline Catalog deserialize_catalog(const std::string& text,
                                   std::vector<std::string>* warnings = nullptr) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("catalog json: ") + e.what());
    }
    return catalog_from_json(j, warnings);
}

inline Catalog load_catalog(const std::string& path,
                            std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_catalog(buf.str(), warnings);
}

inline void save_catalog(const Catalog& catalog, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << serialize_catalog(catalog);
    if (!out) throw IoError("write failed for '" + path + "'");
}

// ─── Ingest pipeline ─────────────────────────────────────────────

// Builds the unified index: one document per instantiated story unit plus
// one per fragment frame ("fragment_id/frame_index") carrying its detector
// tuples as text. With `ast_partitions` set, image detectors run per AST
// tile instead of once per frame. Errors from per-fragment work are
// re-thrown with the fragment id attached, preserving the error type.
inline InvertedIndex ingest_pipeline(const Catalog& catalog,
                                     std::optional<int> ast_partitions = std::nullopt) {
    validate_catalog(catalog);
    std::vector<Document> docs = flatten_storyboard(catalog.storyboard);

    for (const FragmentRecord& frag : catalog.fragments) {
        try {
            for (std::size_t i = 0; i < frag.frames.size(); ++i) {
                SyntheticFrame frame = resolve_frame(frag.frames[i]);
                std::optional<PartitionLayout> layout;
                if (ast_partitions) {
                    layout = ast_partition(*ast_partitions, frame.width, frame.height);
                }
                ParseTree tree = detect_object(
                    catalog.grammar, frag.fragment_id + "/" + std::to_string(i),
                    &frame, frag.metadata, layout ? &*layout : nullptr);
                for (Document& doc : tuples_to_terms(tuples_from_tree(tree))) {
                    docs.push_back(std::move(doc));
                }
            }
        } catch (const ParseError& e) {
            throw ParseError("fragment '" + frag.fragment_id + "': " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("fragment '" + frag.fragment_id + "': " + e.what());
        } catch (const IoError& e) {
            throw IoError("fragment '" + frag.fragment_id + "': " + e.what());
        } catch (const InternalError& e) {
            throw InternalError("fragment '" + frag.fragment_id + "': " + e.what());
        }
    }

    std::sort(docs.begin(), docs.end(),
              [](const Document& a, const Document& b) { return a.id < b.id; });
    return build_index(docs);
}

}  // namespace movidx
