#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "movidx/bench.hpp"
#include "movidx/catalog.hpp"
#include "movidx/detectors.hpp"
#include "movidx/error.hpp"
#include "movidx/partition.hpp"
#include "movidx/pgm.hpp"
#include "movidx/storyboard.hpp"
#include "movidx/textindex.hpp"

namespace movidx {

// ─── Diagnostics ─────────────────────────────────────────────────
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 internal invariant violation. Payload goes to stdout, diagnostics
// to stderr. MOVIDX_COLOR=1 (or true/yes/on/always) colors the stderr
// error prefix; stdout is never colored so it stays machine-parseable.

namespace detail {

inline bool color_enabled() {
    const char* v = std::getenv("MOVIDX_COLOR");
    if (!v) return false;
    std::string s(v);
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s == "1" || s == "true" || s == "yes" || s == "on" || s == "always";
}

inline std::string error_prefix() {
    return color_enabled() ? "\x1b[31merror:\x1b[0m " : "error: ";
}

inline std::string fixed4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

inline std::string fixed3(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    return buf;
}

inline DetectorGrammar load_grammar_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("grammar file '" + path + "': " + e.what());
    }
    return grammar_from_json(j);
}

// ─── Subcommand bodies ───────────────────────────────────────────

inline int cli_validate(const std::string& path, const std::string& format,
                        std::ostream& out, std::ostream& err) {
    const Storyboard board = load_storyboard(path);
    const ValidationReport report = validate_storyboard(board);
    if (format == "json") {
        nlohmann::json j;
        j["ok"] = report.ok();
        j["violations"] = nlohmann::json::array();
        for (const Violation& v : report.violations) {
            j["violations"].push_back({{"address", v.address}, {"rule", v.rule}});
        }
        j["warnings"] = nlohmann::json::array();
        for (const Violation& w : report.warnings) {
            j["warnings"].push_back({{"address", w.address}, {"rule", w.rule}});
        }
        out << j.dump(2) << "\n";
    } else {
        for (const Violation& v : report.violations) {
            err << "violation: " << v.address << ": " << v.rule << "\n";
        }
        for (const Violation& w : report.warnings) {
            err << "warning: " << w.address << ": " << w.rule << "\n";
        }
    }
    return report.ok() ? 0 : 2;
}

inline int cli_index(const std::string& catalog_path, const std::string& out_path,
                     std::optional<int> ast_partitions, const std::string& format,
                     std::ostream& out) {
    const Catalog catalog = load_catalog(catalog_path);
    const InvertedIndex index = ingest_pipeline(catalog, ast_partitions);
    save_index(index, out_path);
    if (format == "json") {
        nlohmann::json j;
        j["doc_count"] = index.doc_count;
        j["distinct_terms"] = index.terms.size();
        j["total_terms"] = index.total_terms;
        j["output"] = out_path;
        out << j.dump(2) << "\n";
    }
    return 0;
}

inline int cli_query(const std::string& index_path, const std::string& query_text,
                     std::size_t limit, const std::string& format, std::ostream& out) {
    const InvertedIndex index = load_index(index_path);
    const QueryAst ast(query_text);
    QueryResult hits = query_index(index, ast);
    if (hits.size() > limit) hits.resize(limit);
    if (format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const Hit& h : hits) {
            j.push_back({{"doc_id", h.doc_id}, {"score", h.score}});
        }
        out << j.dump(2) << "\n";
    } else {
        for (const Hit& h : hits) {
            out << h.doc_id << '\t' << h.score << '\n';
        }
    }
    return 0;
}

inline int cli_bench(std::size_t docs, std::size_t vocab, std::size_t queries,
                     std::uint64_t seed, double threshold, const std::string& format,
                     std::ostream& out) {
    const BenchReport report = run_benchmark(docs, vocab, queries, seed, threshold);
    if (format == "text") {
        const auto ms = [](std::int64_t ns) { return static_cast<double>(ns) / 1e6; };
        const double denom = static_cast<double>(report.query_count);
        out << "corpus_size: " << report.corpus_size << "\n"
            << "vocab_size: " << report.vocab_size << "\n"
            << "query_count: " << report.query_count << "\n"
            << "seed: " << report.seed << "\n"
            << "threshold: " << report.threshold << "\n"
            << "build_ms: " << fixed3(ms(report.build_ns)) << "\n"
            << "scan_total_ms: " << fixed3(ms(report.scan_total_ns)) << "\n"
            << "indexed_total_ms: " << fixed3(ms(report.indexed_total_ns)) << "\n"
            << "scan_mean_ms: " << fixed3(ms(report.scan_total_ns) / denom) << "\n"
            << "indexed_mean_ms: " << fixed3(ms(report.indexed_total_ns) / denom) << "\n"
            << "speedup: " << fixed3(report.speedup) << "\n"
            << "success: " << (report.success ? "true" : "false") << "\n";
    } else {
        out << serialize_bench_report(report);
    }
    return 0;
}

inline int cli_partition(int n, int width, int height, const std::string& format,
                         std::ostream& out) {
    const PartitionLayout layout = ast_partition(n, width, height);
    if (format == "json") {
        out << layout_to_json(layout).dump(2) << "\n";
        return 0;
    }
    for (const Tile& t : layout.tiles) {
        out << tile_class_name(t.cls) << ' ' << t.x << ' ' << t.y << ' ' << t.width
            << ' ' << t.height << '\n';
    }
    const LayoutStats stats = layout_stats(layout);
    out << "# tiles=" << layout.tiles.size() << " min_area=" << stats.min_area
        << " max_area=" << stats.max_area << " imbalance=" << fixed4(stats.imbalance)
        << " worst_aspect=" << fixed4(stats.worst_aspect) << " classes=";
    bool first = true;
    for (const auto& [cls, count] : stats.class_counts) {
        if (!first) out << ',';
        out << tile_class_name(cls) << ':' << count;
        first = false;
    }
    out << '\n';
    return 0;
}

inline int cli_detect(const std::string& frame_path, const std::string& grammar_path,
                      const std::string& object_id, const std::string& format,
                      std::ostream& out) {
    const SyntheticFrame frame = read_pgm(frame_path);
    const DetectorGrammar grammar = load_grammar_file(grammar_path);
    // A bare frame carries no transcript or speaker metadata, so voice and
    // text rules in the grammar fail with a clear validation error rather
    // than silently producing nothing.
    const ParseTree tree = detect_object(grammar, object_id, &frame, {});
    const std::vector<FeatureTuple> tuples = tuples_from_tree(tree);
    if (format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const FeatureTuple& t : tuples) {
            j.push_back({{"object_id", t.object_id},
                         {"path", t.path},
                         {"attribute", t.attribute},
                         {"value", t.value}});
        }
        out << j.dump(2) << "\n";
    } else {
        for (const FeatureTuple& t : tuples) {
            out << t.object_id << '\t' << t.path << '\t' << t.attribute << '\t'
                << t.value << '\n';
        }
    }
    return 0;
}

}  // namespace detail

// ─── Driver ──────────────────────────────────────────────────────

// args excludes the program name. Streams are injectable so the whole
// surface is testable in-process.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    CLI::App app{"Movement-oriented video indexing toolkit"};
    app.name("movidx");
    app.require_subcommand(1);

    std::string storyboard_path;
    std::string catalog_path;
    std::string index_out_path;
    std::string index_path;
    std::string query_text;
    std::string frame_path;
    std::string grammar_path;
    std::string object_id;
    int ast_n = 0;
    int part_n = 0;
    int part_width = 0;
    int part_height = 0;
    std::size_t limit = std::numeric_limits<std::size_t>::max();
    std::size_t bench_docs = 1000;
    std::size_t bench_vocab = 200;
    std::size_t bench_queries = 50;
    std::uint64_t bench_seed = 0;
    double bench_threshold = 10.0;
    std::string validate_format = "text";
    std::string index_format = "text";
    std::string query_format = "text";
    std::string bench_format = "json";
    std::string partition_format = "text";
    std::string detect_format = "text";

    const auto format_check = CLI::IsMember({"text", "json"});

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Check a storyboard file and report violations");
    validate_cmd->add_option("storyboard", storyboard_path, "Storyboard JSON file")
        ->required();
    validate_cmd->add_option("--format", validate_format, "Output format")
        ->check(format_check);

    CLI::App* index_cmd =
        app.add_subcommand("index", "Ingest a catalog and write an inverted index");
    index_cmd->add_option("catalog", catalog_path, "Catalog JSON file")->required();
    index_cmd->add_option("-o,--output", index_out_path, "Index output file")->required();
    CLI::Option* ast_opt = index_cmd->add_option(
        "--ast", ast_n, "Partition frames into N tiles before detection");
    index_cmd->add_option("--format", index_format, "Output format")->check(format_check);

    CLI::App* query_cmd =
        app.add_subcommand("query", "Evaluate a boolean query against an index");
    query_cmd->add_option("index", index_path, "Index JSON file")->required();
    query_cmd->add_option("query", query_text, "Boolean query")->required();
    query_cmd->add_option("--limit", limit, "Maximum number of hits to print");
    query_cmd->add_option("--format", query_format, "Output format")->check(format_check);

    CLI::App* bench_cmd = app.add_subcommand(
        "bench", "Benchmark indexed retrieval against a linear scan");
    bench_cmd->add_option("--docs", bench_docs, "Synthetic corpus size");
    bench_cmd->add_option("--vocab", bench_vocab, "Vocabulary size");
    bench_cmd->add_option("--queries", bench_queries, "Number of queries");
    bench_cmd->add_option("--seed", bench_seed, "Corpus and query seed");
    bench_cmd->add_option("--threshold", bench_threshold,
                          "Speedup a successful index must exceed");
    bench_cmd->add_option("--format", bench_format, "Output format")->check(format_check);

    CLI::App* partition_cmd =
        app.add_subcommand("partition", "Partition a frame into almost-square tiles");
    partition_cmd->add_option("--n", part_n, "Number of tiles")->required();
    partition_cmd->add_option("--width", part_width, "Frame width")->required();
    partition_cmd->add_option("--height", part_height, "Frame height")->required();
    partition_cmd->add_option("--format", partition_format, "Output format")
        ->check(format_check);

    CLI::App* detect_cmd =
        app.add_subcommand("detect", "Run a detector grammar over one frame");
    detect_cmd->add_option("frame", frame_path, "Frame file (binary PGM)")->required();
    detect_cmd->add_option("--grammar", grammar_path, "Detector grammar JSON file")
        ->required();
    detect_cmd->add_option("--object-id", object_id, "Object id for emitted tuples")
        ->required();
    detect_cmd->add_option("--format", detect_format, "Output format")->check(format_check);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);  // --help and friends
        }
        app.exit(e, err, err);
        return 1;
    }

    try {
        if (validate_cmd->parsed()) {
            return detail::cli_validate(storyboard_path, validate_format, out, err);
        }
        if (index_cmd->parsed()) {
            std::optional<int> ast;
            if (ast_opt->count() > 0) ast = ast_n;
            return detail::cli_index(catalog_path, index_out_path, ast, index_format, out);
        }
        if (query_cmd->parsed()) {
            return detail::cli_query(index_path, query_text, limit, query_format, out);
        }
        if (bench_cmd->parsed()) {
            return detail::cli_bench(bench_docs, bench_vocab, bench_queries, bench_seed,
                                     bench_threshold, bench_format, out);
        }
        if (partition_cmd->parsed()) {
            return detail::cli_partition(part_n, part_width, part_height,
                                         partition_format, out);
        }
        if (detect_cmd->parsed()) {
            return detail::cli_detect(frame_path, grammar_path, object_id, detect_format,
                                      out);
        }
        err << detail::error_prefix() << "no subcommand selected\n";
        return 1;
    } catch (const InternalError& e) {
        err << detail::error_prefix() << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        err << detail::error_prefix() << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << detail::error_prefix() << "unexpected: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace movidx
