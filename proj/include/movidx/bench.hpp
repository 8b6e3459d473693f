#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "movidx/document.hpp"
#include "movidx/error.hpp"
#include "movidx/textindex.hpp"

namespace movidx {

// ─── Deterministic randomness ────────────────────────────────────
//
// Benchmark corpora must be reproducible across platforms and standard
// library implementations, so everything is derived from the raw
// mt19937_64 stream (whose output sequence the standard pins down).
// std::uniform_int_distribution and friends are implementation-defined
// and would break that guarantee.

namespace detail {

// Unbiased draw in [0, bound) via rejection of the partial top block.
inline std::uint64_t bounded_rand(std::mt19937_64& gen, std::uint64_t bound) {
    const std::uint64_t reject_below = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t x = gen();
        if (x >= reject_below) return x % bound;
    }
}

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// ─── Zipf-like term sampler ──────────────────────────────────────

// Draws 1-based ranks with probability proportional to 1/rank^exponent.
// Rank 1 is the most frequent term. Sampling walks a cumulative weight
// table with binary search, so construction is O(size) and each draw
// O(log size).
class ZipfSampler {
public:
    explicit ZipfSampler(std::size_t size, double exponent = 1.0) {
        if (size < 1) throw ValidationError("zipf sampler: size must be >= 1");
        cumulative_.reserve(size);
        double total = 0.0;
        for (std::size_t rank = 1; rank <= size; ++rank) {
            total += 1.0 / std::pow(static_cast<double>(rank), exponent);
            cumulative_.push_back(total);
        }
    }

    std::size_t size() const { return cumulative_.size(); }

    // Returns a rank in [1, size()].
    std::size_t sample(std::mt19937_64& gen) const {
        const double u = detail::uniform01(gen) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
        if (idx >= cumulative_.size()) idx = cumulative_.size() - 1;
        return idx + 1;
    }

private:
    std::vector<double> cumulative_;
};

// ─── Synthetic corpus and query generation ───────────────────────

namespace detail {

inline std::string padded_doc_id(std::size_t index, std::size_t width) {
    std::string digits = std::to_string(index);
    std::string id = "d";
    if (digits.size() < width) id.append(width - digits.size(), '0');
    id += digits;
    return id;
}

}  // namespace detail

// Builds doc_count documents of 5–50 terms each, drawn Zipf-like from a
// vocabulary t1..t<vocab_size>. Ids are zero-padded ("d000042") so that
// lexicographic order equals generation order.
inline std::vector<Document> make_synthetic_corpus(std::size_t doc_count,
                                                   std::size_t vocab_size,
                                                   std::mt19937_64& gen) {
    if (doc_count < 1) throw ValidationError("synthetic corpus: doc_count must be >= 1");
    if (vocab_size < 2) throw ValidationError("synthetic corpus: vocab_size must be >= 2");
    const std::size_t width =
        std::max<std::size_t>(6, std::to_string(doc_count - 1).size());
    ZipfSampler sampler(vocab_size);
    std::vector<Document> docs;
    docs.reserve(doc_count);
    for (std::size_t i = 0; i < doc_count; ++i) {
        const std::size_t length = 5 + detail::bounded_rand(gen, 46);  // 5..50
        std::string text;
        for (std::size_t t = 0; t < length; ++t) {
            if (t > 0) text += ' ';
            text += 't';
            text += std::to_string(sampler.sample(gen));
        }
        docs.push_back({detail::padded_doc_id(i, width), std::move(text)});
    }
    return docs;
}

// Builds `count` boolean query strings of 1–3 terms over the same
// vocabulary. The first term is always plain and later terms attach with
// AND, OR, or AND NOT, so every disjunct keeps at least one positive
// term and the parser's boundedness check always accepts the query.
inline std::vector<std::string> make_benchmark_queries(std::size_t count,
                                                       std::size_t vocab_size,
                                                       std::mt19937_64& gen) {
    if (vocab_size < 2) throw ValidationError("benchmark queries: vocab_size must be >= 2");
    static const char* kConnectors[] = {" AND ", " OR ", " AND NOT "};
    ZipfSampler sampler(vocab_size);
    std::vector<std::string> queries;
    queries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t terms = 1 + detail::bounded_rand(gen, 3);  // 1..3
        std::string q = "t" + std::to_string(sampler.sample(gen));
        for (std::size_t t = 1; t < terms; ++t) {
            q += kConnectors[detail::bounded_rand(gen, 3)];
            q += 't';
            q += std::to_string(sampler.sample(gen));
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

// ─── Benchmark report ────────────────────────────────────────────

// Times the linear-scan baseline against indexed evaluation on the same
// corpus and queries. Index build time is kept out of the query totals
// and reported on its own so the build/query trade-off stays visible.
struct BenchReport {
    std::size_t corpus_size = 0;
    std::size_t vocab_size = 0;
    std::size_t query_count = 0;
    std::uint64_t seed = 0;
    double threshold = 0.0;
    std::int64_t build_ns = 0;
    std::int64_t scan_total_ns = 0;
    std::int64_t indexed_total_ns = 0;
    double speedup = 0.0;  // scan_total / indexed_total
    bool success = false;  // speedup > threshold

    friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

inline nlohmann::json bench_report_to_json(const BenchReport& report) {
    const auto ms = [](std::int64_t ns) { return static_cast<double>(ns) / 1e6; };
    const double denom = static_cast<double>(std::max<std::size_t>(report.query_count, 1));
    nlohmann::json j;
    j["corpus_size"] = report.corpus_size;
    j["vocab_size"] = report.vocab_size;
    j["query_count"] = report.query_count;
    j["seed"] = report.seed;
    j["threshold"] = report.threshold;
    j["build_ms"] = ms(report.build_ns);
    j["scan_total_ms"] = ms(report.scan_total_ns);
    j["indexed_total_ms"] = ms(report.indexed_total_ns);
    j["scan_mean_ms"] = ms(report.scan_total_ns) / denom;
    j["indexed_mean_ms"] = ms(report.indexed_total_ns) / denom;
    j["speedup"] = report.speedup;
    j["success"] = report.success;
    return j;
}

inline std::string serialize_bench_report(const BenchReport& report) {
    return bench_report_to_json(report).dump(2) + "\n";
}

// ─── Benchmark driver ────────────────────────────────────────────

// Generates a seeded corpus and query set, verifies that scan and
// indexed evaluation agree exactly on every query, and reports total and
// mean times for both paths. A result mismatch means the index or the
// evaluator is broken, so it aborts the run rather than reporting
// timings for wrong answers. Both paths run single-threaded and
// interleaved per query to keep the comparison fair.
inline BenchReport run_benchmark(std::size_t doc_count, std::size_t vocab_size,
                                 std::size_t queries, std::uint64_t seed,
                                 double threshold) {
    if (doc_count < 1) throw ValidationError("benchmark: doc_count must be >= 1");
    if (vocab_size < 2) throw ValidationError("benchmark: vocab_size must be >= 2");
    if (queries < 1) throw ValidationError("benchmark: queries must be >= 1");

    using clock = std::chrono::steady_clock;
    const auto elapsed_ns = [](clock::time_point from, clock::time_point to) {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count();
    };

    std::mt19937_64 gen(seed);
    const std::vector<Document> docs = make_synthetic_corpus(doc_count, vocab_size, gen);
    const std::vector<std::string> query_texts =
        make_benchmark_queries(queries, vocab_size, gen);
    std::vector<QueryAst> asts;
    asts.reserve(query_texts.size());
    for (const std::string& text : query_texts) asts.emplace_back(text);

    BenchReport report;
    report.corpus_size = doc_count;
    report.vocab_size = vocab_size;
    report.query_count = queries;
    report.seed = seed;
    report.threshold = threshold;

    const auto build_start = clock::now();
    const InvertedIndex index = build_index(docs);
    report.build_ns = elapsed_ns(build_start, clock::now());

    for (std::size_t i = 0; i < asts.size(); ++i) {
        const auto scan_start = clock::now();
        const QueryResult scanned = scan_query(docs, asts[i]);
        const auto scan_end = clock::now();
        const QueryResult indexed = query_index(index, asts[i]);
        const auto indexed_end = clock::now();

        if (scanned != indexed) {
            throw InternalError("benchmark: scan and index results differ on query \"" +
                                query_texts[i] + "\"");
        }
        report.scan_total_ns += elapsed_ns(scan_start, scan_end);
        report.indexed_total_ns += elapsed_ns(scan_end, indexed_end);
    }

    report.speedup = static_cast<double>(report.scan_total_ns) /
                     static_cast<double>(std::max<std::int64_t>(report.indexed_total_ns, 1));
    report.success = report.speedup > threshold;
    return report;
}

}  // namespace movidx
