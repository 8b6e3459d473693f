#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "movidx/bench.hpp"
#include "movidx/error.hpp"
#include "movidx/textindex.hpp"

using namespace movidx;

TEST_CASE("bounded_rand stays in range and hits every value") {
    std::mt19937_64 gen(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t r = detail::bounded_rand(gen, 7);
        REQUIRE(r < 7);
        seen.insert(r);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("uniform01 stays in [0, 1)") {
    std::mt19937_64 gen(2);
    for (int i = 0; i < 10000; ++i) {
        const double u = detail::uniform01(gen);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("zipf sampler produces valid ranks, head-heavy, deterministic") {
    ZipfSampler sampler(50);
    CHECK(sampler.size() == 50);

    std::mt19937_64 gen(3);
    std::map<std::size_t, int> counts;
    for (int i = 0; i < 20000; ++i) {
        const std::size_t rank = sampler.sample(gen);
        REQUIRE(rank >= 1);
        REQUIRE(rank <= 50);
        counts[rank]++;
    }
    // Harmonic weights put about half the mass on the first five ranks and
    // about 2% on the last five; the gap is enormous at this sample size.
    int head = 0, tail = 0;
    for (std::size_t r = 1; r <= 5; ++r) head += counts[r];
    for (std::size_t r = 46; r <= 50; ++r) tail += counts[r];
    CHECK(head > tail * 5);

    std::mt19937_64 a(9), b(9);
    for (int i = 0; i < 100; ++i) CHECK(sampler.sample(a) == sampler.sample(b));

    CHECK_THROWS_AS(ZipfSampler(0), ValidationError);
}

TEST_CASE("synthetic corpus has padded sorted ids and 5..50 vocabulary terms") {
    std::mt19937_64 gen(11);
    const auto docs = make_synthetic_corpus(200, 30, gen);
    REQUIRE(docs.size() == 200);

    CHECK(docs.front().id == "d000000");
    CHECK(docs.back().id == "d000199");
    CHECK(std::is_sorted(docs.begin(), docs.end(),
                         [](const Document& a, const Document& b) { return a.id < b.id; }));

    for (const Document& doc : docs) {
        const auto terms = tokenize(doc.text);
        REQUIRE(terms.size() >= 5);
        REQUIRE(terms.size() <= 50);
        for (const std::string& term : terms) {
            REQUIRE(term.size() >= 2);
            REQUIRE(term[0] == 't');
            const int rank = std::stoi(term.substr(1));
            REQUIRE(rank >= 1);
            REQUIRE(rank <= 30);
        }
    }

    std::mt19937_64 again(11);
    const auto docs2 = make_synthetic_corpus(200, 30, again);
    CHECK(docs == docs2);
}

TEST_CASE("corpus id width grows with document count") {
    std::mt19937_64 gen(4);
    const auto docs = make_synthetic_corpus(3, 5, gen);
    CHECK(docs[0].id == "d000000");

    std::mt19937_64 gen2(4);
    // 10^7 ids need 7 digits, one more than the 6-digit floor.
    // Generating that many documents here would be slow, so check the
    // helper directly.
    CHECK(detail::padded_doc_id(0, 7) == "d0000000");
    CHECK(detail::padded_doc_id(9999999, 7) == "d9999999");
}

TEST_CASE("index on synthetic corpus conserves term counts") {
    std::mt19937_64 gen(21);
    const auto docs = make_synthetic_corpus(150, 40, gen);
    const InvertedIndex index = build_index(docs);

    std::int64_t expected = 0;
    for (const Document& doc : docs) {
        expected += static_cast<std::int64_t>(tokenize(doc.text).size());
    }
    CHECK(index.total_terms == expected);
    CHECK(index.doc_count == docs.size());
}

TEST_CASE("adding a document never removes existing postings") {
    std::mt19937_64 gen(33);
    const auto docs = make_synthetic_corpus(101, 25, gen);
    const std::vector<Document> first(docs.begin(), docs.begin() + 100);

    const InvertedIndex small = build_index(first);
    const InvertedIndex large = build_index(docs);

    for (const auto& [term, postings] : small.terms) {
        auto it = large.terms.find(term);
        REQUIRE(it != large.terms.end());
        for (const Posting& p : postings) {
            auto match = std::find_if(it->second.begin(), it->second.end(),
                                      [&](const Posting& q) { return q.doc_id == p.doc_id; });
            REQUIRE(match != it->second.end());
            CHECK(match->tf == p.tf);
        }
    }
}

TEST_CASE("generated queries parse, stay within 1..3 terms, deterministic") {
    std::mt19937_64 gen(17);
    const auto queries = make_benchmark_queries(50, 30, gen);
    REQUIRE(queries.size() == 50);

    for (const std::string& text : queries) {
        QueryAst ast(text);  // throws on malformed or unbounded queries
        // Count the vocabulary words; connector keywords are uppercase and
        // vocabulary terms are "t<digits>", so tokenizing the lowercased
        // text and filtering works.
        int term_words = 0;
        for (const std::string& tok : tokenize(text)) {
            if (tok != "and" && tok != "or" && tok != "not") ++term_words;
        }
        REQUIRE(term_words >= 1);
        REQUIRE(term_words <= 3);
    }

    std::mt19937_64 again(17);
    CHECK(make_benchmark_queries(50, 30, again) == queries);
}

TEST_CASE("benchmark on a small corpus verifies results and reports timings") {
    const BenchReport report = run_benchmark(400, 60, 25, 5, 1e-9);

    CHECK(report.corpus_size == 400);
    CHECK(report.vocab_size == 60);
    CHECK(report.query_count == 25);
    CHECK(report.seed == 5);
    CHECK(report.threshold == 1e-9);
    CHECK(report.scan_total_ns > 0);
    CHECK(report.indexed_total_ns >= 0);
    CHECK(report.build_ns >= 0);

    const double expected_speedup =
        static_cast<double>(report.scan_total_ns) /
        static_cast<double>(std::max<std::int64_t>(report.indexed_total_ns, 1));
    CHECK(report.speedup == Catch::Approx(expected_speedup));
    // Any positive speedup beats a 1e-9 threshold.
    CHECK(report.success);
}

TEST_CASE("benchmark cannot beat an astronomical threshold on one document") {
    const BenchReport report = run_benchmark(1, 2, 1, 0, 1e9);
    CHECK(report.corpus_size == 1);
    CHECK_FALSE(report.success);
}

TEST_CASE("benchmark rejects out-of-range parameters") {
    CHECK_THROWS_AS(run_benchmark(0, 2, 1, 0, 10.0), ValidationError);
    CHECK_THROWS_AS(run_benchmark(1, 1, 1, 0, 10.0), ValidationError);
    CHECK_THROWS_AS(run_benchmark(1, 2, 0, 0, 10.0), ValidationError);
}

TEST_CASE("benchmark report serializes every field with millisecond views") {
    BenchReport report;
    report.corpus_size = 10;
    report.vocab_size = 4;
    report.query_count = 2;
    report.seed = 42;
    report.threshold = 10.0;
    report.build_ns = 3000000;           // 3 ms
    report.scan_total_ns = 50000000;     // 50 ms
    report.indexed_total_ns = 2000000;   // 2 ms
    report.speedup = 25.0;
    report.success = true;

    const nlohmann::json j = bench_report_to_json(report);
    CHECK(j["corpus_size"] == 10);
    CHECK(j["vocab_size"] == 4);
    CHECK(j["query_count"] == 2);
    CHECK(j["seed"] == 42);
    CHECK(j["threshold"] == 10.0);
    CHECK(j["build_ms"].get<double>() == Catch::Approx(3.0));
    CHECK(j["scan_total_ms"].get<double>() == Catch::Approx(50.0));
    CHECK(j["indexed_total_ms"].get<double>() == Catch::Approx(2.0));
    CHECK(j["scan_mean_ms"].get<double>() == Catch::Approx(25.0));
    CHECK(j["indexed_mean_ms"].get<double>() == Catch::Approx(1.0));
    CHECK(j["speedup"] == 25.0);
    CHECK(j["success"] == true);

    const std::string text = serialize_bench_report(report);
    CHECK(text.back() == '\n');
    CHECK(nlohmann::json::parse(text) == j);
}
