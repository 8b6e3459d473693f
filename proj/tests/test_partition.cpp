#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "movidx/partition.hpp"

using namespace movidx;

namespace {

// Reference cover check: paint every tile onto a W×H grid and count claims.
// Quadratic in pixels and deliberately naive — the sweep in verify_layout
// must agree with this on every layout and every mutation.
struct PaintReport {
    bool covered = false;
    bool overlap_found = false;
};

PaintReport paint_check(const PartitionLayout& layout) {
    PaintReport report;
    const int w = layout.image_width, h = layout.image_height;
    std::vector<std::uint8_t> claims(static_cast<std::size_t>(w) * h, 0);
    bool out_of_bounds = false;
    for (const Tile& t : layout.tiles) {
        if (t.width < 1 || t.height < 1 || t.x < 0 || t.y < 0 || t.x + t.width > w ||
            t.y + t.height > h) {
            out_of_bounds = true;
            continue;
        }
        for (int y = t.y; y < t.y + t.height; ++y) {
            for (int x = t.x; x < t.x + t.width; ++x) {
                std::uint8_t& c = claims[static_cast<std::size_t>(y) * w + x];
                if (c > 0) report.overlap_found = true;
                if (c < 255) ++c;
            }
        }
    }
    report.covered = !out_of_bounds && !report.overlap_found;
    if (report.covered) {
        for (std::uint8_t c : claims) {
            if (c != 1) {
                report.covered = false;
                break;
            }
        }
    }
    return report;
}

Tile tile(int x, int y, int w, int h, int c, int r, TileClass cls) {
    return Tile{x, y, w, h, c, r, cls};
}

}  // namespace

TEST_CASE("five tiles over 100x100") {
    PartitionLayout layout = ast_partition(5, 100, 100);
    CHECK(layout.k == 9);
    CHECK(layout.first_square == 3);
    CHECK(layout.cols == 3);
    CHECK(layout.rows == 2);
    CHECK(layout.irr_cols == 1);
    CHECK(layout.a == 50);
    CHECK(layout.ap == 50);
    CHECK(layout.ar == 100);
    CHECK(layout.arp == 100);
    CHECK(layout.b == 40);
    CHECK(layout.bp == 20);
    CHECK(layout.bpp == 20);
    const std::vector<Tile> expected = {
        tile(0, 0, 40, 50, 0, 0, TileClass::RST),
        tile(0, 50, 40, 50, 0, 1, TileClass::RET),
        tile(40, 0, 40, 50, 1, 0, TileClass::RST),
        tile(40, 50, 40, 50, 1, 1, TileClass::RET),
        tile(80, 0, 20, 100, 2, 0, TileClass::IRCET),
    };
    CHECK(layout.tiles == expected);

    CoverageReport cover = verify_layout(layout);
    CHECK(cover.covered);
    CHECK_FALSE(cover.overlap_found);
    CHECK(cover.area_sum == 10000);
    CHECK(cover.tile_count == 5);

    LayoutStats stats = layout_stats(layout);
    CHECK(stats.class_counts ==
          std::map<TileClass, std::size_t>{
              {TileClass::RST, 2}, {TileClass::RET, 2}, {TileClass::IRCET, 1}});
    CHECK(stats.max_area == 2000);
    CHECK(stats.min_area == 2000);
    CHECK(stats.mean_area == 2000.0);
    CHECK(stats.imbalance == 1.0);
}

TEST_CASE("three tiles over 90x90") {
    PartitionLayout layout = ast_partition(3, 90, 90);
    CHECK(layout.b == 60);
    CHECK(layout.bp == 30);
    CHECK(layout.bpp == 30);
    const std::vector<Tile> expected = {
        tile(0, 0, 60, 45, 0, 0, TileClass::RST),
        tile(0, 45, 60, 45, 0, 1, TileClass::RET),
        tile(60, 0, 30, 90, 1, 0, TileClass::IRCET),
    };
    CHECK(layout.tiles == expected);
    CHECK(verify_layout(layout).covered);
    CHECK(layout_stats(layout).worst_aspect == 3.0);
}

TEST_CASE("four tiles over 100x100 form the uniform grid") {
    PartitionLayout layout = ast_partition(4, 100, 100);
    const std::vector<Tile> expected = {
        tile(0, 0, 50, 50, 0, 0, TileClass::RST),
        tile(0, 50, 50, 50, 0, 1, TileClass::RET),
        tile(50, 0, 50, 50, 1, 0, TileClass::RST),
        tile(50, 50, 50, 50, 1, 1, TileClass::RET),
    };
    CHECK(layout.tiles == expected);
    LayoutStats stats = layout_stats(layout);
    CHECK(stats.imbalance == 1.0);
    CHECK(stats.worst_aspect == 1.0);
}

TEST_CASE("one tile spans the whole frame") {
    PartitionLayout layout = ast_partition(1, 640, 480);
    REQUIRE(layout.tiles.size() == 1);
    CHECK(layout.tiles[0] == tile(0, 0, 640, 480, 0, 0, TileClass::RET));
    CHECK(verify_layout(layout).covered);
}

TEST_CASE("identical inputs give identical layouts") {
    CHECK(ast_partition(7, 641, 479) == ast_partition(7, 641, 479));
}

TEST_CASE("perfect squares on divisible frames tile uniformly") {
    PartitionLayout layout = ast_partition(9, 90, 90);
    REQUIRE(layout.tiles.size() == 9);
    for (const Tile& t : layout.tiles) {
        CHECK(t.width == 30);
        CHECK(t.height == 30);
    }
    CHECK(layout_stats(layout).imbalance == 1.0);
}

TEST_CASE("sweep verifier matches the paint oracle across many layouts") {
    const std::vector<std::pair<int, int>> sizes = {
        {64, 64}, {100, 100}, {127, 97}, {640, 480}, {641, 479}};
    for (const auto& [w, h] : sizes) {
        for (int n = 1; n <= 40; ++n) {
            INFO("n=" << n << " size=" << w << "x" << h);
            PartitionLayout layout = ast_partition(n, w, h);
            REQUIRE(layout.tiles.size() == static_cast<std::size_t>(n));

            CoverageReport swept = verify_layout(layout);
            PaintReport painted = paint_check(layout);
            REQUIRE(swept.covered == painted.covered);
            REQUIRE(swept.overlap_found == painted.overlap_found);
            REQUIRE(swept.covered);

            // Column accounting: regular columns carry `rows` tiles,
            // irregular ones carry rows−1, and together they carry n.
            REQUIRE((layout.cols - layout.irr_cols) * layout.rows +
                        layout.irr_cols * (layout.rows - 1) ==
                    n);
            REQUIRE(layout.irr_cols >= 0);
            REQUIRE(layout.irr_cols < layout.cols);
            REQUIRE(layout.ap >= layout.a);
            if (layout.irr_cols >= 1 && layout.rows >= 3) {
                REQUIRE(layout.arp >= layout.ar);
            }
        }
    }
}

TEST_CASE("sweep verifier catches mutations the oracle catches") {
    PartitionLayout base = ast_partition(7, 127, 97);

    SECTION("deleting a tile leaves a hole") {
        PartitionLayout damaged = base;
        damaged.tiles.erase(damaged.tiles.begin() + 3);
        CoverageReport report = verify_layout(damaged);
        CHECK_FALSE(report.covered);
        CHECK_FALSE(report.overlap_found);
        CHECK(paint_check(damaged).covered == report.covered);
    }
    SECTION("duplicating a tile overlaps") {
        PartitionLayout damaged = base;
        damaged.tiles.push_back(damaged.tiles[2]);
        CoverageReport report = verify_layout(damaged);
        CHECK_FALSE(report.covered);
        CHECK(report.overlap_found);
        CHECK(paint_check(damaged).overlap_found);
    }
    SECTION("nudging a tile both overlaps and leaves a gap") {
        PartitionLayout damaged = base;
        damaged.tiles[0].x += 1;
        CoverageReport report = verify_layout(damaged);
        CHECK_FALSE(report.covered);
        CHECK(report.overlap_found);
    }
    SECTION("a tile hanging past the frame cannot cover") {
        PartitionLayout damaged = base;
        damaged.tiles.back().width += 5;
        CHECK_FALSE(verify_layout(damaged).covered);
    }
    SECTION("degenerate tile dimensions cannot cover") {
        PartitionLayout damaged = base;
        damaged.tiles[1].height = 0;
        CHECK_FALSE(verify_layout(damaged).covered);
    }
}

TEST_CASE("impossible partitions fail with the reason named") {
    CHECK_THROWS_AS(ast_partition(0, 100, 100), ValidationError);
    CHECK_THROWS_AS(ast_partition(5, 0, 100), ValidationError);
    CHECK_THROWS_AS(ast_partition(101, 10, 10), ValidationError);

    SECTION("too narrow for the column count") {
        try {
            ast_partition(9, 2, 100);
            FAIL("expected an error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("b = 0") != std::string::npos);
        }
    }
    SECTION("too short for the row count") {
        try {
            ast_partition(9, 100, 2);
            FAIL("expected an error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("a = 0") != std::string::npos);
        }
    }
    SECTION("failures on tiny frames always name a symbol") {
        const std::vector<std::string> symbols = {"a", "ap", "ar", "arp",
                                                  "b", "bp", "bpp"};
        int failures = 0;
        for (int w = 1; w <= 8; ++w) {
            for (int h = 1; h <= 8; ++h) {
                for (int n = 1; n <= w * h; ++n) {
                    try {
                        PartitionLayout layout = ast_partition(n, w, h);
                        REQUIRE(verify_layout(layout).covered);
                    } catch (const ValidationError& e) {
                        ++failures;
                        const std::string msg = e.what();
                        bool named = false;
                        for (const auto& s : symbols) {
                            if (msg.find("derived " + s + " =") != std::string::npos) {
                                named = true;
                            }
                        }
                        REQUIRE(named);
                    }
                }
            }
        }
        CHECK(failures > 0);  // the range above does contain infeasible cases
    }
}

TEST_CASE("layouts render to json with every symbol") {
    nlohmann::json j = layout_to_json(ast_partition(5, 100, 100));
    CHECK(j["partitions"] == 5);
    CHECK(j["k"] == 9);
    CHECK(j["first_square"] == 3);
    CHECK(j["cols"] == 3);
    CHECK(j["rows"] == 2);
    CHECK(j["irr_cols"] == 1);
    CHECK(j["a"] == 50);
    CHECK(j["ap"] == 50);
    CHECK(j["ar"] == 100);
    CHECK(j["arp"] == 100);
    CHECK(j["b"] == 40);
    CHECK(j["bp"] == 20);
    CHECK(j["bpp"] == 20);
    REQUIRE(j["tiles"].size() == 5);
    CHECK(j["tiles"][0]["class"] == "RST");
    CHECK(j["tiles"][4]["class"] == "IRCET");
    CHECK(j["tiles"][4]["x"] == 80);
    CHECK(j["tiles"][4]["width"] == 20);
    CHECK(j["tiles"][4]["col_index"] == 2);
    CHECK(j["tiles"][4]["row_index"] == 0);
}
