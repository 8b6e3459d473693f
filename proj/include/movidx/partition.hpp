#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "movidx/error.hpp"

namespace movidx {

// ─── Almost-square tiling ────────────────────────────────────────
//
// Splits a W×H frame into n rectangular tiles arranged in columns. Most
// columns are "regular" (rows tiles each); when n falls short of the
// enclosing cols×rows grid, the rightmost columns are "irregular" and hold
// one tile less, stretched to keep the cover exact. Every tile is tagged
// with one of six classes describing its role in that arrangement.

enum class TileClass {
    RST,    // regular standard tile
    RET,    // regular excess tile (bottom of a regular column)
    IST,    // irregular standard tile
    ICET,   // irregular corner-column standard tile (last irregular column)
    IRET,   // irregular excess tile (bottom of an irregular column)
    IRCET,  // irregular corner-column excess tile (bottom right)
};

inline const char* tile_class_name(TileClass cls) {
    switch (cls) {
        case TileClass::RST: return "RST";
        case TileClass::RET: return "RET";
        case TileClass::IST: return "IST";
        case TileClass::ICET: return "ICET";
        case TileClass::IRET: return "IRET";
        case TileClass::IRCET: return "IRCET";
    }
    return "?";
}

struct Tile {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
    int col_index = 0;
    int row_index = 0;
    TileClass cls = TileClass::RST;

    friend bool operator==(const Tile&, const Tile&) = default;
};

struct PartitionLayout {
    int image_width = 0;
    int image_height = 0;
    int partitions = 0;
    int k = 0;             // least perfect square ≥ partitions
    int first_square = 0;  // √k
    int cols = 0;
    int rows = 0;
    int irr_cols = 0;      // cols*rows − partitions
    int a = 0;             // regular tile height
    int ap = 0;            // regular excess tile height (bottom row)
    int ar = 0;            // irregular tile height
    int arp = 0;           // irregular excess tile height
    int b = 0;             // regular column width
    int bp = 0;            // irregular column width
    int bpp = 0;           // last irregular column width
    std::vector<Tile> tiles;

    friend bool operator==(const PartitionLayout&, const PartitionLayout&) = default;
};

namespace detail {

inline int int_sqrt_ceil(std::int64_t n) {
    auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (s * s < n) ++s;
    while (s >= 1 && (s - 1) * (s - 1) >= n) --s;
    return static_cast<int>(s);
}

[[noreturn]] inline void too_small(const char* symbol, int value, int n, int w, int h) {
    throw ValidationError(std::string("partition: derived ") + symbol + " = " +
                          std::to_string(value) + " (must be ≥ 1); " +
                          std::to_string(w) + "x" + std::to_string(h) +
                          " is too small for " + std::to_string(n) + " tiles");
}

}  // namespace detail

// Computes the full layout for n tiles over a W×H frame. All divisions are
// floor divisions; the excess symbols (ap, arp, bpp) absorb the remainders,
// which is what makes the cover exact. Errors name the derived symbol that
// collapsed below one pixel.
inline PartitionLayout ast_partition(int n, int width, int height) {
    if (n < 1) throw ValidationError("partition: n must be ≥ 1");
    if (width < 1 || height < 1) {
        throw ValidationError("partition: frame dimensions must be ≥ 1");
    }
    if (static_cast<std::int64_t>(n) >
        static_cast<std::int64_t>(width) * height) {
        throw ValidationError("partition: " + std::to_string(n) +
                              " tiles cannot each get a pixel of " +
                              std::to_string(width) + "x" + std::to_string(height));
    }

    PartitionLayout layout;
    layout.image_width = width;
    layout.image_height = height;
    layout.partitions = n;

    const int s = detail::int_sqrt_ceil(n);
    layout.first_square = s;
    layout.k = s * s;
    layout.cols = s;
    // A full extra row is shaved off when the remaining grid still fits n.
    if (s * s == n) {
        layout.rows = s;
    } else if ((s - 1) * s >= n) {
        layout.rows = s - 1;
    } else {
        layout.rows = s;
    }
    layout.irr_cols = layout.cols * layout.rows - n;

    const int cols = layout.cols, rows = layout.rows, irr = layout.irr_cols;

    layout.a = height / rows;
    if (layout.a < 1) detail::too_small("a", layout.a, n, width, height);
    layout.ap = height - layout.a * (rows - 1);
    if (layout.ap < 1) detail::too_small("ap", layout.ap, n, width, height);

    if (rows >= 2 && irr >= 1) {
        layout.ar = height / (rows - 1);
        if (layout.ar < 1) detail::too_small("ar", layout.ar, n, width, height);
        layout.arp = height - layout.ar * (rows - 2);
        if (layout.arp < 1) detail::too_small("arp", layout.arp, n, width, height);
    }

    if (irr >= 1) {
        // Width split balancing per-tile area between regular and irregular
        // columns: b = W·ar / (ar·(cols−irr) + a·irr), kept in integers.
        const std::int64_t numer = static_cast<std::int64_t>(width) * layout.ar;
        const std::int64_t denom =
            static_cast<std::int64_t>(layout.ar) * (cols - irr) +
            static_cast<std::int64_t>(layout.a) * irr;
        layout.b = static_cast<int>(numer / denom);
        if (layout.b < 1) detail::too_small("b", layout.b, n, width, height);
        const int rest = width - layout.b * (cols - irr);
        layout.bp = rest / irr;
        if (layout.bp < 1) detail::too_small("bp", layout.bp, n, width, height);
        layout.bpp = rest - layout.bp * (irr - 1);
        if (layout.bpp < 1) detail::too_small("bpp", layout.bpp, n, width, height);
    } else {
        layout.b = width / cols;
        if (layout.b < 1) detail::too_small("b", layout.b, n, width, height);
    }

    // Lay columns left to right: regular first, irregular rightmost.
    int x = 0;
    for (int c = 0; c < cols; ++c) {
        const bool irregular = c >= cols - irr;
        const bool last_irregular = irregular && c == cols - 1;
        int col_width;
        if (!irregular) {
            // Without irregular columns the last regular one absorbs the
            // width remainder; otherwise bp/bpp absorb it.
            col_width = (irr == 0 && c == cols - 1) ? width - layout.b * (cols - 1)
                                                    : layout.b;
        } else {
            col_width = last_irregular ? layout.bpp : layout.bp;
        }

        const int tiles_here = irregular ? rows - 1 : rows;
        int y = 0;
        for (int r = 0; r < tiles_here; ++r) {
            const bool excess = r == tiles_here - 1;
            int tile_height;
            TileClass cls;
            if (!irregular) {
                tile_height = excess ? layout.ap : layout.a;
                cls = excess ? TileClass::RET : TileClass::RST;
            } else {
                tile_height = excess ? layout.arp : layout.ar;
                if (excess) {
                    cls = last_irregular ? TileClass::IRCET : TileClass::IRET;
                } else {
                    cls = last_irregular ? TileClass::ICET : TileClass::IST;
                }
            }
            layout.tiles.push_back({x, y, col_width, tile_height, c, r, cls});
            y += tile_height;
        }
        x += col_width;
    }
    return layout;
}

// ─── Coverage verification ───────────────────────────────────────

struct CoverageReport {
    bool covered = false;       // every pixel claimed exactly once
    bool overlap_found = false;
    std::int64_t area_sum = 0;
    std::size_t tile_count = 0;
};

// Exact-cover check without touching pixels: cut the frame at every tile
// edge into vertical strips; inside a strip each tile either spans it fully
// or not at all, so coverage reduces to the tiles' y-intervals partitioning
// [0, H) strip by strip. Overlap is checked pairwise.
inline CoverageReport verify_layout(const PartitionLayout& layout) {
    CoverageReport report;
    report.tile_count = layout.tiles.size();

    bool bounds_ok = true;
    for (const Tile& t : layout.tiles) {
        report.area_sum += static_cast<std::int64_t>(t.width) * t.height;
        if (t.width < 1 || t.height < 1 || t.x < 0 || t.y < 0 ||
            t.x + t.width > layout.image_width ||
            t.y + t.height > layout.image_height) {
            bounds_ok = false;
        }
    }

    for (std::size_t i = 0; i < layout.tiles.size() && !report.overlap_found; ++i) {
        for (std::size_t j = i + 1; j < layout.tiles.size(); ++j) {
            const Tile& p = layout.tiles[i];
            const Tile& q = layout.tiles[j];
            if (p.x < q.x + q.width && q.x < p.x + p.width &&
                p.y < q.y + q.height && q.y < p.y + p.height) {
                report.overlap_found = true;
                break;
            }
        }
    }

    if (!bounds_ok || report.overlap_found) return report;

    std::vector<int> cuts = {0, layout.image_width};
    for (const Tile& t : layout.tiles) {
        cuts.push_back(t.x);
        cuts.push_back(t.x + t.width);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const int x1 = cuts[i], x2 = cuts[i + 1];
        std::vector<std::pair<int, int>> spans;  // (y, height) of tiles over the strip
        for (const Tile& t : layout.tiles) {
            if (t.x <= x1 && t.x + t.width >= x2) spans.push_back({t.y, t.height});
        }
        std::sort(spans.begin(), spans.end());
        int cursor = 0;
        for (const auto& [y, h] : spans) {
            if (y != cursor) return report;  // gap (overlaps already excluded)
            cursor = y + h;
        }
        if (cursor != layout.image_height) return report;
    }

    report.covered =
        report.area_sum == static_cast<std::int64_t>(layout.image_width) *
                               layout.image_height;
    return report;
}

// ─── Load-balance statistics ─────────────────────────────────────

struct LayoutStats {
    std::int64_t min_area = 0;
    std::int64_t max_area = 0;
    double mean_area = 0.0;
    double imbalance = 0.0;     // max_area / mean_area, ≥ 1 on exact covers
    double worst_aspect = 0.0;  // max over tiles of max(w/h, h/w)
    std::map<TileClass, std::size_t> class_counts;
};

inline LayoutStats layout_stats(const PartitionLayout& layout) {
    if (layout.tiles.empty()) throw ValidationError("layout has no tiles");
    LayoutStats stats;
    std::int64_t total = 0;
    stats.min_area = std::numeric_limits<std::int64_t>::max();
    for (const Tile& t : layout.tiles) {
        const std::int64_t area = static_cast<std::int64_t>(t.width) * t.height;
        total += area;
        stats.min_area = std::min(stats.min_area, area);
        stats.max_area = std::max(stats.max_area, area);
        const double aspect =
            std::max(static_cast<double>(t.width) / t.height,
                     static_cast<double>(t.height) / t.width);
        stats.worst_aspect = std::max(stats.worst_aspect, aspect);
        ++stats.class_counts[t.cls];
    }
    stats.mean_area = static_cast<double>(total) / static_cast<double>(layout.tiles.size());
    stats.imbalance = static_cast<double>(stats.max_area) / stats.mean_area;
    return stats;
}

// ─── JSON rendering ──────────────────────────────────────────────

inline nlohmann::json layout_to_json(const PartitionLayout& layout) {
    nlohmann::json j;
    j["image_width"] = layout.image_width;
    j["image_height"] = layout.image_height;
    j["partitions"] = layout.partitions;
    j["k"] = layout.k;
    j["first_square"] = layout.first_square;
    j["cols"] = layout.cols;
    j["rows"] = layout.rows;
    j["irr_cols"] = layout.irr_cols;
    j["a"] = layout.a;
    j["ap"] = layout.ap;
    j["ar"] = layout.ar;
    j["arp"] = layout.arp;
    j["b"] = layout.b;
    j["bp"] = layout.bp;
    j["bpp"] = layout.bpp;
    nlohmann::json tiles = nlohmann::json::array();
    for (const Tile& t : layout.tiles) {
        nlohmann::json tile;
        tile["x"] = t.x;
        tile["y"] = t.y;
        tile["width"] = t.width;
        tile["height"] = t.height;
        tile["col_index"] = t.col_index;
        tile["row_index"] = t.row_index;
        tile["class"] = tile_class_name(t.cls);
        tiles.push_back(std::move(tile));
    }
    j["tiles"] = std::move(tiles);
    return j;
}

}  // namespace movidx
