#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "movidx/error.hpp"

namespace movidx {

// Grayscale raster standing in for a decoded video frame. Row-major,
// one byte per pixel.
struct SyntheticFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    std::size_t pixel_count() const { return pixels.size(); }

    friend bool operator==(const SyntheticFrame&, const SyntheticFrame&) = default;
};

inline void check_frame_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw ValidationError("frame dimensions must be positive");
    }
}

// Deterministic pseudo-random frame; mt19937 output is fixed by the standard,
// so the same seed yields the same pixels on every platform.
inline SyntheticFrame frame_from_seed(std::uint32_t seed, int width, int height) {
    check_frame_dims(width, height);
    SyntheticFrame f;
    f.width = width;
    f.height = height;
    f.pixels.resize(static_cast<std::size_t>(width) * height);
    std::mt19937 gen(seed);
    for (auto& p : f.pixels) {
        p = static_cast<std::uint8_t>(gen() & 0xFFu);
    }
    return f;
}

inline SyntheticFrame uniform_frame(int width, int height, std::uint8_t value) {
    check_frame_dims(width, height);
    SyntheticFrame f;
    f.width = width;
    f.height = height;
    f.pixels.assign(static_cast<std::size_t>(width) * height, value);
    return f;
}

// Alternating two-value pattern, (x+y) parity.
inline SyntheticFrame checkerboard_frame(int width, int height,
                                         std::uint8_t a, std::uint8_t b) {
    check_frame_dims(width, height);
    SyntheticFrame f;
    f.width = width;
    f.height = height;
    f.pixels.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            f.pixels[static_cast<std::size_t>(y) * width + x] = ((x + y) % 2 == 0) ? a : b;
        }
    }
    return f;
}

inline SyntheticFrame subframe(const SyntheticFrame& src, int x, int y,
                               int width, int height) {
    check_frame_dims(width, height);
    if (x < 0 || y < 0 || x + width > src.width || y + height > src.height) {
        throw ValidationError("subframe region out of bounds");
    }
    SyntheticFrame f;
    f.width = width;
    f.height = height;
    f.pixels.resize(static_cast<std::size_t>(width) * height);
    for (int row = 0; row < height; ++row) {
        const auto* src_row = src.pixels.data() +
                              static_cast<std::size_t>(y + row) * src.width + x;
        std::copy(src_row, src_row + width,
                  f.pixels.begin() + static_cast<std::size_t>(row) * width);
    }
    return f;
}

}  // namespace movidx
