#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "movidx/error.hpp"
#include "movidx/frame.hpp"

namespace movidx {

namespace detail {

// Reads the next header token, skipping whitespace and '#' comments.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

inline int pgm_int(std::istream& in, const char* what) {
    std::string tok = pgm_token(in);
    if (tok.empty()) throw ParseError(std::string("pgm: missing ") + what);
    for (char ch : tok) {
        if (ch < '0' || ch > '9') {
            throw ParseError(std::string("pgm: bad ") + what + " '" + tok + "'");
        }
    }
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw ParseError(std::string("pgm: bad ") + what + " '" + tok + "'");
    }
}

}  // namespace detail

// Binary PGM (P5), one byte per sample. maxval above 255 is rejected.
inline SyntheticFrame read_pgm(std::istream& in) {
    std::string magic = detail::pgm_token(in);
    if (magic != "P5") throw ParseError("pgm: expected P5 magic, got '" + magic + "'");
    int width = detail::pgm_int(in, "width");
    int height = detail::pgm_int(in, "height");
    int maxval = detail::pgm_int(in, "maxval");
    if (width < 1 || height < 1) throw ParseError("pgm: non-positive dimensions");
    if (maxval < 1 || maxval > 255) {
        throw ParseError("pgm: unsupported maxval " + std::to_string(maxval));
    }
    // The header ends with exactly one whitespace byte before the raster.
    SyntheticFrame f;
    f.width = width;
    f.height = height;
    f.pixels.resize(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) {
        throw ParseError("pgm: truncated pixel data");
    }
    return f;
}

inline SyntheticFrame read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_pgm(in);
}

inline void write_pgm(std::ostream& out, const SyntheticFrame& frame) {
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
}

inline void write_pgm(const std::string& path, const SyntheticFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_pgm(out, frame);
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace movidx
