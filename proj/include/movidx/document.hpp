#pragma once

#include <string>

namespace movidx {

// One searchable record: a flattened story unit or one detected video frame.
struct Document {
    std::string id;
    std::string text;

    friend bool operator==(const Document&, const Document&) = default;
};

}  // namespace movidx
