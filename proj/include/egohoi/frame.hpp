#pragma once

#include <cstdint>
#include <vector>

namespace egohoi {

// One streamed frame. The payload is opaque encoded image bytes and is
// empty in annotation-only mode (a "tick").
struct Frame {
    std::int64_t frame_index = 0;
    double timestamp = 0.0;  // seconds
    std::vector<std::uint8_t> payload;

    bool operator==(const Frame&) const = default;
};

}  // namespace egohoi
