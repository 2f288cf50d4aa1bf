#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "egohoi/events.hpp"
#include "egohoi/geometry.hpp"

namespace egohoi {

// Minimal RGB raster for overlay dumps (PPM, no image-codec dependency).
struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Rgb kHandColor{40, 200, 60};    // green, matching the overlay convention
inline constexpr Rgb kObjectColor{60, 90, 230};  // blue
inline constexpr Rgb kSuccessColor{40, 200, 60};
inline constexpr Rgb kFailureColor{220, 50, 50};

class Canvas {
public:
    Canvas(int width, int height, Rgb fill = Rgb{24, 24, 24});

    // Uses the payload as background when it parses as a binary PPM (P6) of
    // matching size; otherwise keeps the flat fill.
    void set_background(std::span<const std::uint8_t> ppm_payload);

    void draw_rect(const BBox& box, Rgb color, int thickness = 2);
    void draw_border(Rgb color, int thickness = 6);

    void overlay_event(const InteractionEvent& event);
    void overlay_gt(const HoiFrameGT& gt);

    std::vector<std::uint8_t> encode_ppm() const;
    void save_ppm(const std::filesystem::path& path) const;

    int width() const { return width_; }
    int height() const { return height_; }

private:
    int width_;
    int height_;
    std::vector<Rgb> pixels_;
};

}  // namespace egohoi
