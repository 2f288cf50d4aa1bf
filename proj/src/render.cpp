#include "egohoi/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "egohoi/error.hpp"

namespace egohoi {

Canvas::Canvas(int width, int height, Rgb fill)
    : width_(std::max(1, width)), height_(std::max(1, height)) {
    pixels_.assign(static_cast<std::size_t>(width_) * height_, fill);
}

void Canvas::set_background(std::span<const std::uint8_t> ppm_payload) {
    // Accept "P6\n<w> <h>\n255\n" followed by raw RGB; anything else is ignored.
    if (ppm_payload.size() < 11) return;
    const std::string_view head(reinterpret_cast<const char*>(ppm_payload.data()),
                                std::min<std::size_t>(ppm_payload.size(), 64));
    int w = 0, h = 0, maxval = 0, consumed = 0;
    if (std::sscanf(head.data(), "P6 %d %d %d%n", &w, &h, &maxval, &consumed) != 3) return;
    if (w != width_ || h != height_ || maxval != 255) return;
    const std::size_t offset = static_cast<std::size_t>(consumed) + 1;  // single whitespace
    const std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (ppm_payload.size() < offset + need) return;
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
        pixels_[i] = Rgb{ppm_payload[offset + 3 * i], ppm_payload[offset + 3 * i + 1],
                         ppm_payload[offset + 3 * i + 2]};
    }
}

void Canvas::draw_rect(const BBox& box, Rgb color, int thickness) {
    const int x1 = std::clamp(static_cast<int>(std::lround(box.x_min)), 0, width_ - 1);
    const int y1 = std::clamp(static_cast<int>(std::lround(box.y_min)), 0, height_ - 1);
    const int x2 = std::clamp(static_cast<int>(std::lround(box.x_max)), 0, width_ - 1);
    const int y2 = std::clamp(static_cast<int>(std::lround(box.y_max)), 0, height_ - 1);
    const auto put = [&](int x, int y) {
        if (x >= 0 && x < width_ && y >= 0 && y < height_)
            pixels_[static_cast<std::size_t>(y) * width_ + x] = color;
    };
    for (int t = 0; t < thickness; ++t) {
        for (int x = x1; x <= x2; ++x) {
            put(x, y1 + t);
            put(x, y2 - t);
        }
        for (int y = y1; y <= y2; ++y) {
            put(x1 + t, y);
            put(x2 - t, y);
        }
    }
}

void Canvas::draw_border(Rgb color, int thickness) {
    draw_rect(BBox{0, 0, static_cast<double>(width_ - 1), static_cast<double>(height_ - 1)},
              color, thickness);
}

void Canvas::overlay_event(const InteractionEvent& event) {
    for (const HandInstance& h : event.hands) draw_rect(h.detection.bbox, kHandColor);
    if (event.active_object) draw_rect(event.active_object->bbox, kObjectColor);
}

void Canvas::overlay_gt(const HoiFrameGT& gt) {
    for (const GtHand& h : gt.hands) draw_rect(h.box, kHandColor, 1);
    for (const GtActiveObject& o : gt.active_objects) draw_rect(o.box, kObjectColor, 1);
}

std::vector<std::uint8_t> Canvas::encode_ppm() const {
    std::string header = "P6\n" + std::to_string(width_) + " " + std::to_string(height_) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + pixels_.size() * 3);
    for (const Rgb& p : pixels_) {
        out.push_back(p.r);
        out.push_back(p.g);
        out.push_back(p.b);
    }
    return out;
}

void Canvas::save_ppm(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const auto bytes = encode_ppm();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace egohoi
