#include "egohoi/geometry.hpp"

#include <stdexcept>

namespace egohoi {

const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }
const char* to_string(Kind k) { return k == Kind::Hand ? "hand" : "object"; }

Side side_from_string(const std::string& s) {
    if (s == "left") return Side::Left;
    if (s == "right") return Side::Right;
    throw std::invalid_argument("unknown side: " + s);
}

Kind kind_from_string(const std::string& s) {
    if (s == "hand") return Kind::Hand;
    if (s == "object") return Kind::Object;
    throw std::invalid_argument("unknown detection kind: " + s);
}

double iou(const BBox& a, const BBox& b) {
    const double iw = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double ih = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

Side hand_side(const BBox& bbox, const ImageGeometry& geom) {
    return bbox.centroid_x() < static_cast<double>(geom.width) / 2.0 ? Side::Left : Side::Right;
}

std::vector<Detection> top_hands(std::span<const Detection> detections, int k) {
    std::vector<Detection> hands;
    for (const Detection& d : detections) {
        if (d.kind == Kind::Hand) hands.push_back(d);
    }
    std::sort(hands.begin(), hands.end(), [](const Detection& a, const Detection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.bbox.x_min != b.bbox.x_min) return a.bbox.x_min < b.bbox.x_min;
        return a.bbox.y_min < b.bbox.y_min;
    });
    if (k >= 0 && hands.size() > static_cast<std::size_t>(k)) hands.resize(static_cast<std::size_t>(k));
    return hands;
}

std::vector<HandInstance> assign_sides(std::span<const Detection> hands, const ImageGeometry& geom) {
    std::vector<HandInstance> out;
    out.reserve(hands.size());
    for (const Detection& d : hands) out.push_back(HandInstance{d, hand_side(d.bbox, geom)});
    return out;
}

}  // namespace egohoi
