#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace egohoi {

enum class Side { Left, Right };
enum class Kind { Hand, Object };

const char* to_string(Side s);
const char* to_string(Kind k);
Side side_from_string(const std::string& s);
Kind kind_from_string(const std::string& s);

// Axis-aligned box in continuous image coordinates, origin top-left.
// Area uses the continuous convention (no +1 pixel): width * height.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return std::max(0.0, x_max - x_min) * std::max(0.0, y_max - y_min); }
    double centroid_x() const { return (x_min + x_max) / 2.0; }

    bool valid() const {
        return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
               std::isfinite(y_max) && x_min >= 0.0 && y_min >= 0.0 && x_min <= x_max &&
               y_min <= y_max;
    }

    bool operator==(const BBox&) const = default;
};

// Reserved class id for hand detections; object taxonomy ids start at 1.
inline constexpr int kHandClassId = 0;

struct Detection {
    BBox bbox;
    Kind kind = Kind::Object;
    int class_id = 0;
    double confidence = 0.0;

    bool operator==(const Detection&) const = default;

    static Detection hand(const BBox& b, double confidence) {
        return Detection{b, Kind::Hand, kHandClassId, confidence};
    }
    static Detection object(const BBox& b, int class_id, double confidence) {
        return Detection{b, Kind::Object, class_id, confidence};
    }
};

struct ImageGeometry {
    int width = 0;
    int height = 0;
    bool operator==(const ImageGeometry&) const = default;
};

struct HandInstance {
    Detection detection;  // kind == Hand
    Side side = Side::Left;
    bool operator==(const HandInstance&) const = default;
};

// Intersection over union. Degenerate zero-area boxes are legal inputs and
// yield 0 against everything, including themselves (zero-union rule).
double iou(const BBox& a, const BBox& b);

// Left/right from the box centroid relative to the image's horizontal
// center; centroid exactly at width/2 counts as Right.
Side hand_side(const BBox& bbox, const ImageGeometry& geom);

// Up to k hand detections ordered by confidence descending; ties broken by
// smaller x_min, then smaller y_min. Non-hand detections are ignored.
std::vector<Detection> top_hands(std::span<const Detection> detections, int k = 2);

// top_hands output with sides assigned.
std::vector<HandInstance> assign_sides(std::span<const Detection> hands, const ImageGeometry& geom);

}  // namespace egohoi
