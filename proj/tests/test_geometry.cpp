#include <doctest.h>

#include "egohoi/geometry.hpp"
#include "egohoi/rng.hpp"
#include "support/reference_metrics.hpp"
#include "support/generators.hpp"

using namespace egohoi;

TEST_CASE("iou identity, disjoint and derived overlap") {
    const BBox a{0, 0, 10, 10};
    CHECK(iou(a, a) == 1.0);

    CHECK(iou(BBox{0, 0, 1, 1}, BBox{5, 5, 6, 6}) == 0.0);

    // 2x2 vs 2x2 offset by 1: intersection 1, union 7. Checked against the
    // integer-grid rasterization oracle.
    const BBox b{0, 0, 2, 2};
    const BBox c{1, 1, 3, 3};
    const double expected = testref::grid_iou(b, c);
    CHECK(expected == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(iou(b, c) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("iou degenerate zero-area boxes") {
    const BBox point{3, 3, 3, 3};
    CHECK(iou(point, point) == 0.0);
    CHECK(iou(point, BBox{0, 0, 10, 10}) == 0.0);
    const BBox line{0, 0, 10, 0};
    CHECK(iou(line, line) == 0.0);
}

TEST_CASE("iou properties on random boxes") {
    DetRng rng(101);
    for (int i = 0; i < 500; ++i) {
        const BBox a = testgen::random_box(rng);
        const BBox b = testgen::random_box(rng);

        const double v = iou(a, b);
        CHECK(v == iou(b, a));  // symmetric
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (a.area() > 0.0 && b.area() > 0.0) {
            const double bound = std::min(a.area(), b.area()) / std::max(a.area(), b.area());
            CHECK(v <= bound + 1e-12);
        }

        // Translation invariance (power-of-two offsets keep arithmetic exact).
        const double dx = 32.0, dy = 16.0;
        const BBox at{a.x_min + dx, a.y_min + dy, a.x_max + dx, a.y_max + dy};
        const BBox bt{b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
        CHECK(iou(at, bt) == doctest::Approx(v).epsilon(1e-12));

        if (a.area() > 0.0) CHECK(iou(a, a) == 1.0);

        CHECK(iou(a, b) == testref::ref_iou(a, b));
    }
}

TEST_CASE("top_hands ordering and ties") {
    CHECK(top_hands({}).empty());

    const Detection h1 = Detection::hand(BBox{0, 0, 10, 10}, 0.9);
    const Detection h2 = Detection::hand(BBox{20, 0, 30, 10}, 0.4);
    const Detection h3 = Detection::hand(BBox{40, 0, 50, 10}, 0.8);
    const Detection obj = Detection::object(BBox{0, 0, 5, 5}, 3, 0.99);
    const std::vector<Detection> dets{h2, obj, h1, h3};

    const auto two = top_hands(dets, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == h1);
    CHECK(two[1] == h3);

    // Confidence tie: smaller x_min wins.
    const Detection t1 = Detection::hand(BBox{50, 0, 60, 10}, 0.7);
    const Detection t2 = Detection::hand(BBox{10, 0, 20, 10}, 0.7);
    const auto one = top_hands(std::vector<Detection>{t1, t2}, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == t2);
}

TEST_CASE("top_hands output is a hand-only subsequence with non-increasing confidence") {
    DetRng rng(77);
    for (int i = 0; i < 200; ++i) {
        std::vector<Detection> dets;
        const std::int64_t n = rng.uniform_int(0, 10);
        for (std::int64_t d = 0; d < n; ++d) {
            const BBox box = testgen::random_grid_box(rng);
            if (rng.chance(0.5))
                dets.push_back(Detection::hand(box, testgen::random_confidence(rng)));
            else
                dets.push_back(Detection::object(box, 1, testgen::random_confidence(rng)));
        }
        const int k = static_cast<int>(rng.uniform_int(1, 4));
        const auto out = top_hands(dets, k);
        CHECK(out.size() <= static_cast<std::size_t>(k));
        for (std::size_t j = 0; j < out.size(); ++j) {
            CHECK(out[j].kind == Kind::Hand);
            if (j > 0) CHECK(out[j - 1].confidence >= out[j].confidence);
            CHECK(std::count(dets.begin(), dets.end(), out[j]) > 0);
        }
    }
}

TEST_CASE("hand_side rule and boundary") {
    const ImageGeometry geom{640, 480};
    CHECK(hand_side(BBox{0, 0, 200, 100}, geom) == Side::Left);
    CHECK(hand_side(BBox{400, 0, 600, 100}, geom) == Side::Right);
    // Centroid exactly at width/2 counts as Right.
    CHECK(hand_side(BBox{300, 0, 340, 100}, geom) == Side::Right);
}

TEST_CASE("hand_side is scale invariant") {
    DetRng rng(5);
    for (int i = 0; i < 200; ++i) {
        const BBox b = testgen::random_box(rng, 600.0);
        const ImageGeometry geom{640, 480};
        const Side s = hand_side(b, geom);
        const double k = 4.0;  // exact under doubling/halving
        const BBox scaled{b.x_min * k, b.y_min * k, b.x_max * k, b.y_max * k};
        CHECK(hand_side(scaled, ImageGeometry{640 * 4, 480 * 4}) == s);
    }
}

TEST_CASE("bbox validity") {
    CHECK(BBox{0, 0, 1, 1}.valid());
    CHECK(BBox{2, 2, 2, 2}.valid());  // zero-area is legal
    CHECK_FALSE(BBox{3, 0, 1, 1}.valid());
    CHECK_FALSE(BBox{-1, 0, 1, 1}.valid());
    const double nan = std::nan("");
    CHECK_FALSE(BBox{0, 0, nan, 1}.valid());
}
