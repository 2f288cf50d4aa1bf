#include <doctest.h>

#include <cstring>

#include "egohoi/box_kernels.hpp"
#include "egohoi/rng.hpp"
#include "support/generators.hpp"

using namespace egohoi;

namespace {

BoxSoA random_soa(DetRng& rng, std::size_t n) {
    BoxSoA soa;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.chance(0.1)) {
            // Degenerate zero-area entries are legal kernel inputs.
            const double x = rng.uniform(0.0, 50.0);
            const double y = rng.uniform(0.0, 50.0);
            soa.push_back(BBox{x, y, x, y});
        } else {
            soa.push_back(testgen::random_box(rng));
        }
    }
    return soa;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("kernel name reports the dispatched variant") {
    const std::string name = iou_kernel_name();
#if defined(__x86_64__) || defined(_M_X64)
    CHECK((name == "avx2" || name == "scalar"));
    if (cpu_has_avx2()) CHECK(name == "avx2");
#elif defined(__aarch64__)
    CHECK(name == "neon");
#else
    CHECK(name == "scalar");
#endif
}

TEST_CASE("scalar kernel equals pairwise iou") {
    DetRng rng(11);
    for (int round = 0; round < 100; ++round) {
        const BBox q = testgen::random_box(rng);
        const BoxSoA soa = random_soa(rng, static_cast<std::size_t>(rng.uniform_int(0, 20)));
        std::vector<double> out(soa.size());
        iou_one_vs_many_scalar(q, soa, out);
        for (std::size_t i = 0; i < soa.size(); ++i) CHECK(out[i] == iou(q, soa.at(i)));
    }
}

TEST_CASE("dispatched kernel is bitwise-identical to the scalar reference") {
    DetRng rng(12);
    for (int round = 0; round < 200; ++round) {
        const BBox q = rng.chance(0.1) ? BBox{5, 5, 5, 5} : testgen::random_box(rng);
        const BoxSoA soa = random_soa(rng, static_cast<std::size_t>(rng.uniform_int(0, 33)));
        std::vector<double> fast(soa.size());
        std::vector<double> ref(soa.size());
        iou_one_vs_many(q, soa, fast);
        iou_one_vs_many_scalar(q, soa, ref);
        CHECK(bitwise_equal(fast, ref));
    }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernel is bitwise-identical to the scalar reference") {
    if (!cpu_has_avx2()) return;
    DetRng rng(13);
    for (int round = 0; round < 200; ++round) {
        const BBox q = testgen::random_box(rng);
        // Sizes straddling the 4-lane width exercise both the vector body
        // and the scalar tail.
        const BoxSoA soa = random_soa(rng, static_cast<std::size_t>(rng.uniform_int(0, 11)));
        std::vector<double> fast(soa.size());
        std::vector<double> ref(soa.size());
        iou_one_vs_many_avx2(q, soa, fast);
        iou_one_vs_many_scalar(q, soa, ref);
        CHECK(bitwise_equal(fast, ref));
    }
}
#endif

TEST_CASE("kernel handles zero-union lanes") {
    BoxSoA soa;
    soa.push_back(BBox{1, 1, 1, 1});
    soa.push_back(BBox{0, 0, 2, 2});
    soa.push_back(BBox{7, 7, 7, 7});
    soa.push_back(BBox{0, 0, 1, 1});
    soa.push_back(BBox{4, 4, 4, 4});
    const BBox degenerate{1, 1, 1, 1};
    std::vector<double> out(soa.size());
    iou_one_vs_many(degenerate, soa, out);
    for (const double v : out) CHECK(v == 0.0);
}
