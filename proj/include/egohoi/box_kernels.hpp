#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "egohoi/geometry.hpp"

namespace egohoi {

// Structure-of-arrays box storage for the batched IoU kernels.
struct BoxSoA {
    std::vector<double> x_min;
    std::vector<double> y_min;
    std::vector<double> x_max;
    std::vector<double> y_max;

    std::size_t size() const { return x_min.size(); }
    bool empty() const { return x_min.empty(); }

    void clear();
    void reserve(std::size_t n);
    void push_back(const BBox& b);
    BBox at(std::size_t i) const;

    static BoxSoA from(std::span<const BBox> boxes);
};

// IoU of one query box against every box in `boxes`; writes boxes.size()
// values into `out`. Inputs must satisfy the BBox ordering invariants
// (x_min <= x_max, y_min <= y_max); zero-area boxes are fine.
//
// Dispatches to the widest kernel the CPU supports; every variant is
// bitwise-identical to the scalar reference (no FMA contraction, per-lane
// IEEE ops only).
void iou_one_vs_many(const BBox& query, const BoxSoA& boxes, std::span<double> out);

// Scalar reference path, always available.
void iou_one_vs_many_scalar(const BBox& query, const BoxSoA& boxes, std::span<double> out);

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2();
void iou_one_vs_many_avx2(const BBox& query, const BoxSoA& boxes, std::span<double> out);
#endif

#if defined(__aarch64__)
void iou_one_vs_many_neon(const BBox& query, const BoxSoA& boxes, std::span<double> out);
#endif

// Name of the variant selected at startup: "scalar", "avx2" or "neon".
const char* iou_kernel_name();

}  // namespace egohoi
