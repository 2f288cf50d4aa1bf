// NEON (aarch64) variant of the batched IoU kernel. Same contract as the
// AVX2 variant: bitwise-identical to the scalar reference.

#include "egohoi/box_kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cassert>

namespace egohoi {

void iou_one_vs_many_neon(const BBox& query, const BoxSoA& boxes, std::span<double> out) {
    assert(out.size() >= boxes.size());
    const std::size_t n = boxes.size();
    const double q_area_s = (query.x_max - query.x_min) * (query.y_max - query.y_min);

    const float64x2_t qx1 = vdupq_n_f64(query.x_min);
    const float64x2_t qy1 = vdupq_n_f64(query.y_min);
    const float64x2_t qx2 = vdupq_n_f64(query.x_max);
    const float64x2_t qy2 = vdupq_n_f64(query.y_max);
    const float64x2_t q_area = vdupq_n_f64(q_area_s);
    const float64x2_t zero = vdupq_n_f64(0.0);

    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t bx1 = vld1q_f64(&boxes.x_min[i]);
        const float64x2_t by1 = vld1q_f64(&boxes.y_min[i]);
        const float64x2_t bx2 = vld1q_f64(&boxes.x_max[i]);
        const float64x2_t by2 = vld1q_f64(&boxes.y_max[i]);

        const float64x2_t iw =
            vmaxq_f64(zero, vsubq_f64(vminq_f64(qx2, bx2), vmaxq_f64(qx1, bx1)));
        const float64x2_t ih =
            vmaxq_f64(zero, vsubq_f64(vminq_f64(qy2, by2), vmaxq_f64(qy1, by1)));
        const float64x2_t inter = vmulq_f64(iw, ih);
        const float64x2_t area_b = vmulq_f64(vsubq_f64(bx2, bx1), vsubq_f64(by2, by1));
        const float64x2_t uni = vsubq_f64(vaddq_f64(q_area, area_b), inter);

        const float64x2_t div = vdivq_f64(inter, uni);
        const uint64x2_t gt = vcgtq_f64(uni, zero);
        const float64x2_t r =
            vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(div), gt));
        vst1q_f64(&out[i], r);
    }

    for (; i < n; ++i) {
        const double iw =
            std::max(0.0, std::min(query.x_max, boxes.x_max[i]) - std::max(query.x_min, boxes.x_min[i]));
        const double ih =
            std::max(0.0, std::min(query.y_max, boxes.y_max[i]) - std::max(query.y_min, boxes.y_min[i]));
        const double inter = iw * ih;
        const double area_b = (boxes.x_max[i] - boxes.x_min[i]) * (boxes.y_max[i] - boxes.y_min[i]);
        const double uni = (q_area_s + area_b) - inter;
        out[i] = uni > 0.0 ? inter / uni : 0.0;
    }
}

}  // namespace egohoi

#endif  // __aarch64__
