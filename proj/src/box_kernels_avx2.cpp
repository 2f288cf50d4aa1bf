// AVX2 variant of the batched IoU kernel. Compiled with -mavx2 in its own
// translation unit; callers reach it only through the runtime dispatcher.
// Must stay bitwise-identical to iou_one_vs_many_scalar: same operation
// order per lane, no FMA (the project builds with -ffp-contract=off).

#include "egohoi/box_kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cassert>

namespace egohoi {

void iou_one_vs_many_avx2(const BBox& query, const BoxSoA& boxes, std::span<double> out) {
    assert(out.size() >= boxes.size());
    const std::size_t n = boxes.size();
    const double q_area_s = (query.x_max - query.x_min) * (query.y_max - query.y_min);

    const __m256d qx1 = _mm256_set1_pd(query.x_min);
    const __m256d qy1 = _mm256_set1_pd(query.y_min);
    const __m256d qx2 = _mm256_set1_pd(query.x_max);
    const __m256d qy2 = _mm256_set1_pd(query.y_max);
    const __m256d q_area = _mm256_set1_pd(q_area_s);
    const __m256d zero = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d bx1 = _mm256_loadu_pd(&boxes.x_min[i]);
        const __m256d by1 = _mm256_loadu_pd(&boxes.y_min[i]);
        const __m256d bx2 = _mm256_loadu_pd(&boxes.x_max[i]);
        const __m256d by2 = _mm256_loadu_pd(&boxes.y_max[i]);

        const __m256d iw =
            _mm256_max_pd(zero, _mm256_sub_pd(_mm256_min_pd(qx2, bx2), _mm256_max_pd(qx1, bx1)));
        const __m256d ih =
            _mm256_max_pd(zero, _mm256_sub_pd(_mm256_min_pd(qy2, by2), _mm256_max_pd(qy1, by1)));
        const __m256d inter = _mm256_mul_pd(iw, ih);
        const __m256d area_b = _mm256_mul_pd(_mm256_sub_pd(bx2, bx1), _mm256_sub_pd(by2, by1));
        const __m256d uni = _mm256_sub_pd(_mm256_add_pd(q_area, area_b), inter);

        __m256d r = _mm256_div_pd(inter, uni);
        const __m256d gt = _mm256_cmp_pd(uni, zero, _CMP_GT_OQ);
        r = _mm256_and_pd(r, gt);  // zero-union lanes -> 0 (masks off the 0/0 NaN)
        _mm256_storeu_pd(&out[i], r);
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

#endif  // x86_64
