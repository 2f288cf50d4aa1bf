#include "egohoi/box_kernels.hpp"

#include <cassert>

namespace egohoi {

void BoxSoA::clear() {
    x_min.clear();
    y_min.clear();
    x_max.clear();
    y_max.clear();
}

void BoxSoA::reserve(std::size_t n) {
    x_min.reserve(n);
    y_min.reserve(n);
    x_max.reserve(n);
    y_max.reserve(n);
}

void BoxSoA::push_back(const BBox& b) {
    x_min.push_back(b.x_min);
    y_min.push_back(b.y_min);
    x_max.push_back(b.x_max);
    y_max.push_back(b.y_max);
}

BBox BoxSoA::at(std::size_t i) const { return BBox{x_min[i], y_min[i], x_max[i], y_max[i]}; }

BoxSoA BoxSoA::from(std::span<const BBox> boxes) {
    BoxSoA soa;
    soa.reserve(boxes.size());
    for (const BBox& b : boxes) soa.push_back(b);
    return soa;
}

void iou_one_vs_many_scalar(const BBox& query, const BoxSoA& boxes, std::span<double> out) {
    assert(out.size() >= boxes.size());
    const double qx1 = query.x_min;
    const double qy1 = query.y_min;
    const double qx2 = query.x_max;
    const double qy2 = query.y_max;
    const double q_area = (qx2 - qx1) * (qy2 - qy1);
    const std::size_t n = boxes.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double iw = std::max(0.0, std::min(qx2, boxes.x_max[i]) - std::max(qx1, boxes.x_min[i]));
        const double ih = std::max(0.0, std::min(qy2, boxes.y_max[i]) - std::max(qy1, boxes.y_min[i]));
        const double inter = iw * ih;
        const double area_b = (boxes.x_max[i] - boxes.x_min[i]) * (boxes.y_max[i] - boxes.y_min[i]);
        const double uni = (q_area + area_b) - inter;
        out[i] = uni > 0.0 ? inter / uni : 0.0;
    }
}

namespace {

using KernelFn = void (*)(const BBox&, const BoxSoA&, std::span<double>);

struct KernelChoice {
    KernelFn fn;
    const char* name;
};

KernelChoice pick_kernel() {
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return {&iou_one_vs_many_avx2, "avx2"};
#elif defined(__aarch64__)
    return {&iou_one_vs_many_neon, "neon"};
#endif
    return {&iou_one_vs_many_scalar, "scalar"};
}

const KernelChoice g_kernel = pick_kernel();

}  // namespace

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
}
#endif

void iou_one_vs_many(const BBox& query, const BoxSoA& boxes, std::span<double> out) {
    g_kernel.fn(query, boxes, out);
}

const char* iou_kernel_name() { return g_kernel.name; }

}  // namespace egohoi
