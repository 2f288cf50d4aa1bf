#pragma once

// Independent O(n^2) reference implementations of the metric suite. These
// exist only to check the optimized library paths and must not share code
// with them.

#include <cstdint>
#include <vector>

#include "egohoi/metrics.hpp"

namespace egohoi::testref {

// Pairwise IoU by direct area arithmetic.
double ref_iou(const BBox& a, const BBox& b);

// Rasterization oracle for integer-coordinate boxes: counts unit grid cells.
double grid_iou(const BBox& a, const BBox& b);

// All-point AP with the envelope computed by explicit O(n^2) scans.
double ref_pr_ap(const std::vector<ScoredOutcome>& records, std::size_t n_ground_truth);

// Greedy matching with an O(n*m) nearest-unmatched scan per prediction.
std::vector<MatchRecord> ref_point_match(const std::vector<PointPrediction>& predictions,
                                         const std::vector<std::int64_t>& gt_frames,
                                         std::int64_t time_threshold);

PapReport ref_p_ap(const std::vector<PointPrediction>& predictions,
                   const std::vector<std::int64_t>& gt_frames,
                   const std::vector<std::int64_t>& thresholds);

HoiApReport ref_hoi_ap(const std::vector<HoiVideo>& videos, double box_iou_match = 0.5);

std::vector<std::int64_t> ref_downsample(std::int64_t n_frames, double src_fps, double dst_fps,
                                         const std::vector<std::int64_t>& positives);

}  // namespace egohoi::testref
