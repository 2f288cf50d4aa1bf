#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "egohoi/events.hpp"

namespace egohoi {

struct PointPrediction {
    std::int64_t frame_index = 0;
    double confidence = 0.0;
    int class_id = 0;
};

enum class MatchOutcome { TruePositive, FalsePositive };

struct MatchRecord {
    std::size_t prediction = 0;  // index into the prediction list
    MatchOutcome outcome = MatchOutcome::FalsePositive;
    std::optional<std::size_t> ground_truth;  // matched GT index for TPs
};

// One ranked entry of a precision/recall curve.
struct ScoredOutcome {
    double confidence = 0.0;
    bool true_positive = false;
};

// All-point-interpolated average precision (area under the monotone
// precision envelope). Ranking is confidence-descending, ties stable by
// input order. n_ground_truth == 0: 0 if any prediction exists, else 1.
double pr_ap(std::span<const ScoredOutcome> records, std::size_t n_ground_truth);

// Greedy point matching: predictions in confidence-descending order each
// take the nearest unmatched GT frame within the threshold (equidistant
// ties go to the earlier GT frame). One GT matches at most one prediction.
std::vector<MatchRecord> point_match(std::span<const PointPrediction> predictions,
                                     std::span<const std::int64_t> gt_frames,
                                     std::int64_t time_threshold);

struct PapEntry {
    std::int64_t threshold_frames = 0;
    double ap = 0.0;
};

struct PapReport {
    std::vector<PapEntry> per_threshold;
    double mean = 0.0;
};

// Default point-AP threshold set: {1..10} seconds at the stream fps.
std::vector<std::int64_t> default_point_ap_thresholds(double fps);

PapReport p_ap(std::span<const PointPrediction> predictions,
               std::span<const std::int64_t> gt_frames,
               std::span<const std::int64_t> thresholds_frames);
PapReport p_ap(std::span<const PointPrediction> predictions,
               std::span<const std::int64_t> gt_frames, double fps);

// Pooled variant: matches per video, ranks one pooled PR curve.
struct PapVideo {
    std::vector<PointPrediction> predictions;
    std::vector<std::int64_t> gt_frames;
};
PapReport p_ap_pooled(std::span<const PapVideo> videos,
                      std::span<const std::int64_t> thresholds_frames);

struct HoiApReport {
    double ap_hand = 0.0;
    double ap_hand_state = 0.0;
    double ap_hand_side = 0.0;
    double ap_hand_all = 0.0;
};

struct HoiVideo {
    std::vector<InteractionEvent> events;
    std::vector<HoiFrameGT> gt;
};

// The four-metric HOI AP suite over one or more videos. Predicted hands are
// ranked by detection confidence and matched per frame against unmatched GT
// hands at IoU >= box_iou_match (best overlap wins; ties to the lower GT
// index). The stricter metrics reuse that box matching and additionally
// require state, side, and — when the GT hand is in contact and a linked GT
// object exists — an active object matching at IoU >= box_iou_match with the
// correct class. Every event frame must have a GT record (corpus mismatch
// otherwise).
HoiApReport hoi_ap(std::span<const HoiVideo> videos, double box_iou_match = 0.5);
HoiApReport hoi_ap(std::span<const InteractionEvent> events, std::span<const HoiFrameGT> gt,
                   double box_iou_match = 0.5);

// Frame indices kept when downsampling src_fps -> dst_fps while preserving
// all positives: { floor(k*src/dst) : k >= 0 } ∩ [0, n) ∪ positives.
std::vector<std::int64_t> downsample_indices(std::int64_t n_frames, double src_fps, double dst_fps,
                                             std::span<const std::int64_t> positives);

}  // namespace egohoi
