#pragma once

#include <optional>
#include <span>

#include "egohoi/geometry.hpp"

namespace egohoi {

struct AssociationConfig {
    // Emission gate: the best pair's IoU must strictly exceed this.
    double iou_threshold = 0.01;
    int max_hands = 2;
};

struct ActiveObjectResult {
    Detection object;  // kind == Object
    HandInstance matched_hand;
    std::size_t hand_index = 0;  // position of matched_hand in the input list
    double iou = 0.0;            // > cfg.iou_threshold
};

// The active object for a frame: the (object, hand) pair with the highest
// IoU over all retained hands, emitted only if that IoU strictly exceeds
// the threshold. At most one object per frame. Ties break by higher object
// confidence, then higher hand confidence, then object box (x_min, y_min,
// x_max, y_max), class id, then hand box — fully deterministic, so the
// result is invariant under permutation of either input list.
std::optional<ActiveObjectResult> select_active_object(std::span<const HandInstance> hands,
                                                       std::span<const Detection> objects,
                                                       const AssociationConfig& cfg = {});

}  // namespace egohoi
