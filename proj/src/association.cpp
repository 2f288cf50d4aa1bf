#include "egohoi/association.hpp"

#include <tuple>
#include <vector>

#include "egohoi/box_kernels.hpp"

namespace egohoi {

namespace {

// Candidate ordering beyond the IoU value. Smaller tuple wins.
auto tie_key(const Detection& obj, const HandInstance& hand) {
    return std::make_tuple(-obj.confidence, -hand.detection.confidence, obj.bbox.x_min,
                           obj.bbox.y_min, obj.bbox.x_max, obj.bbox.y_max, obj.class_id,
                           hand.detection.bbox.x_min, hand.detection.bbox.y_min);
}

}  // namespace

std::optional<ActiveObjectResult> select_active_object(std::span<const HandInstance> hands,
                                                       std::span<const Detection> objects,
                                                       const AssociationConfig& cfg) {
    const std::size_t n_hands =
        std::min(hands.size(), static_cast<std::size_t>(std::max(cfg.max_hands, 0)));
    if (n_hands == 0 || objects.empty()) return std::nullopt;

    BoxSoA obj_boxes;
    std::vector<std::size_t> obj_index;  // positions of kind==Object entries
    obj_boxes.reserve(objects.size());
    for (std::size_t j = 0; j < objects.size(); ++j) {
        if (objects[j].kind != Kind::Object) continue;
        obj_boxes.push_back(objects[j].bbox);
        obj_index.push_back(j);
    }
    if (obj_boxes.empty()) return std::nullopt;

    std::vector<double> ious(obj_boxes.size());
    std::optional<ActiveObjectResult> best;
    for (std::size_t h = 0; h < n_hands; ++h) {
        iou_one_vs_many(hands[h].detection.bbox, obj_boxes, ious);
        for (std::size_t k = 0; k < obj_boxes.size(); ++k) {
            const Detection& obj = objects[obj_index[k]];
            const double v = ious[k];
            if (best) {
                if (v < best->iou) continue;
                if (v == best->iou &&
                    tie_key(obj, hands[h]) >= tie_key(best->object, best->matched_hand))
                    continue;
            }
            best = ActiveObjectResult{obj, hands[h], h, v};
        }
    }

    if (!best || !(best->iou > cfg.iou_threshold)) return std::nullopt;
    return best;
}

}  // namespace egohoi
