#include "support/reference_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>

#include "egohoi/error.hpp"

namespace egohoi::testref {

double ref_iou(const BBox& a, const BBox& b) {
    const double ix1 = std::max(a.x_min, b.x_min);
    const double iy1 = std::max(a.y_min, b.y_min);
    const double ix2 = std::min(a.x_max, b.x_max);
    const double iy2 = std::min(a.y_max, b.y_max);
    const double iw = std::max(0.0, ix2 - ix1);
    const double ih = std::max(0.0, iy2 - iy1);
    const double inter = iw * ih;
    const double area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min);
    const double area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min);
    const double uni = (area_a + area_b) - inter;
    if (!(uni > 0.0)) return 0.0;
    return inter / uni;
}

double grid_iou(const BBox& a, const BBox& b) {
    const auto lo_x = static_cast<std::int64_t>(std::floor(std::min(a.x_min, b.x_min)));
    const auto lo_y = static_cast<std::int64_t>(std::floor(std::min(a.y_min, b.y_min)));
    const auto hi_x = static_cast<std::int64_t>(std::ceil(std::max(a.x_max, b.x_max)));
    const auto hi_y = static_cast<std::int64_t>(std::ceil(std::max(a.y_max, b.y_max)));
    std::int64_t inter = 0;
    std::int64_t uni = 0;
    const auto covers = [](const BBox& box, std::int64_t x, std::int64_t y) {
        return x >= box.x_min && x + 1 <= box.x_max && y >= box.y_min && y + 1 <= box.y_max;
    };
    for (std::int64_t y = lo_y; y < hi_y; ++y) {
        for (std::int64_t x = lo_x; x < hi_x; ++x) {
            const bool in_a = covers(a, x, y);
            const bool in_b = covers(b, x, y);
            if (in_a && in_b) ++inter;
            if (in_a || in_b) ++uni;
        }
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double ref_pr_ap(const std::vector<ScoredOutcome>& records, std::size_t n_ground_truth) {
    if (n_ground_truth == 0) return records.empty() ? 1.0 : 0.0;
    if (records.empty()) return 0.0;

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return records[x].confidence > records[y].confidence;
    });

    const std::size_t n = order.size();
    std::vector<double> precision(n);
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (records[order[k]].true_positive) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    }

    double envelope_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!records[order[k]].true_positive) continue;
        double best = 0.0;
        for (std::size_t j = k; j < n; ++j) best = std::max(best, precision[j]);
        envelope_sum += best;
    }
    return envelope_sum / static_cast<double>(n_ground_truth);
}

std::vector<MatchRecord> ref_point_match(const std::vector<PointPrediction>& predictions,
                                         const std::vector<std::int64_t>& gt_frames,
                                         std::int64_t time_threshold) {
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return predictions[x].confidence > predictions[y].confidence;
    });

    std::vector<bool> taken(gt_frames.size(), false);
    std::vector<MatchRecord> out;
    for (std::size_t p : order) {
        const std::int64_t f = predictions[p].frame_index;
        // Nearest unmatched GT; ties by smaller frame, then smaller index.
        std::optional<std::size_t> best;
        for (std::size_t g = 0; g < gt_frames.size(); ++g) {
            if (taken[g]) continue;
            if (!best) {
                best = g;
                continue;
            }
            const std::int64_t d_g = std::llabs(gt_frames[g] - f);
            const std::int64_t d_b = std::llabs(gt_frames[*best] - f);
            if (d_g < d_b || (d_g == d_b && gt_frames[g] < gt_frames[*best])) best = g;
        }
        if (best && std::llabs(gt_frames[*best] - f) <= time_threshold) {
            taken[*best] = true;
            out.push_back(MatchRecord{p, MatchOutcome::TruePositive, *best});
        } else {
            out.push_back(MatchRecord{p, MatchOutcome::FalsePositive, std::nullopt});
        }
    }
    return out;
}

PapReport ref_p_ap(const std::vector<PointPrediction>& predictions,
                   const std::vector<std::int64_t>& gt_frames,
                   const std::vector<std::int64_t>& thresholds) {
    PapReport report;
    double sum = 0.0;
    for (const std::int64_t thr : thresholds) {
        const auto records = ref_point_match(predictions, gt_frames, thr);
        std::vector<ScoredOutcome> scored;
        for (const MatchRecord& r : records)
            scored.push_back(ScoredOutcome{predictions[r.prediction].confidence,
                                           r.outcome == MatchOutcome::TruePositive});
        const double ap = ref_pr_ap(scored, gt_frames.size());
        report.per_threshold.push_back(PapEntry{thr, ap});
        sum += ap;
    }
    report.mean = thresholds.empty() ? 0.0 : sum / static_cast<double>(thresholds.size());
    return report;
}

namespace {

struct RefPredHand {
    double confidence;
    BBox box;
    Side side;
    ContactState state;
    bool has_object;
    BBox object_box;
    int object_class;
    const HoiFrameGT* frame_gt;
    bool matched = false;
    std::size_t gt_index = 0;
};

}  // namespace

HoiApReport ref_hoi_ap(const std::vector<HoiVideo>& videos, double box_iou_match) {
    std::size_t n_gt = 0;
    std::vector<RefPredHand> preds;

    for (const HoiVideo& video : videos) {
        const std::size_t first = preds.size();
        for (const HoiFrameGT& g : video.gt) n_gt += g.hands.size();
        for (const InteractionEvent& ev : video.events) {
            const HoiFrameGT* frame_gt = nullptr;
            for (const HoiFrameGT& g : video.gt)
                if (g.frame_index == ev.frame_index) frame_gt = &g;
            if (!frame_gt) throw CorpusError("ref_hoi_ap: missing GT frame");
            for (std::size_t h = 0; h < ev.hands.size(); ++h) {
                RefPredHand p{};
                p.confidence = ev.hands[h].detection.confidence;
                p.box = ev.hands[h].detection.bbox;
                p.side = ev.hands[h].side;
                const bool is_match =
                    ev.matched_hand.has_value() && *ev.matched_hand == h;
                p.state = (ev.contact_state == ContactState::Contact && is_match)
                              ? ContactState::Contact
                              : ContactState::NoContact;
                p.has_object = is_match && ev.active_object.has_value();
                if (p.has_object) {
                    p.object_box = ev.active_object->bbox;
                    p.object_class = ev.active_object->class_id;
                }
                p.frame_gt = frame_gt;
                preds.push_back(p);
            }
        }

        // Greedy box matching per frame, confidence-descending within the video.
        std::vector<std::size_t> order;
        for (std::size_t i = first; i < preds.size(); ++i) order.push_back(i);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return preds[x].confidence > preds[y].confidence;
        });
        std::map<const HoiFrameGT*, std::vector<bool>> taken;
        for (std::size_t i : order) {
            RefPredHand& p = preds[i];
            auto& t = taken[p.frame_gt];
            if (t.empty()) t.assign(p.frame_gt->hands.size(), false);
            std::optional<std::size_t> best;
            double best_iou = 0.0;
            for (std::size_t g = 0; g < p.frame_gt->hands.size(); ++g) {
                if (t[g]) continue;
                const double v = ref_iou(p.box, p.frame_gt->hands[g].box);
                if (v < box_iou_match) continue;
                if (!best || v > best_iou) {
                    best = g;
                    best_iou = v;
                }
            }
            if (best) {
                t[*best] = true;
                p.matched = true;
                p.gt_index = *best;
            }
        }
    }

    const auto ap_for = [&](auto&& predicate) {
        std::vector<ScoredOutcome> scored;
        for (const RefPredHand& p : preds)
            scored.push_back(ScoredOutcome{p.confidence, p.matched && predicate(p)});
        return ref_pr_ap(scored, n_gt);
    };

    const auto state_ok = [](const RefPredHand& p) {
        return p.state == p.frame_gt->hands[p.gt_index].state;
    };
    const auto side_ok = [](const RefPredHand& p) {
        return p.side == p.frame_gt->hands[p.gt_index].side;
    };
    const auto object_ok = [&](const RefPredHand& p) {
        const GtHand& gt_hand = p.frame_gt->hands[p.gt_index];
        if (gt_hand.state != ContactState::Contact) return true;
        bool any_linked = false;
        for (const GtActiveObject& o : p.frame_gt->active_objects) {
            if (o.hand_side != gt_hand.side) continue;
            any_linked = true;
            if (p.has_object && p.object_class == o.class_id &&
                ref_iou(p.object_box, o.box) >= box_iou_match)
                return true;
        }
        return !any_linked;
    };

    HoiApReport r;
    r.ap_hand = ap_for([](const RefPredHand&) { return true; });
    r.ap_hand_state = ap_for(state_ok);
    r.ap_hand_side = ap_for(side_ok);
    r.ap_hand_all = ap_for([&](const RefPredHand& p) {
        return state_ok(p) && side_ok(p) && object_ok(p);
    });
    return r;
}

std::vector<std::int64_t> ref_downsample(std::int64_t n_frames, double src_fps, double dst_fps,
                                         const std::vector<std::int64_t>& positives) {
    std::set<std::int64_t> kept(positives.begin(), positives.end());
    for (std::int64_t k = 0;; ++k) {
        const double value = (static_cast<double>(k) * src_fps) / dst_fps;
        const auto f = static_cast<std::int64_t>(std::floor(value));
        if (f >= n_frames) break;
        kept.insert(f);
    }
    return {kept.begin(), kept.end()};
}

}  // namespace egohoi::testref
