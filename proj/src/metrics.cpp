#include "egohoi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "egohoi/box_kernels.hpp"
#include "egohoi/error.hpp"

namespace egohoi {

double pr_ap(std::span<const ScoredOutcome> records, std::size_t n_ground_truth) {
    if (n_ground_truth == 0) return records.empty() ? 1.0 : 0.0;
    if (records.empty()) return 0.0;

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].confidence > records[b].confidence;
    });

    const std::size_t n = order.size();
    std::vector<double> precision(n);
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (records[order[k]].true_positive) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    }

    // Monotone envelope: env[k] = max precision at rank >= k.
    std::vector<double> envelope(n);
    double running = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        running = std::max(running, precision[k]);
        envelope[k] = running;
    }

    double envelope_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (records[order[k]].true_positive) envelope_sum += envelope[k];
    }
    return envelope_sum / static_cast<double>(n_ground_truth);
}

std::vector<MatchRecord> point_match(std::span<const PointPrediction> predictions,
                                     std::span<const std::int64_t> gt_frames,
                                     std::int64_t time_threshold) {
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].confidence > predictions[b].confidence;
    });

    // Unmatched GT keyed by frame; equal frames keep insertion (= index) order.
    std::multimap<std::int64_t, std::size_t> unmatched;
    for (std::size_t g = 0; g < gt_frames.size(); ++g) unmatched.emplace(gt_frames[g], g);

    std::vector<MatchRecord> out;
    out.reserve(predictions.size());
    for (std::size_t p : order) {
        const std::int64_t f = predictions[p].frame_index;
        std::optional<std::multimap<std::int64_t, std::size_t>::iterator> chosen;
        if (!unmatched.empty()) {
            auto after = unmatched.lower_bound(f);
            // Candidates: first GT at >= f and last GT at < f. On equal
            // distance the earlier frame (the "before" candidate) wins.
            if (after != unmatched.begin()) {
                auto before = std::prev(after);
                if (after == unmatched.end() || (f - before->first) <= (after->first - f)) {
                    // Duplicate GT frames keep insertion order in the
                    // multimap; take the first (lowest original index).
                    chosen = unmatched.lower_bound(before->first);
                } else {
                    chosen = after;
                }
            } else if (after != unmatched.end()) {
                chosen = after;
            }
        }
        if (chosen && std::llabs((*chosen)->first - f) <= time_threshold) {
            out.push_back(MatchRecord{p, MatchOutcome::TruePositive, (*chosen)->second});
            unmatched.erase(*chosen);
        } else {
            out.push_back(MatchRecord{p, MatchOutcome::FalsePositive, std::nullopt});
        }
    }
    return out;
}

namespace {

std::vector<ScoredOutcome> to_scored(std::span<const PointPrediction> predictions,
                                     std::span<const MatchRecord> records) {
    std::vector<ScoredOutcome> scored;
    scored.reserve(records.size());
    for (const MatchRecord& r : records) {
        scored.push_back(ScoredOutcome{predictions[r.prediction].confidence,
                                       r.outcome == MatchOutcome::TruePositive});
    }
    return scored;
}

}  // namespace

std::vector<std::int64_t> default_point_ap_thresholds(double fps) {
    std::vector<std::int64_t> out;
    for (int s = 1; s <= 10; ++s)
        out.push_back(static_cast<std::int64_t>(std::llround(s * fps)));
    return out;
}

PapReport p_ap(std::span<const PointPrediction> predictions,
               std::span<const std::int64_t> gt_frames,
               std::span<const std::int64_t> thresholds_frames) {
    PapReport report;
    double sum = 0.0;
    for (std::int64_t thr : thresholds_frames) {
        const auto records = point_match(predictions, gt_frames, thr);
        const double ap = pr_ap(to_scored(predictions, records), gt_frames.size());
        report.per_threshold.push_back(PapEntry{thr, ap});
        sum += ap;
    }
    report.mean = thresholds_frames.empty() ? 0.0 : sum / static_cast<double>(thresholds_frames.size());
    return report;
}

PapReport p_ap(std::span<const PointPrediction> predictions,
               std::span<const std::int64_t> gt_frames, double fps) {
    const auto thresholds = default_point_ap_thresholds(fps);
    return p_ap(predictions, gt_frames, thresholds);
}

PapReport p_ap_pooled(std::span<const PapVideo> videos,
                      std::span<const std::int64_t> thresholds_frames) {
    PapReport report;
    double sum = 0.0;
    std::size_t n_gt = 0;
    for (const PapVideo& v : videos) n_gt += v.gt_frames.size();
    for (std::int64_t thr : thresholds_frames) {
        std::vector<ScoredOutcome> pooled;
        for (const PapVideo& v : videos) {
            const auto records = point_match(v.predictions, v.gt_frames, thr);
            const auto scored = to_scored(v.predictions, records);
            pooled.insert(pooled.end(), scored.begin(), scored.end());
        }
        const double ap = pr_ap(pooled, n_gt);
        report.per_threshold.push_back(PapEntry{thr, ap});
        sum += ap;
    }
    report.mean = thresholds_frames.empty() ? 0.0 : sum / static_cast<double>(thresholds_frames.size());
    return report;
}

namespace {

struct PredHandRecord {
    double confidence = 0.0;
    bool box_matched = false;
    bool state_ok = false;
    bool side_ok = false;
    bool object_ok = false;
};

// Derived per-hand prediction attributes for one event hand.
struct PredHandView {
    const InteractionEvent* event = nullptr;
    std::size_t hand = 0;

    const BBox& box() const { return event->hands[hand].detection.bbox; }
    double confidence() const { return event->hands[hand].detection.confidence; }
    Side side() const { return event->hands[hand].side; }
    ContactState state() const {
        const bool contacting = event->contact_state == ContactState::Contact &&
                                event->matched_hand && *event->matched_hand == hand;
        return contacting ? ContactState::Contact : ContactState::NoContact;
    }
    const std::optional<Detection>& object() const {
        static const std::optional<Detection> none;
        return (event->matched_hand && *event->matched_hand == hand) ? event->active_object : none;
    }
};

bool object_requirement_met(const PredHandView& pred, const GtHand& gt_hand,
                            const HoiFrameGT& frame_gt, double box_iou_match) {
    if (gt_hand.state != ContactState::Contact) return true;
    bool any_linked = false;
    for (const GtActiveObject& gt_obj : frame_gt.active_objects) {
        if (gt_obj.hand_side != gt_hand.side) continue;
        any_linked = true;
        if (!pred.object()) continue;
        if (pred.object()->class_id != gt_obj.class_id) continue;
        if (iou(pred.object()->bbox, gt_obj.box) >= box_iou_match) return true;
    }
    return !any_linked;  // no object annotated for this hand: nothing more to check
}

}  // namespace

HoiApReport hoi_ap(std::span<const HoiVideo> videos, double box_iou_match) {
    std::size_t n_gt_hands = 0;
    std::vector<PredHandRecord> records;

    for (const HoiVideo& video : videos) {
        std::unordered_map<std::int64_t, const HoiFrameGT*> gt_index;
        gt_index.reserve(video.gt.size());
        for (const HoiFrameGT& g : video.gt) {
            n_gt_hands += g.hands.size();
            if (!gt_index.emplace(g.frame_index, &g).second)
                throw CorpusError("hoi_ap: duplicate ground-truth record for frame " +
                                  std::to_string(g.frame_index));
        }

        // Flatten this video's predicted hands in canonical (frame, hand) order.
        std::vector<PredHandView> preds;
        for (const InteractionEvent& ev : video.events) {
            if (gt_index.find(ev.frame_index) == gt_index.end())
                throw CorpusError("hoi_ap: predictions reference frame " +
                                  std::to_string(ev.frame_index) +
                                  " absent from the ground-truth index (corpus mismatch)");
            for (std::size_t h = 0; h < ev.hands.size(); ++h)
                preds.push_back(PredHandView{&ev, h});
        }

        std::vector<std::size_t> order(preds.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return preds[a].confidence() > preds[b].confidence();
        });

        // One box-based greedy matching shared by all four metrics.
        std::unordered_map<const HoiFrameGT*, std::vector<bool>> gt_taken;
        std::vector<double> iou_buf;
        std::unordered_map<const HoiFrameGT*, BoxSoA> gt_boxes;
        for (std::size_t idx : order) {
            const PredHandView& pred = preds[idx];
            const HoiFrameGT& frame_gt = *gt_index.at(pred.event->frame_index);
            auto& taken = gt_taken[&frame_gt];
            if (taken.empty()) taken.assign(frame_gt.hands.size(), false);
            auto soa_it = gt_boxes.find(&frame_gt);
            if (soa_it == gt_boxes.end()) {
                BoxSoA soa;
                soa.reserve(frame_gt.hands.size());
                for (const GtHand& gh : frame_gt.hands) soa.push_back(gh.box);
                soa_it = gt_boxes.emplace(&frame_gt, std::move(soa)).first;
            }

            iou_buf.resize(frame_gt.hands.size());
            iou_one_vs_many(pred.box(), soa_it->second, iou_buf);

            std::optional<std::size_t> best;
            for (std::size_t g = 0; g < frame_gt.hands.size(); ++g) {
                if (taken[g] || iou_buf[g] < box_iou_match) continue;
                if (!best || iou_buf[g] > iou_buf[*best]) best = g;
            }

            PredHandRecord rec;
            rec.confidence = pred.confidence();
            if (best) {
                taken[*best] = true;
                const GtHand& gt_hand = frame_gt.hands[*best];
                rec.box_matched = true;
                rec.state_ok = pred.state() == gt_hand.state;
                rec.side_ok = pred.side() == gt_hand.side;
                rec.object_ok = object_requirement_met(pred, gt_hand, frame_gt, box_iou_match);
            }
            records.push_back(rec);
        }
    }

    const auto ap_for = [&](auto&& is_tp) {
        std::vector<ScoredOutcome> scored;
        scored.reserve(records.size());
        for (const PredHandRecord& r : records)
            scored.push_back(ScoredOutcome{r.confidence, is_tp(r)});
        return pr_ap(scored, n_gt_hands);
    };

    HoiApReport report;
    report.ap_hand = ap_for([](const PredHandRecord& r) { return r.box_matched; });
    report.ap_hand_state =
        ap_for([](const PredHandRecord& r) { return r.box_matched && r.state_ok; });
    report.ap_hand_side =
        ap_for([](const PredHandRecord& r) { return r.box_matched && r.side_ok; });
    report.ap_hand_all = ap_for([](const PredHandRecord& r) {
        return r.box_matched && r.state_ok && r.side_ok && r.object_ok;
    });
    return report;
}

HoiApReport hoi_ap(std::span<const InteractionEvent> events, std::span<const HoiFrameGT> gt,
                   double box_iou_match) {
    HoiVideo video;
    video.events.assign(events.begin(), events.end());
    video.gt.assign(gt.begin(), gt.end());
    return hoi_ap(std::span<const HoiVideo>(&video, 1), box_iou_match);
}

std::vector<std::int64_t> downsample_indices(std::int64_t n_frames, double src_fps, double dst_fps,
                                             std::span<const std::int64_t> positives) {
    if (!(dst_fps > 0.0) || dst_fps > src_fps)
        throw ConfigError("downsample_indices requires 0 < dst_fps <= src_fps");
    std::set<std::int64_t> kept;
    for (std::int64_t k = 0;; ++k) {
        const auto f = static_cast<std::int64_t>(
            std::floor((static_cast<double>(k) * src_fps) / dst_fps));
        if (f >= n_frames) break;
        kept.insert(f);
    }
    for (std::int64_t p : positives) {
        if (p < 0 || p >= n_frames)
            throw CorpusError("downsample_indices: positive frame " + std::to_string(p) +
                              " outside [0, " + std::to_string(n_frames) + ")");
        kept.insert(p);
    }
    return {kept.begin(), kept.end()};
}

}  // namespace egohoi
