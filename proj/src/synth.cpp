// Synthetic corpus generator. Scenes are built so that the evaluation
// invariants hold by construction:
//   - hands wander in the top band of their own image half and only meet an
//     object during their contact segments, so every non-contact (hand,
//     object) IoU is exactly 0;
//   - at most one hand is in contact per frame;
//   - each contact places the hand over its object at a controlled IoU,
//     spread across (iou_min, iou_max) so association-threshold sweeps kill
//     associations progressively;
//   - annotated hand sides always agree with the centroid rule.

#include <cmath>

#include "egohoi/dataset.hpp"
#include "egohoi/error.hpp"
#include "egohoi/rng.hpp"

namespace egohoi {

namespace {

constexpr double kHandW = 72.0;
constexpr double kHandH = 60.0;
constexpr double kObjW = 80.0;
constexpr double kObjH = 70.0;

// Quarter-pixel grid keeps the written JSON short and exactly reproducible.
double snap(double v) { return std::round(v * 4.0) / 4.0; }

// Triangle wave in [-1, 1] with period 1. Piecewise linear on purpose:
// libm transcendentals vary across platforms, IEEE add/mul/floor do not.
double tri(double t) {
    const double phase = t - std::floor(t);
    return phase < 0.5 ? 4.0 * phase - 1.0 : 3.0 - 4.0 * phase;
}

BBox make_box(double x, double y, double w, double h) { return BBox{snap(x), snap(y), snap(x + w), snap(y + h)}; }

struct SceneObject {
    BBox box;
    int class_id;
};

// Event objects sit in the bottom band (y 330..400) of each half, spaced so
// a hand overlapping one can never graze another; distractors live in their
// own band (y 260..330) that contact placements stay clear of. Right-half
// slots are shifted inward so mirrored contact hands keep a Right centroid.
SceneObject event_object_at_slot(int half, int slot, int class_id, double half_width) {
    const double base = half == 0 ? 14.0 : half_width + 34.0;
    const double x = base + slot * (kObjW + 94.0);
    return SceneObject{make_box(x, 330.0, kObjW, kObjH), class_id};
}

SceneObject distractor_object(int half, int class_id, double half_width) {
    const double x = half * half_width + 101.0;
    return SceneObject{make_box(x, 260.0, kObjW, kObjH), class_id};
}

// Hand placement overlapping `obj` with an intersection of ow x oh. Left
// hands overlap the object's bottom-right corner (extending rightward),
// right hands mirror it (extending leftward), keeping centroids on the
// correct side of the image midline.
BBox contact_hand_box(const BBox& obj, double ow, double oh, bool mirrored) {
    const double x = mirrored ? obj.x_min + ow - kHandW : obj.x_max - ow;
    return make_box(x, obj.y_max - oh, kHandW, kHandH);
}

// Intersection size achieving roughly the target IoU between the fixed-size
// hand and object boxes.
void overlap_for_iou(double target, double& ow, double& oh) {
    const double hand_area = kHandW * kHandH;
    const double obj_area = kObjW * kObjH;
    const double inter = target * (hand_area + obj_area) / (1.0 + target);
    const double min_area = std::min(kHandW, kObjW) * std::min(kHandH, kObjH);
    const double scale = std::sqrt(std::min(1.0, inter / min_area));
    ow = std::min(kHandW, kObjW) * scale;
    oh = inter / std::max(ow, 1e-9);
}

struct ContactEvent {
    std::int64_t start;
    std::int64_t length;
    int hand;  // 0 = left, 1 = right
    SceneObject object;
    BBox hand_box;
};

}  // namespace

Corpus synth_corpus(const SynthSpec& spec) {
    if (spec.videos <= 0 || spec.frames_per_video <= 0 || spec.events_per_video < 0 ||
        spec.segment_frames <= 0)
        throw ConfigError("synth_corpus: counts must be positive");
    if (!(spec.contact_iou_min > 0.0) || spec.contact_iou_max < spec.contact_iou_min ||
        spec.contact_iou_max > 0.7)
        throw ConfigError("synth_corpus: contact IoU range must satisfy 0 < min <= max <= 0.7");
    if (static_cast<std::int64_t>(spec.events_per_video) > spec.frames_per_video)
        throw ConfigError("synth_corpus: more contact events than frames");

    const double half_width = spec.width / 2.0;
    const int total_events = spec.videos * spec.events_per_video;

    Corpus corpus;
    corpus.manifest.schema_version = 1;

    for (int vi = 0; vi < spec.videos; ++vi) {
        VideoInfo info;
        info.video_id = "v" + std::to_string(vi);
        info.n_frames = spec.frames_per_video;
        info.fps = spec.fps;
        info.geometry = ImageGeometry{spec.width, spec.height};

        DetRng rng(DetRng::mix(spec.seed, static_cast<std::uint64_t>(vi) + 1));

        // Wander paths: one triangle oscillation per hand inside the top
        // band of its half.
        const double phase_l = rng.uniform(0.0, 1.0);
        const double phase_r = rng.uniform(0.0, 1.0);
        const double period = rng.uniform(40.0, 90.0);
        const auto wander = [&](int hand, std::int64_t f) {
            const double phase = hand == 0 ? phase_l : phase_r;
            const double cx = hand * half_width + (half_width - kHandW) / 2.0;
            const double x = cx + 60.0 * tri(static_cast<double>(f) / period + phase);
            const double y = 60.0 + 50.0 * tri(static_cast<double>(f) / (period * 1.7) + phase);
            return make_box(x, y, kHandW, kHandH);
        };

        // Scene objects: two event slots plus distractors per half.
        std::vector<SceneObject> scene;
        for (int half = 0; half < 2; ++half)
            for (int slot = 0; slot < 2; ++slot)
                scene.push_back(event_object_at_slot(half, slot, 1 + half * 2 + slot, half_width));
        for (int d = 0; d < spec.distractor_objects; ++d)
            scene.push_back(distractor_object(d % 2, 5 + d, half_width));

        // Contact events: alternate hands, cycle the event slots, spread the
        // target IoU across the configured range over all events.
        std::vector<ContactEvent> events;
        const std::int64_t gap =
            spec.events_per_video > 0 ? spec.frames_per_video / spec.events_per_video : 0;
        for (int e = 0; e < spec.events_per_video; ++e) {
            ContactEvent ev;
            ev.hand = e % 2;
            ev.length = std::min<std::int64_t>(spec.segment_frames, std::max<std::int64_t>(1, gap / 2));
            const std::int64_t lead = std::min<std::int64_t>(gap / 3, 20);
            ev.start = e * gap + lead;
            if (ev.start + ev.length > spec.frames_per_video)
                ev.start = spec.frames_per_video - ev.length;
            const int slot = (e / 2) % 2;
            ev.object = scene[static_cast<std::size_t>(ev.hand * 2 + slot)];
            const int global_index = vi * spec.events_per_video + e;
            const double t = total_events > 1
                                 ? static_cast<double>(global_index) / (total_events - 1)
                                 : 0.0;
            const double target = spec.contact_iou_min + t * (spec.contact_iou_max - spec.contact_iou_min);
            double ow = 0.0, oh = 0.0;
            overlap_for_iou(target, ow, oh);
            ev.hand_box = contact_hand_box(ev.object.box, ow, oh, ev.hand == 1);
            events.push_back(ev);
        }

        VideoGroundTruth video;
        video.info = info;

        for (std::int64_t f = 0; f < spec.frames_per_video; ++f) {
            const ContactEvent* active = nullptr;
            for (const ContactEvent& ev : events)
                if (f >= ev.start && f < ev.start + ev.length) active = &ev;

            FrameAnnotation ann;
            ann.gt.frame_index = f;
            for (int hand = 0; hand < 2; ++hand) {
                GtHand gh;
                const bool contacting = active && active->hand == hand;
                gh.box = contacting ? active->hand_box : wander(hand, f);
                gh.side = hand == 0 ? Side::Left : Side::Right;
                gh.state = contacting ? ContactState::Contact : ContactState::NoContact;
                ann.gt.hands.push_back(gh);
            }
            if (active) {
                GtActiveObject obj;
                obj.box = active->object.box;
                obj.class_id = active->object.class_id;
                obj.hand_side = active->hand == 0 ? Side::Left : Side::Right;
                ann.gt.active_objects.push_back(obj);
                ann.contact_point = f == active->start;
            }
            for (const SceneObject& so : scene)
                ann.scene_objects.push_back(Detection::object(so.box, so.class_id, 1.0));
            video.frames.emplace(f, std::move(ann));
        }

        for (const auto& [frame, ann] : video.frames) {
            if (ann.contact_point) video.contact_points.push_back(frame);
            for (const GtHand& h : ann.gt.hands)
                if (h.state == ContactState::Contact) {
                    video.contact_state_frames.push_back(frame);
                    break;
                }
        }

        corpus.manifest.videos.push_back(info);
        corpus.videos.push_back(std::move(video));
    }
    return corpus;
}

void synth_corpus_to_disk(const SynthSpec& spec, const std::filesystem::path& dir) {
    write_corpus(synth_corpus(spec), dir);
}

}  // namespace egohoi
