#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "egohoi/association.hpp"
#include "egohoi/backends.hpp"
#include "egohoi/dataset.hpp"
#include "egohoi/events.hpp"

namespace egohoi {

enum class TriggerDecision { InvokeOD, Skip };

// Trailing contact window over a monotone prediction stream. A pushed frame
// triggers OD when any positive prediction lies within the current frame or
// the preceding window_frames frames (current - positive <= window_frames).
class TriggerWindow {
public:
    explicit TriggerWindow(int window_frames);

    // Throws StreamOrderError when frame indices are not strictly increasing.
    TriggerDecision push(const ContactPrediction& p);

    std::optional<ContactPrediction> latest_positive() const;
    int window_frames() const { return window_; }

private:
    int window_;
    std::optional<std::int64_t> last_frame_;
    std::deque<ContactPrediction> positives_;
};

// Fusion of the recognizer and detector outputs for one OD-invoked frame:
//   contact + association      -> Contact event carrying the active object
//   contact + no association   -> NoContact event, source OdSuppressed
//   background                 -> contract violation (OD must not have run)
InteractionEvent fuse(const ContactPrediction& ar, std::vector<HandInstance> hands,
                      const std::optional<ActiveObjectResult>& association);

// Oracle: invoke OD exactly on frames annotated with a contact-state hand
// (ground-truth knowledge, the upper-bound configuration). Window: invoke on
// frames with a recognizer positive inside the trailing window.
enum class TriggerMode { Oracle, Window };

struct CascadeConfig {
    TriggerMode trigger = TriggerMode::Window;
    int window_frames = 30;
    double recognizer_threshold = 0.5;
    AssociationConfig association{};
};

struct StageTiming {
    double recognizer_us = 0.0;
    double detector_us = 0.0;
    double association_us = 0.0;
    bool od_invoked = false;
};

// Single-frame cascade step shared by the offline driver and the streaming
// model worker; owns the trigger state for one stream.
class CascadeRunner {
public:
    // `video` supplies the geometry and, in oracle mode, the contact frames.
    CascadeRunner(const VideoGroundTruth& video, Recognizer* recognizer, Detector* detector,
                  CascadeConfig cfg);

    struct FrameResult {
        std::optional<ContactPrediction> prediction;
        std::optional<InteractionEvent> event;
        StageTiming timing;
    };

    FrameResult process(const Frame& frame);

    const CascadeConfig& config() const { return cfg_; }

private:
    const VideoGroundTruth& video_;
    Recognizer* recognizer_;
    Detector* detector_;
    CascadeConfig cfg_;
    TriggerWindow window_;
};

struct TimingSummary {
    std::int64_t frames = 0;
    std::int64_t od_invocations = 0;
    double recognizer_us_total = 0.0;
    double detector_us_total = 0.0;
    double association_us_total = 0.0;

    double recognizer_us_mean() const { return frames ? recognizer_us_total / frames : 0.0; }
    double detector_us_mean() const {
        return od_invocations ? detector_us_total / od_invocations : 0.0;
    }
};

struct RunResult {
    std::vector<InteractionEvent> events;        // one per OD-invoked frame
    std::vector<ContactPrediction> predictions;  // one per frame when a recognizer ran
    TimingSummary timing;
    std::int64_t detector_calls = 0;
};

// Batch driver: replays the video as annotation-only ticks through the
// cascade. Deterministic given deterministic backends; backend failures are
// rethrown with frame context.
RunResult run_offline(const VideoGroundTruth& video, Recognizer* recognizer, Detector& detector,
                      const CascadeConfig& cfg);

}  // namespace egohoi
