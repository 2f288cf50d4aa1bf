#include "egohoi/cascade.hpp"

#include <chrono>

#include "egohoi/error.hpp"

namespace egohoi {

namespace {

using Clock = std::chrono::steady_clock;

double us_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

}  // namespace

TriggerWindow::TriggerWindow(int window_frames) : window_(window_frames) {
    if (window_frames < 1) throw ConfigError("TriggerWindow requires window_frames >= 1");
}

TriggerDecision TriggerWindow::push(const ContactPrediction& p) {
    if (last_frame_ && p.frame_index <= *last_frame_)
        throw StreamOrderError("non-monotone contact prediction stream: frame " +
                               std::to_string(p.frame_index) + " after frame " +
                               std::to_string(*last_frame_));
    last_frame_ = p.frame_index;
    if (p.label == ContactLabel::Contact) positives_.push_back(p);
    while (!positives_.empty() && p.frame_index - positives_.front().frame_index > window_)
        positives_.pop_front();
    return positives_.empty() ? TriggerDecision::Skip : TriggerDecision::InvokeOD;
}

std::optional<ContactPrediction> TriggerWindow::latest_positive() const {
    if (positives_.empty()) return std::nullopt;
    return positives_.back();
}

InteractionEvent fuse(const ContactPrediction& ar, std::vector<HandInstance> hands,
                      const std::optional<ActiveObjectResult>& association) {
    if (ar.label != ContactLabel::Contact)
        throw ContractViolation("fuse called with a background prediction; OD must only run on "
                                "contact-triggered frames");
    InteractionEvent event;
    event.frame_index = ar.frame_index;
    event.hands = std::move(hands);
    if (association) {
        event.contact_state = ContactState::Contact;
        event.active_object = association->object;
        event.matched_hand = association->hand_index;
        event.source = EventSource::Fused;
    } else {
        event.contact_state = ContactState::NoContact;
        event.source = EventSource::OdSuppressed;
    }
    return event;
}

CascadeRunner::CascadeRunner(const VideoGroundTruth& video, Recognizer* recognizer,
                             Detector* detector, CascadeConfig cfg)
    : video_(video),
      recognizer_(recognizer),
      detector_(detector),
      cfg_(cfg),
      window_(cfg.window_frames) {
    if (!detector_) throw ConfigError("CascadeRunner requires a detector");
    if (cfg_.trigger == TriggerMode::Window && !recognizer_)
        throw ConfigError("window triggering requires a recognizer");
}

CascadeRunner::FrameResult CascadeRunner::process(const Frame& frame) {
    FrameResult result;

    if (recognizer_) {
        const auto t0 = Clock::now();
        result.prediction = recognizer_->feed(frame);
        result.timing.recognizer_us = us_since(t0);
    }

    TriggerDecision decision = TriggerDecision::Skip;
    std::optional<ContactPrediction> trigger_pred;
    if (cfg_.trigger == TriggerMode::Oracle) {
        if (video_.has_contact_state(frame.frame_index)) {
            decision = TriggerDecision::InvokeOD;
            trigger_pred = ContactPrediction{frame.frame_index, 1.0, ContactLabel::Contact};
        }
    } else {
        decision = window_.push(*result.prediction);
        if (decision == TriggerDecision::InvokeOD) {
            if (result.prediction->label == ContactLabel::Contact) {
                trigger_pred = *result.prediction;
            } else {
                // Triggered by a positive earlier in the window: the contact
                // state extends to this frame, the confidence carries over.
                trigger_pred = ContactPrediction{frame.frame_index,
                                                 window_.latest_positive()->confidence,
                                                 ContactLabel::Contact};
            }
        }
    }

    if (decision == TriggerDecision::InvokeOD) {
        result.timing.od_invoked = true;
        const auto t0 = Clock::now();
        const std::vector<Detection> detections = detector_->detect(frame);
        result.timing.detector_us = us_since(t0);

        const auto t1 = Clock::now();
        const std::vector<Detection> hand_dets =
            top_hands(detections, cfg_.association.max_hands);
        const std::vector<HandInstance> hands = assign_sides(hand_dets, video_.info.geometry);
        std::vector<Detection> objects;
        objects.reserve(detections.size());
        for (const Detection& d : detections)
            if (d.kind == Kind::Object) objects.push_back(d);
        const auto association = select_active_object(hands, objects, cfg_.association);
        result.timing.association_us = us_since(t1);

        result.event = fuse(*trigger_pred, hands, association);
    }
    return result;
}

RunResult run_offline(const VideoGroundTruth& video, Recognizer* recognizer, Detector& detector,
                      const CascadeConfig& cfg) {
    CascadeRunner runner(video, recognizer, &detector, cfg);
    RunResult result;
    const std::int64_t base_calls = detector.calls();
    for (std::int64_t f = 0; f < video.info.n_frames; ++f) {
        const Frame frame{f, static_cast<double>(f) / video.info.fps, {}};
        CascadeRunner::FrameResult fr;
        try {
            fr = runner.process(frame);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw BackendError(std::string("backend failure in video ") + video.info.video_id +
                                   ": " + e.what(),
                               f);
        }
        if (fr.prediction) result.predictions.push_back(*fr.prediction);
        if (fr.event) result.events.push_back(*fr.event);
        ++result.timing.frames;
        if (fr.timing.od_invoked) ++result.timing.od_invocations;
        result.timing.recognizer_us_total += fr.timing.recognizer_us;
        result.timing.detector_us_total += fr.timing.detector_us;
        result.timing.association_us_total += fr.timing.association_us;
    }
    result.detector_calls = detector.calls() - base_calls;
    return result;
}

}  // namespace egohoi
