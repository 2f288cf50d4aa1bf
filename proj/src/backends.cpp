#include "egohoi/backends.hpp"

#include <algorithm>
#include <thread>

#include "egohoi/error.hpp"
#include "egohoi/rng.hpp"

namespace egohoi {

namespace {

void check_frame_range(const VideoGroundTruth& video, std::int64_t frame, const char* who) {
    if (frame < 0 || frame >= video.info.n_frames)
        throw BackendError(std::string(who) + ": frame outside the annotated range [0, " +
                               std::to_string(video.info.n_frames) + ") of video " +
                               video.info.video_id,
                           frame);
}

class OracleRecognizer final : public Recognizer {
public:
    explicit OracleRecognizer(const VideoGroundTruth& video) : video_(video) {}

    ContactPrediction feed(const Frame& frame) override {
        check_frame_range(video_, frame.frame_index, "oracle recognizer");
        if (video_.is_contact_point(frame.frame_index))
            return ContactPrediction{frame.frame_index, 1.0, ContactLabel::Contact};
        return ContactPrediction{frame.frame_index, 0.0, ContactLabel::Background};
    }

private:
    const VideoGroundTruth& video_;
};

class ScriptedRecognizer final : public Recognizer {
public:
    ScriptedRecognizer(const VideoGroundTruth& video, RecognizerNoise noise)
        : video_(video), noise_(std::move(noise)) {
        for (std::size_t k = 0; k < video.contact_points.size(); ++k) {
            if (noise_.miss_every > 0 && (k + 1) % static_cast<std::size_t>(noise_.miss_every) == 0)
                continue;
            const std::int64_t offset =
                noise_.fire_offsets.empty()
                    ? 0
                    : noise_.fire_offsets[k % noise_.fire_offsets.size()];
            const std::int64_t fire = video.contact_points[k] - offset;
            if (fire >= 0 && fire < video.info.n_frames) fire_frames_.push_back(fire);
        }
        std::sort(fire_frames_.begin(), fire_frames_.end());
    }

    ContactPrediction feed(const Frame& frame) override {
        check_frame_range(video_, frame.frame_index, "scripted recognizer");
        const bool fire = std::binary_search(fire_frames_.begin(), fire_frames_.end(),
                                             frame.frame_index);
        if (fire) return ContactPrediction{frame.frame_index, noise_.confidence, ContactLabel::Contact};
        return ContactPrediction{frame.frame_index, 0.0, ContactLabel::Background};
    }

private:
    const VideoGroundTruth& video_;
    RecognizerNoise noise_;
    std::vector<std::int64_t> fire_frames_;
};

class ScriptedDetector final : public Detector {
public:
    ScriptedDetector(const VideoGroundTruth& video, DetectorNoise noise)
        : video_(video), noise_(noise) {}

private:
    std::vector<Detection> do_detect(const Frame& frame) override {
        check_frame_range(video_, frame.frame_index, "scripted detector");
        const FrameAnnotation* ann = video_.annotation(frame.frame_index);
        if (!ann)
            throw BackendError("scripted detector: frame absent from the script for video " +
                                   video_.info.video_id,
                               frame.frame_index);

        std::vector<Detection> out;
        std::size_t index = 0;
        for (const GtHand& h : ann->gt.hands)
            emit(Detection::hand(h.box, 1.0), frame.frame_index, index++, out);
        for (const Detection& d : ann->scene_objects) emit(d, frame.frame_index, index++, out);
        return out;
    }

    void emit(Detection d, std::int64_t frame, std::size_t index, std::vector<Detection>& out) {
        if (noise_.box_jitter > 0.0 || noise_.confidence_jitter > 0.0 || noise_.drop_prob > 0.0) {
            DetRng rng(DetRng::mix(DetRng::mix(noise_.seed, static_cast<std::uint64_t>(frame) + 1),
                                   index + 1));
            if (rng.chance(noise_.drop_prob)) return;
            if (noise_.box_jitter > 0.0) {
                const double j = noise_.box_jitter;
                double x1 = std::max(0.0, d.bbox.x_min + rng.uniform(-j, j));
                double y1 = std::max(0.0, d.bbox.y_min + rng.uniform(-j, j));
                double x2 = std::max(0.0, d.bbox.x_max + rng.uniform(-j, j));
                double y2 = std::max(0.0, d.bbox.y_max + rng.uniform(-j, j));
                d.bbox = BBox{std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
            }
            if (noise_.confidence_jitter > 0.0)
                d.confidence = std::clamp(
                    d.confidence - rng.uniform(0.0, noise_.confidence_jitter), 0.0, 1.0);
        }
        out.push_back(d);
    }

    const VideoGroundTruth& video_;
    DetectorNoise noise_;
};

class DelayedRecognizer final : public Recognizer {
public:
    DelayedRecognizer(std::unique_ptr<Recognizer> inner, std::chrono::microseconds delay)
        : inner_(std::move(inner)), delay_(delay) {}

    ContactPrediction feed(const Frame& frame) override {
        std::this_thread::sleep_for(delay_);
        return inner_->feed(frame);
    }

private:
    std::unique_ptr<Recognizer> inner_;
    std::chrono::microseconds delay_;
};

class DelayedDetector final : public Detector {
public:
    DelayedDetector(std::unique_ptr<Detector> inner, std::chrono::microseconds delay)
        : inner_(std::move(inner)), delay_(delay) {}

private:
    std::vector<Detection> do_detect(const Frame& frame) override {
        std::this_thread::sleep_for(delay_);
        return inner_->detect(frame);
    }

    std::unique_ptr<Detector> inner_;
    std::chrono::microseconds delay_;
};

}  // namespace

std::unique_ptr<Recognizer> make_oracle_recognizer(const VideoGroundTruth& video) {
    return std::make_unique<OracleRecognizer>(video);
}

std::unique_ptr<Detector> make_scripted_detector(const VideoGroundTruth& video,
                                                 DetectorNoise noise) {
    return std::make_unique<ScriptedDetector>(video, noise);
}

std::unique_ptr<Recognizer> make_scripted_recognizer(const VideoGroundTruth& video,
                                                     RecognizerNoise noise) {
    return std::make_unique<ScriptedRecognizer>(video, std::move(noise));
}

std::unique_ptr<Recognizer> with_delay(std::unique_ptr<Recognizer> inner,
                                       std::chrono::microseconds delay) {
    return std::make_unique<DelayedRecognizer>(std::move(inner), delay);
}

std::unique_ptr<Detector> with_delay(std::unique_ptr<Detector> inner,
                                     std::chrono::microseconds delay) {
    return std::make_unique<DelayedDetector>(std::move(inner), delay);
}

}  // namespace egohoi
