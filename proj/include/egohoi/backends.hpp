#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <vector>

#include "egohoi/dataset.hpp"
#include "egohoi/events.hpp"
#include "egohoi/frame.hpp"

namespace egohoi {

// Contact recognizer contract: exactly one prediction per fed frame, in
// stream order. The label follows the decision threshold the backend was
// constructed with.
class Recognizer {
public:
    virtual ~Recognizer() = default;
    virtual ContactPrediction feed(const Frame& frame) = 0;
};

// Object detector contract. detect() counts calls so cascade tests can
// observe exactly when OD was invoked.
class Detector {
public:
    virtual ~Detector() = default;

    std::vector<Detection> detect(const Frame& frame) {
        ++calls_;
        return do_detect(frame);
    }

    std::int64_t calls() const { return calls_; }

private:
    virtual std::vector<Detection> do_detect(const Frame& frame) = 0;
    std::int64_t calls_ = 0;
};

// Ground-truth recognizer: Contact (confidence 1) exactly on annotated
// contact-point frames, Background (confidence 0) elsewhere.
std::unique_ptr<Recognizer> make_oracle_recognizer(const VideoGroundTruth& video);

// Deterministic noise for scripted backends. Jitters are uniform
// amplitudes; everything is seeded per (seed, frame, detection) so outputs
// are identical across runs, platforms and call orders.
struct DetectorNoise {
    double box_jitter = 0.0;         // +- pixels on each coordinate
    double confidence_jitter = 0.0;  // subtract up to this from each confidence
    double drop_prob = 0.0;
    std::uint64_t seed = 0;
};

// Replays the annotated hands and scene objects; with zero noise the output
// equals ground truth at confidence 1. Frames without an annotation record
// are an error (the script must cover the replayed video).
std::unique_ptr<Detector> make_scripted_detector(const VideoGroundTruth& video,
                                                 DetectorNoise noise = {});

// Scripted recognizer: fires one Contact prediction per annotated contact
// point, offset fire_offsets[k % size] frames early for event k; every
// miss_every-th event (1-based) is skipped entirely. Noiseless defaults
// replay the contact points exactly.
struct RecognizerNoise {
    std::vector<std::int64_t> fire_offsets = {0};
    int miss_every = 0;
    double confidence = 1.0;
};
std::unique_ptr<Recognizer> make_scripted_recognizer(const VideoGroundTruth& video,
                                                     RecognizerNoise noise = {});

// Artificial-latency wrappers for throughput experiments.
std::unique_ptr<Recognizer> with_delay(std::unique_ptr<Recognizer> inner,
                                       std::chrono::microseconds delay);
std::unique_ptr<Detector> with_delay(std::unique_ptr<Detector> inner,
                                     std::chrono::microseconds delay);

}  // namespace egohoi
