#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egohoi/events.hpp"
#include "egohoi/frame.hpp"
#include "egohoi/geometry.hpp"

namespace egohoi {

struct VideoInfo {
    std::string video_id;
    std::int64_t n_frames = 0;
    double fps = 30.0;
    ImageGeometry geometry{640, 480};
    // printf-style pattern with one %d-family conversion for the frame
    // index; absent in annotation-only mode.
    std::optional<std::string> frame_pattern;

    bool operator==(const VideoInfo&) const = default;
};

struct CorpusManifest {
    int schema_version = 1;
    std::vector<VideoInfo> videos;

    bool operator==(const CorpusManifest&) const = default;
};

// Per-frame annotation record: the HOI ground truth plus the full scene
// object set (for scripted detector replay) and the contact-point flag.
struct FrameAnnotation {
    HoiFrameGT gt;
    std::vector<Detection> scene_objects;
    bool contact_point = false;

    bool operator==(const FrameAnnotation&) const = default;
};

struct VideoGroundTruth {
    VideoInfo info;
    std::map<std::int64_t, FrameAnnotation> frames;  // annotated frames only
    std::vector<std::int64_t> contact_points;        // sorted
    std::vector<std::int64_t> contact_state_frames;  // frames with a Contact-state hand, sorted

    const FrameAnnotation* annotation(std::int64_t frame) const;
    bool has_contact_state(std::int64_t frame) const;
    bool is_contact_point(std::int64_t frame) const;

    bool operator==(const VideoGroundTruth&) const = default;
};

struct Corpus {
    CorpusManifest manifest;
    std::vector<VideoGroundTruth> videos;

    const VideoGroundTruth* find(const std::string& video_id) const;
    const VideoGroundTruth& require(const std::string& video_id) const;

    bool operator==(const Corpus&) const = default;
};

// Corpus directory layout: <dir>/manifest.json plus one line-delimited
// annotation document per video under <dir>/annotations/<video_id>.jsonl.
// All invariants are checked at load; violations report file and frame.
Corpus load_corpus(const std::filesystem::path& dir);
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// Extension point for importing external annotation layouts: a converter
// parses its native format into a Corpus (write_corpus persists it and
// load_corpus re-validates). No converters ship in-tree; docs/corpus_format.md
// documents the target schema field by field.
class CorpusConverter {
public:
    virtual ~CorpusConverter() = default;
    virtual std::string format_name() const = 0;
    virtual Corpus convert(const std::filesystem::path& native_root) const = 0;
};

// FNV-1a digest of the canonical serialization of the parsed structure.
std::uint64_t corpus_checksum(const Corpus& corpus);

// Synthetic corpus generator: hands move on scripted trajectories, contact
// segments place a hand over its object at a controlled IoU, ground truth
// and scripted-backend outputs agree by construction. Byte-reproducible for
// a given (spec, seed).
struct SynthSpec {
    int videos = 3;
    std::int64_t frames_per_video = 100;
    double fps = 30.0;
    int width = 640;
    int height = 480;
    int events_per_video = 4;
    int segment_frames = 8;
    int distractor_objects = 2;
    double contact_iou_min = 0.08;
    double contact_iou_max = 0.45;
    std::uint64_t seed = 42;
};
Corpus synth_corpus(const SynthSpec& spec);
void synth_corpus_to_disk(const SynthSpec& spec, const std::filesystem::path& dir);

// Timed frame source simulating the headset stream. speed > 0 paces frames
// at fps*speed from an absolute schedule; speed == 0 emits as fast as
// consumed. Payloads come from the video's frame pattern when present,
// otherwise frames are annotation-only ticks.
class ReplaySource {
public:
    ReplaySource(const VideoGroundTruth& video, double speed,
                 std::filesystem::path corpus_root = {});

    // Next frame, or nullopt at end of stream. Blocks until the frame is
    // due when paced. Throws CorpusError on a missing frame file.
    std::optional<Frame> next();

    std::int64_t remaining() const;

private:
    const VideoGroundTruth& video_;
    double speed_;
    std::filesystem::path corpus_root_;
    std::int64_t cursor_ = 0;
    std::chrono::steady_clock::time_point start_;
    bool started_ = false;
};

}  // namespace egohoi
