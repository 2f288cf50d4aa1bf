#include "egohoi/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "egohoi/error.hpp"
#include "egohoi/serialization.hpp"

namespace egohoi {

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void fail(const std::filesystem::path& file, const std::string& msg) {
    throw CorpusError(file.string() + ": " + msg);
}

[[noreturn]] void fail(const std::filesystem::path& file, std::int64_t frame, const std::string& msg) {
    throw CorpusError(file.string() + ": frame " + std::to_string(frame) + ": " + msg);
}

void validate_box(const BBox& b, const std::filesystem::path& file, std::int64_t frame,
                  const char* what) {
    if (!b.valid())
        fail(file, frame, std::string(what) + " box violates the BBox invariants");
}

// Frame pattern: exactly one %d conversion, optional zero flag and width.
struct FramePattern {
    std::string prefix;
    std::string suffix;
    bool zero_pad = false;
    int width = 0;
};

FramePattern parse_frame_pattern(const std::string& pattern, const std::filesystem::path& file) {
    const std::size_t pos = pattern.find('%');
    if (pos == std::string::npos) fail(file, "frame_pattern has no %d conversion: " + pattern);
    FramePattern p;
    p.prefix = pattern.substr(0, pos);
    std::size_t i = pos + 1;
    if (i < pattern.size() && pattern[i] == '0') {
        p.zero_pad = true;
        ++i;
    }
    while (i < pattern.size() && pattern[i] >= '0' && pattern[i] <= '9') {
        p.width = p.width * 10 + (pattern[i] - '0');
        ++i;
    }
    if (i >= pattern.size() || pattern[i] != 'd')
        fail(file, "frame_pattern must use a single %d conversion: " + pattern);
    p.suffix = pattern.substr(i + 1);
    if (p.suffix.find('%') != std::string::npos)
        fail(file, "frame_pattern must use a single %d conversion: " + pattern);
    return p;
}

std::string format_frame_path(const std::string& pattern, std::int64_t frame) {
    const FramePattern p = parse_frame_pattern(pattern, "<pattern>");
    std::string digits = std::to_string(frame);
    if (static_cast<int>(digits.size()) < p.width)
        digits.insert(0, static_cast<std::size_t>(p.width) - digits.size(), p.zero_pad ? '0' : ' ');
    return p.prefix + digits + p.suffix;
}

json frame_record_to_json(const FrameAnnotation& a) {
    json j;
    j["frame"] = a.gt.frame_index;
    if (!a.gt.hands.empty()) j["hands"] = a.gt.hands;
    if (!a.gt.active_objects.empty()) j["active_objects"] = a.gt.active_objects;
    if (!a.scene_objects.empty()) j["objects"] = a.scene_objects;
    if (a.contact_point) j["contact_point"] = true;
    return j;
}

FrameAnnotation frame_record_from_json(const json& j) {
    FrameAnnotation a;
    a.gt.frame_index = j.at("frame").get<std::int64_t>();
    if (j.contains("hands")) a.gt.hands = j.at("hands").get<std::vector<GtHand>>();
    if (j.contains("active_objects"))
        a.gt.active_objects = j.at("active_objects").get<std::vector<GtActiveObject>>();
    if (j.contains("objects")) a.scene_objects = j.at("objects").get<std::vector<Detection>>();
    if (j.contains("contact_point")) a.contact_point = j.at("contact_point").get<bool>();
    return a;
}

void validate_annotation(const FrameAnnotation& a, const VideoInfo& info,
                         const std::filesystem::path& file) {
    const std::int64_t f = a.gt.frame_index;
    if (f < 0 || f >= info.n_frames)
        fail(file, f, "frame index outside [0, " + std::to_string(info.n_frames) + ")");
    for (const GtHand& h : a.gt.hands) validate_box(h.box, file, f, "hand");
    bool any_contact = false;
    for (const GtHand& h : a.gt.hands) any_contact = any_contact || h.state == ContactState::Contact;
    for (const GtActiveObject& o : a.gt.active_objects) {
        validate_box(o.box, file, f, "active object");
        if (o.class_id < 1) fail(file, f, "active object class_id must be >= 1");
        const bool linked = std::any_of(a.gt.hands.begin(), a.gt.hands.end(),
                                        [&](const GtHand& h) { return h.side == o.hand_side; });
        if (!linked)
            fail(file, f, std::string("active object links to side '") + to_string(o.hand_side) +
                              "' but the frame has no such hand");
    }
    for (const Detection& d : a.scene_objects) {
        validate_box(d.bbox, file, f, "scene object");
        if (d.kind != Kind::Object) fail(file, f, "scene objects must have kind 'object'");
        if (d.class_id < 1) fail(file, f, "scene object class_id must be >= 1");
    }
    if (a.contact_point && !any_contact)
        fail(file, f, "contact_point frame has no hand in contact state");
}

void finalize_video(VideoGroundTruth& video) {
    video.contact_points.clear();
    video.contact_state_frames.clear();
    for (const auto& [frame, ann] : video.frames) {
        if (ann.contact_point) video.contact_points.push_back(frame);
        const bool any_contact =
            std::any_of(ann.gt.hands.begin(), ann.gt.hands.end(),
                        [](const GtHand& h) { return h.state == ContactState::Contact; });
        if (any_contact) video.contact_state_frames.push_back(frame);
    }
}

}  // namespace

const FrameAnnotation* VideoGroundTruth::annotation(std::int64_t frame) const {
    const auto it = frames.find(frame);
    return it == frames.end() ? nullptr : &it->second;
}

bool VideoGroundTruth::has_contact_state(std::int64_t frame) const {
    return std::binary_search(contact_state_frames.begin(), contact_state_frames.end(), frame);
}

bool VideoGroundTruth::is_contact_point(std::int64_t frame) const {
    return std::binary_search(contact_points.begin(), contact_points.end(), frame);
}

const VideoGroundTruth* Corpus::find(const std::string& video_id) const {
    for (const VideoGroundTruth& v : videos)
        if (v.info.video_id == video_id) return &v;
    return nullptr;
}

const VideoGroundTruth& Corpus::require(const std::string& video_id) const {
    const VideoGroundTruth* v = find(video_id);
    if (!v) throw CorpusError("unknown video id: " + video_id);
    return *v;
}

Corpus load_corpus(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) throw CorpusError("cannot open " + manifest_path.string());

    Corpus corpus;
    try {
        const json j = json::parse(mf);
        corpus.manifest.schema_version = j.at("schema_version").get<int>();
        corpus.manifest.videos = j.at("videos").get<std::vector<VideoInfo>>();
    } catch (const json::exception& e) {
        fail(manifest_path, e.what());
    }
    if (corpus.manifest.schema_version != kSchemaVersion)
        fail(manifest_path,
             "unsupported schema_version " + std::to_string(corpus.manifest.schema_version));

    std::vector<std::string> ids;
    for (const VideoInfo& v : corpus.manifest.videos) {
        if (v.n_frames <= 0) fail(manifest_path, "video " + v.video_id + ": n_frames must be > 0");
        if (!(v.fps > 0.0)) fail(manifest_path, "video " + v.video_id + ": fps must be > 0");
        if (v.geometry.width <= 0 || v.geometry.height <= 0)
            fail(manifest_path, "video " + v.video_id + ": image geometry must be positive");
        if (std::find(ids.begin(), ids.end(), v.video_id) != ids.end())
            fail(manifest_path, "duplicate video id " + v.video_id);
        ids.push_back(v.video_id);
        if (v.frame_pattern) parse_frame_pattern(*v.frame_pattern, manifest_path);
    }

    for (const VideoInfo& info : corpus.manifest.videos) {
        const auto ann_path = dir / "annotations" / (info.video_id + ".jsonl");
        std::ifstream af(ann_path);
        if (!af) throw CorpusError("cannot open " + ann_path.string());

        VideoGroundTruth video;
        video.info = info;

        std::string line;
        bool header_seen = false;
        std::size_t line_no = 0;
        while (std::getline(af, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                fail(ann_path, "line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!header_seen) {
                try {
                    if (j.at("schema_version").get<int>() != kSchemaVersion)
                        fail(ann_path, "unsupported schema_version");
                    if (j.at("video_id").get<std::string>() != info.video_id)
                        fail(ann_path, "header video_id does not match the manifest");
                } catch (const json::exception& e) {
                    fail(ann_path, std::string("bad header: ") + e.what());
                }
                header_seen = true;
                continue;
            }
            FrameAnnotation a;
            try {
                a = frame_record_from_json(j);
            } catch (const std::exception& e) {
                fail(ann_path, "line " + std::to_string(line_no) + ": " + e.what());
            }
            validate_annotation(a, info, ann_path);
            const std::int64_t frame_index = a.gt.frame_index;
            if (!video.frames.emplace(frame_index, std::move(a)).second)
                fail(ann_path, frame_index, "duplicate frame annotation");
        }
        if (!header_seen) fail(ann_path, "missing header record");
        finalize_video(video);
        corpus.videos.push_back(std::move(video));
    }
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "annotations");
    {
        json j;
        j["schema_version"] = corpus.manifest.schema_version;
        j["videos"] = corpus.manifest.videos;
        std::ofstream mf(dir / "manifest.json", std::ios::binary);
        if (!mf) throw CorpusError("cannot write " + (dir / "manifest.json").string());
        mf << j.dump(2) << "\n";
    }
    for (const VideoGroundTruth& video : corpus.videos) {
        const auto path = dir / "annotations" / (video.info.video_id + ".jsonl");
        std::ofstream af(path, std::ios::binary);
        if (!af) throw CorpusError("cannot write " + path.string());
        json header;
        header["schema_version"] = corpus.manifest.schema_version;
        header["video_id"] = video.info.video_id;
        af << header.dump() << "\n";
        for (const auto& [frame, ann] : video.frames) af << frame_record_to_json(ann).dump() << "\n";
    }
}

std::uint64_t corpus_checksum(const Corpus& corpus) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
    const auto feed = [&h](const std::string& s) {
        for (const unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    json manifest;
    manifest["schema_version"] = corpus.manifest.schema_version;
    manifest["videos"] = corpus.manifest.videos;
    feed(manifest.dump());
    for (const VideoGroundTruth& video : corpus.videos)
        for (const auto& [frame, ann] : video.frames) feed(frame_record_to_json(ann).dump());
    return h;
}

ReplaySource::ReplaySource(const VideoGroundTruth& video, double speed,
                           std::filesystem::path corpus_root)
    : video_(video), speed_(speed), corpus_root_(std::move(corpus_root)) {}

std::int64_t ReplaySource::remaining() const { return video_.info.n_frames - cursor_; }

std::optional<Frame> ReplaySource::next() {
    if (cursor_ >= video_.info.n_frames) return std::nullopt;
    if (!started_) {
        start_ = std::chrono::steady_clock::now();
        started_ = true;
    }
    const std::int64_t f = cursor_++;
    const double ts = static_cast<double>(f) / video_.info.fps;
    if (speed_ > 0.0) {
        // Absolute schedule: frame f is due at start + f/(fps*speed); no drift.
        const auto due = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                      std::chrono::duration<double>(ts / speed_));
        std::this_thread::sleep_until(due);
    }
    Frame frame{f, ts, {}};
    if (video_.info.frame_pattern) {
        const auto rel = format_frame_path(*video_.info.frame_pattern, f);
        const auto path = corpus_root_.empty() ? std::filesystem::path(rel) : corpus_root_ / rel;
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw CorpusError("missing frame file " + path.string() + " for video " +
                              video_.info.video_id);
        frame.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return frame;
}

}  // namespace egohoi
