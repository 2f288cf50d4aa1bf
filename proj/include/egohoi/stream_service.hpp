#pragma once

// Server side of the real-time pipeline: HTTP batch ingestion, bounded
// queues with backpressure, a model worker consuming frames in groups
// through the cascade, a visualization tap, and a feedback channel.
//
// HTTP surface (docs/http_api.md): POST /session, POST /batch (multipart),
// GET /events, GET /health.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "egohoi/cascade.hpp"
#include "egohoi/dataset.hpp"
#include "egohoi/events.hpp"
#include "egohoi/queues.hpp"

namespace egohoi {

struct FrameTimingRecord {
    std::int64_t frame_index = 0;
    double ingest_us = 0.0;
    double queue_us = 0.0;
    double infer_us = 0.0;
    double total_us = 0.0;
    bool od_invoked = false;
    std::string error;  // empty unless the frame drained through a degraded session
};

struct FeedbackRecord {
    std::string session_id;
    std::vector<InteractionEvent> events;
    std::vector<FrameTimingRecord> timing;
};

void to_json(nlohmann::json& j, const FrameTimingRecord& t);
void from_json(const nlohmann::json& j, FrameTimingRecord& t);
void to_json(nlohmann::json& j, const FeedbackRecord& r);
void from_json(const nlohmann::json& j, FeedbackRecord& r);

struct SessionBackends {
    std::unique_ptr<Recognizer> recognizer;
    std::unique_ptr<Detector> detector;
};

using BackendFactory = std::function<SessionBackends(const VideoGroundTruth& video)>;

struct ServiceConfig {
    std::string bind_address = "127.0.0.1";
    int port = 0;  // 0: pick an ephemeral port

    std::size_t ingest_capacity_batches = 4;
    std::size_t model_capacity_frames = 120;
    std::size_t viz_capacity_frames = 30;
    std::size_t max_batch_frames = 60;
    int group_size = 30;
    std::chrono::milliseconds group_linger{100};

    CascadeConfig cascade{};
    std::filesystem::path tap_dir;      // empty: null sink
    std::ostream* frame_log = nullptr;  // one structured line per frame when set
};

class StreamService {
public:
    StreamService(const Corpus& corpus, BackendFactory factory, ServiceConfig config);
    ~StreamService();

    StreamService(const StreamService&) = delete;
    StreamService& operator=(const StreamService&) = delete;

    void start();
    void stop();

    int port() const { return port_; }

    // Observability for tests and the CLI.
    std::int64_t viz_dropped() const { return viz_dropped_.load(); }
    bool tap_enabled() const { return tap_enabled_.load(); }

private:
    struct Session;
    struct WorkItem;
    struct VizItem;
    struct DecodedBatch;
    struct Impl;

    void duplicator_loop();
    void worker_loop();
    void tap_loop();

    const Corpus& corpus_;
    BackendFactory factory_;
    ServiceConfig config_;
    int port_ = 0;

    std::unique_ptr<Impl> impl_;
    std::atomic<std::int64_t> viz_dropped_{0};
    std::atomic<bool> tap_enabled_{true};
};

}  // namespace egohoi
