#pragma once

// Replay client: streams a corpus video to a running service in 60-frame
// batches at a configurable speed, collecting feedback piggybacked on the
// batch acks plus a final poll. Stands in for the headset device.

#include <cstdint>
#include <string>
#include <vector>

#include "egohoi/dataset.hpp"
#include "egohoi/stream_service.hpp"

namespace egohoi {

struct ReplayClientConfig {
    std::string host = "127.0.0.1";
    int port = 0;
    std::string video_id;
    double speed = 1.0;  // 0: unpaced (as fast as the server accepts)
    std::size_t batch_frames = 60;
    std::filesystem::path corpus_root;  // for image-mode replay
};

// "http://HOST:PORT" -> (host, port); ConfigError on anything else.
void parse_http_endpoint(const std::string& endpoint, std::string& host, int& port);

struct ReplayClientResult {
    std::string session_id;
    std::vector<FeedbackRecord> records;
    std::vector<InteractionEvent> events;  // flattened, frame order
    std::int64_t frames_sent = 0;
    std::int64_t batches_sent = 0;
    double wall_seconds = 0.0;
    double mean_frame_overhead_us = 0.0;  // mean server-side total_us per frame
};

ReplayClientResult run_replay_client(const Corpus& corpus, const ReplayClientConfig& config);

}  // namespace egohoi
