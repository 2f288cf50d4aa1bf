#include "egohoi/stream_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <thread>

#include "egohoi/error.hpp"
#include "egohoi/serialization.hpp"

namespace egohoi {

void parse_http_endpoint(const std::string& endpoint, std::string& host, int& port) {
    const std::string prefix = "http://";
    if (endpoint.rfind(prefix, 0) != 0)
        throw ConfigError("endpoint must look like http://HOST:PORT, got '" + endpoint + "'");
    const std::string rest = endpoint.substr(prefix.size());
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= rest.size())
        throw ConfigError("endpoint must look like http://HOST:PORT, got '" + endpoint + "'");
    host = rest.substr(0, colon);
    try {
        port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("bad port in endpoint '" + endpoint + "'");
    }
}

namespace {

void collect_feedback(const json& array, ReplayClientResult& result) {
    for (const json& j : array) result.records.push_back(j.get<FeedbackRecord>());
}

}  // namespace

ReplayClientResult run_replay_client(const Corpus& corpus, const ReplayClientConfig& config) {
    const VideoGroundTruth& video = corpus.require(config.video_id);

    httplib::Client client(config.host, config.port);
    client.set_read_timeout(120, 0);  // backpressure can stall acks legitimately
    client.set_write_timeout(120, 0);

    ReplayClientResult result;
    const auto t0 = std::chrono::steady_clock::now();

    auto session_res = client.Post("/session", json{{"video_id", config.video_id}}.dump(),
                                   "application/json");
    if (!session_res || session_res->status != 200)
        throw BackendError("POST /session failed" +
                           (session_res ? " with status " + std::to_string(session_res->status)
                                        : std::string(" (no response)")));
    const json session = json::parse(session_res->body);
    result.session_id = session.at("session_id").get<std::string>();

    ReplaySource source(video, config.speed, config.corpus_root);
    std::int64_t batch_index = 0;
    std::vector<Frame> pending;
    pending.reserve(config.batch_frames);

    const auto flush = [&] {
        if (pending.empty()) return;
        json frames = json::array();
        for (const Frame& f : pending)
            frames.push_back(json{{"frame_index", f.frame_index}, {"timestamp", f.timestamp}});
        const json meta{{"session_id", result.session_id},
                        {"batch_index", batch_index},
                        {"frames", std::move(frames)}};

        httplib::MultipartFormDataItems items;
        items.push_back({"meta", meta.dump(), "", "application/json"});
        for (const Frame& f : pending)
            items.push_back({"frame", std::string(f.payload.begin(), f.payload.end()),
                             std::to_string(f.frame_index), "application/octet-stream"});

        const auto res = client.Post("/batch", items);
        if (!res || res->status != 200)
            throw BackendError("POST /batch " + std::to_string(batch_index) + " failed" +
                               (res ? " with status " + std::to_string(res->status)
                                    : std::string(" (no response)")));
        const json body = json::parse(res->body);
        collect_feedback(body.at("feedback"), result);

        result.frames_sent += static_cast<std::int64_t>(pending.size());
        ++batch_index;
        ++result.batches_sent;
        pending.clear();
    };

    while (auto frame = source.next()) {
        pending.push_back(std::move(*frame));
        if (pending.size() >= config.batch_frames) flush();
    }
    flush();

    // Drain: poll until the server has processed every sent frame.
    std::size_t cursor = result.records.size();
    for (;;) {
        const auto res =
            client.Get("/events?session=" + result.session_id + "&cursor=" + std::to_string(cursor));
        if (!res || res->status != 200)
            throw BackendError("GET /events failed" +
                               (res ? " with status " + std::to_string(res->status)
                                    : std::string(" (no response)")));
        const json body = json::parse(res->body);
        collect_feedback(body.at("records"), result);
        cursor = body.at("next_cursor").get<std::size_t>();
        if (body.at("frames_processed").get<std::int64_t>() >= result.frames_sent) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Overhead = active processing per frame (ingest + inference). Queue
    // wait is reported separately: at real-time rates it is dominated by
    // the structural 30-frame grouping interval, not by pipeline cost.
    double total_us = 0.0;
    std::int64_t timed_frames = 0;
    for (const FeedbackRecord& r : result.records) {
        for (const InteractionEvent& e : r.events) result.events.push_back(e);
        for (const FrameTimingRecord& t : r.timing) {
            total_us += t.ingest_us + t.infer_us;
            ++timed_frames;
        }
    }
    std::sort(result.events.begin(), result.events.end(),
              [](const InteractionEvent& a, const InteractionEvent& b) {
                  return a.frame_index < b.frame_index;
              });
    result.mean_frame_overhead_us = timed_frames ? total_us / static_cast<double>(timed_frames) : 0.0;
    return result;
}

}  // namespace egohoi
