#include "egohoi/stream_service.hpp"

#include <httplib.h>

#include <map>
#include <mutex>

#include "egohoi/box_kernels.hpp"
#include "egohoi/error.hpp"
#include "egohoi/render.hpp"
#include "egohoi/serialization.hpp"

namespace egohoi {

namespace {

using Clock = std::chrono::steady_clock;

double us_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::micro>(b - a).count();
}

}  // namespace

void to_json(nlohmann::json& j, const FrameTimingRecord& t) {
    j = json{{"frame_index", t.frame_index},
             {"ingest_us", t.ingest_us},
             {"queue_us", t.queue_us},
             {"infer_us", t.infer_us},
             {"total_us", t.total_us},
             {"od_invoked", t.od_invoked}};
    if (!t.error.empty()) j["error"] = t.error;
}

void from_json(const nlohmann::json& j, FrameTimingRecord& t) {
    t.frame_index = j.at("frame_index").get<std::int64_t>();
    t.ingest_us = j.at("ingest_us").get<double>();
    t.queue_us = j.at("queue_us").get<double>();
    t.infer_us = j.at("infer_us").get<double>();
    t.total_us = j.at("total_us").get<double>();
    t.od_invoked = j.at("od_invoked").get<bool>();
    t.error = j.value("error", "");
}

void to_json(nlohmann::json& j, const FeedbackRecord& r) {
    j = json{{"session_id", r.session_id}, {"events", r.events}, {"timing", r.timing}};
}

void from_json(const nlohmann::json& j, FeedbackRecord& r) {
    r.session_id = j.at("session_id").get<std::string>();
    r.events = j.at("events").get<std::vector<InteractionEvent>>();
    r.timing = j.at("timing").get<std::vector<FrameTimingRecord>>();
}

struct StreamService::Session {
    std::string id;
    const VideoGroundTruth* video = nullptr;
    SessionBackends backends;
    std::unique_ptr<CascadeRunner> runner;

    std::mutex ingest_mutex;  // serializes batch validation per session
    std::int64_t next_batch = 0;
    std::int64_t next_frame = 0;

    std::mutex feedback_mutex;
    std::vector<FeedbackRecord> feedback;
    std::size_t ack_cursor = 0;

    std::mutex latest_mutex;
    std::optional<InteractionEvent> latest_event;

    std::atomic<std::int64_t> frames_received{0};
    std::atomic<std::int64_t> frames_processed{0};
    std::atomic<bool> degraded{false};
};

struct StreamService::WorkItem {
    std::shared_ptr<Session> session;
    Frame frame;
    Clock::time_point enqueued{};
    double ingest_us = 0.0;
};

struct StreamService::VizItem {
    std::shared_ptr<Session> session;
    Frame frame;
};

struct StreamService::DecodedBatch {
    std::shared_ptr<Session> session;
    std::vector<Frame> frames;
    double ingest_us_per_frame = 0.0;
};

struct StreamService::Impl {
    explicit Impl(const ServiceConfig& cfg)
        : ingest_queue(cfg.ingest_capacity_batches),
          model_queue(cfg.model_capacity_frames),
          viz_queue(cfg.viz_capacity_frames) {}

    httplib::Server server;
    std::thread listen_thread;
    std::thread duplicator;
    std::thread worker;
    std::thread tap;

    BoundedQueue<DecodedBatch> ingest_queue;
    BoundedQueue<WorkItem> model_queue;
    BoundedQueue<VizItem> viz_queue;

    std::mutex sessions_mutex;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions;
    std::int64_t next_session = 1;

    bool started = false;
    bool stopped = false;
};

StreamService::StreamService(const Corpus& corpus, BackendFactory factory, ServiceConfig config)
    : corpus_(corpus),
      factory_(std::move(factory)),
      config_(std::move(config)),
      impl_(std::make_unique<Impl>(config_)) {
    if (config_.group_size < 1) throw ConfigError("group_size must be >= 1");
    if (config_.max_batch_frames < 1) throw ConfigError("max_batch_frames must be >= 1");
}

StreamService::~StreamService() { stop(); }

void StreamService::start() {
    auto& im = *impl_;
    if (im.started) return;

    im.server.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.contains("video_id")) {
            res.status = 400;
            res.set_content(R"({"error":"body must be JSON with video_id"})", "application/json");
            return;
        }
        const std::string video_id = body["video_id"].get<std::string>();
        const VideoGroundTruth* video = corpus_.find(video_id);
        if (!video) {
            res.status = 404;
            res.set_content(R"({"error":"unknown video_id"})", "application/json");
            return;
        }
        auto session = std::make_shared<Session>();
        session->video = video;
        try {
            session->backends = factory_(*video);
            session->runner = std::make_unique<CascadeRunner>(
                *video, session->backends.recognizer.get(), session->backends.detector.get(),
                config_.cascade);
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            return;
        }
        {
            std::lock_guard lock(impl_->sessions_mutex);
            session->id = "s-" + std::to_string(impl_->next_session++);
            impl_->sessions.emplace(session->id, session);
        }
        const json reply{{"session_id", session->id},
                         {"video_id", video_id},
                         {"fps", video->info.fps},
                         {"width", video->info.geometry.width},
                         {"height", video->info.geometry.height},
                         {"batch_capacity", config_.max_batch_frames},
                         {"group_size", config_.group_size}};
        res.set_content(reply.dump(), "application/json");
    });

    im.server.Post("/batch", [this](const httplib::Request& req, httplib::Response& res) {
        const auto t_ingest0 = Clock::now();
        if (!req.has_file("meta")) {
            res.status = 400;
            res.set_content(R"({"error":"missing multipart part 'meta'"})", "application/json");
            return;
        }
        json meta = json::parse(req.get_file_value("meta").content, nullptr, false);
        if (meta.is_discarded() || !meta.is_object() || !meta.contains("session_id") ||
            !meta["session_id"].is_string() || !meta.contains("batch_index") ||
            !meta["batch_index"].is_number_integer() || !meta.contains("frames") ||
            !meta["frames"].is_array()) {
            res.status = 400;
            res.set_content(R"({"error":"meta must carry session_id, batch_index, frames[]"})",
                            "application/json");
            return;
        }

        std::shared_ptr<Session> session;
        {
            std::lock_guard lock(impl_->sessions_mutex);
            const auto it = impl_->sessions.find(meta["session_id"].get<std::string>());
            if (it != impl_->sessions.end()) session = it->second;
        }
        if (!session) {
            res.status = 404;
            res.set_content(R"({"error":"unknown session"})", "application/json");
            return;
        }

        const auto parts = req.get_file_values("frame");
        const auto& frame_meta = meta["frames"];
        if (frame_meta.size() > config_.max_batch_frames || parts.size() > config_.max_batch_frames) {
            res.status = 413;
            res.set_content(json{{"error", "batch exceeds " +
                                               std::to_string(config_.max_batch_frames) +
                                               " frames"}}
                                .dump(),
                            "application/json");
            return;
        }
        if (parts.size() != frame_meta.size()) {
            res.status = 400;
            res.set_content(R"({"error":"frame part count does not match meta.frames"})",
                            "application/json");
            return;
        }

        DecodedBatch batch;
        batch.session = session;
        std::size_t accepted = 0;
        {
            // Validation and enqueue stay under the per-session mutex so
            // frames enter the pipeline in batch order for any interleaving
            // of arrivals. Other sessions ingest concurrently.
            std::lock_guard lock(session->ingest_mutex);
            const auto batch_index = meta["batch_index"].get<std::int64_t>();
            if (batch_index != session->next_batch) {
                // Duplicate or out-of-order delivery: reject, state unchanged.
                res.status = 409;
                res.set_content(json{{"error", "expected batch_index " +
                                                   std::to_string(session->next_batch)}}
                                    .dump(),
                                "application/json");
                return;
            }
            std::int64_t prev = session->next_frame - 1;
            batch.frames.reserve(parts.size());
            for (std::size_t i = 0; i < parts.size(); ++i) {
                Frame frame;
                frame.frame_index = frame_meta[i].value("frame_index", std::int64_t{-1});
                frame.timestamp = frame_meta[i].value("timestamp", 0.0);
                if (frame.frame_index <= prev) {
                    res.status = 409;
                    res.set_content(
                        json{{"error", "frame indices must increase; got " +
                                           std::to_string(frame.frame_index) + " after " +
                                           std::to_string(prev)}}
                            .dump(),
                        "application/json");
                    return;
                }
                prev = frame.frame_index;
                const std::string& content = parts[i].content;
                frame.payload.assign(content.begin(), content.end());
                batch.frames.push_back(std::move(frame));
            }

            accepted = batch.frames.size();
            batch.ingest_us_per_frame =
                accepted ? us_between(t_ingest0, Clock::now()) / static_cast<double>(accepted)
                         : 0.0;

            // Blocks when the pipeline is saturated: the client's send loop
            // self-paces instead of the server dropping frames.
            if (!impl_->ingest_queue.push(std::move(batch))) {
                res.status = 503;
                res.set_content(R"({"error":"service shutting down"})", "application/json");
                return;
            }
            session->next_batch = batch_index + 1;
            session->next_frame = prev + 1;
            session->frames_received += static_cast<std::int64_t>(accepted);
        }

        json feedback = json::array();
        {
            std::lock_guard lock(session->feedback_mutex);
            for (std::size_t i = session->ack_cursor; i < session->feedback.size(); ++i)
                feedback.push_back(json(session->feedback[i]));
            session->ack_cursor = session->feedback.size();
        }
        res.set_content(
            json{{"accepted", accepted}, {"feedback", std::move(feedback)}}.dump(),
            "application/json");
    });

    im.server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.get_param_value("session");
        std::shared_ptr<Session> session;
        {
            std::lock_guard lock(impl_->sessions_mutex);
            const auto it = impl_->sessions.find(id);
            if (it != impl_->sessions.end()) session = it->second;
        }
        if (!session) {
            res.status = 404;
            res.set_content(R"({"error":"unknown session"})", "application/json");
            return;
        }
        std::size_t cursor = 0;
        if (req.has_param("cursor")) {
            try {
                cursor = static_cast<std::size_t>(std::stoull(req.get_param_value("cursor")));
            } catch (const std::exception&) {
                res.status = 400;
                res.set_content(R"({"error":"bad cursor"})", "application/json");
                return;
            }
        }
        json records = json::array();
        std::size_t next_cursor = 0;
        {
            std::lock_guard lock(session->feedback_mutex);
            for (std::size_t i = cursor; i < session->feedback.size(); ++i)
                records.push_back(json(session->feedback[i]));
            next_cursor = session->feedback.size();
        }
        res.set_content(json{{"records", std::move(records)},
                             {"next_cursor", next_cursor},
                             {"frames_received", session->frames_received.load()},
                             {"frames_processed", session->frames_processed.load()},
                             {"degraded", session->degraded.load()}}
                            .dump(),
                        "application/json");
    });

    im.server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        std::size_t sessions = 0;
        {
            std::lock_guard lock(impl_->sessions_mutex);
            sessions = impl_->sessions.size();
        }
        res.set_content(json{{"status", "ok"},
                             {"iou_kernel", iou_kernel_name()},
                             {"sessions", sessions}}
                            .dump(),
                        "application/json");
    });

    if (config_.port == 0) {
        port_ = im.server.bind_to_any_port(config_.bind_address);
        if (port_ <= 0) throw Error("cannot bind to an ephemeral port");
    } else {
        if (!im.server.bind_to_port(config_.bind_address, config_.port))
            throw Error("cannot bind to port " + std::to_string(config_.port));
        port_ = config_.port;
    }

    im.listen_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    im.server.wait_until_ready();
    im.duplicator = std::thread([this] { duplicator_loop(); });
    im.worker = std::thread([this] { worker_loop(); });
    im.tap = std::thread([this] { tap_loop(); });
    im.started = true;
}

void StreamService::stop() {
    auto& im = *impl_;
    if (!im.started || im.stopped) return;
    im.stopped = true;

    // Drain order: ingest -> model -> tap, then stop answering HTTP.
    im.ingest_queue.close();
    if (im.duplicator.joinable()) im.duplicator.join();
    im.model_queue.close();
    if (im.worker.joinable()) im.worker.join();
    im.viz_queue.close();
    if (im.tap.joinable()) im.tap.join();
    im.server.stop();
    if (im.listen_thread.joinable()) im.listen_thread.join();
}

void StreamService::duplicator_loop() {
    auto& im = *impl_;
    while (auto batch = im.ingest_queue.pop()) {
        for (Frame& frame : batch->frames) {
            VizItem viz{batch->session, frame};  // copy for the tap
            WorkItem item{batch->session, std::move(frame), Clock::now(),
                          batch->ingest_us_per_frame};
            if (!im.model_queue.push(std::move(item))) return;  // model path never drops
            if (im.viz_queue.push_drop_oldest(std::move(viz)) > 0) ++viz_dropped_;
        }
    }
}

void StreamService::worker_loop() {
    auto& im = *impl_;
    for (;;) {
        auto first = im.model_queue.pop();
        if (!first) return;

        std::vector<WorkItem> group;
        group.push_back(std::move(*first));
        const auto deadline = Clock::now() + config_.group_linger;
        while (group.size() < static_cast<std::size_t>(config_.group_size)) {
            auto item = im.model_queue.pop_until(deadline);
            if (!item) break;  // linger expired or shutting down
            group.push_back(std::move(*item));
        }

        // One feedback record per session represented in the group.
        std::map<Session*, FeedbackRecord> records;
        for (WorkItem& item : group) {
            Session& session = *item.session;
            const auto t0 = Clock::now();
            const double queue_us = us_between(item.enqueued, t0);

            FrameTimingRecord timing;
            timing.frame_index = item.frame.frame_index;
            timing.ingest_us = item.ingest_us;
            timing.queue_us = queue_us;

            FeedbackRecord& record = records[&session];
            record.session_id = session.id;

            std::optional<InteractionEvent> event;
            if (session.degraded.load()) {
                timing.error = "session degraded; frame drained without inference";
            } else {
                try {
                    auto result = session.runner->process(item.frame);
                    timing.infer_us = us_between(t0, Clock::now());
                    timing.od_invoked = result.timing.od_invoked;
                    event = std::move(result.event);
                } catch (const std::exception& e) {
                    session.degraded.store(true);
                    timing.error = e.what();
                }
            }
            timing.total_us = timing.ingest_us + timing.queue_us + timing.infer_us;
            if (event) {
                record.events.push_back(*event);
                std::lock_guard lock(session.latest_mutex);
                session.latest_event = *event;
            }
            record.timing.push_back(timing);
            session.frames_processed.fetch_add(1);

            if (config_.frame_log) {
                (*config_.frame_log) << "frame=" << timing.frame_index
                                     << " session=" << session.id
                                     << " ingest_us=" << timing.ingest_us
                                     << " queue_us=" << timing.queue_us
                                     << " infer_us=" << timing.infer_us
                                     << " od=" << (timing.od_invoked ? 1 : 0)
                                     << (timing.error.empty() ? "" : " error=1") << "\n";
            }
        }

        for (auto& [session, record] : records) {
            std::lock_guard lock(session->feedback_mutex);
            session->feedback.push_back(std::move(record));
        }
    }
}

void StreamService::tap_loop() {
    auto& im = *impl_;
    const bool null_sink = config_.tap_dir.empty();
    if (!null_sink) {
        std::error_code ec;
        std::filesystem::create_directories(config_.tap_dir, ec);
        if (ec) {
            std::fprintf(stderr, "egohoi: visualization tap disabled: %s\n",
                         ec.message().c_str());
            tap_enabled_.store(false);
        }
    }
    while (auto item = im.viz_queue.pop()) {
        if (null_sink || !tap_enabled_.load()) continue;  // keep draining
        Canvas canvas(item->session->video->info.geometry.width,
                      item->session->video->info.geometry.height);
        canvas.set_background(item->frame.payload);
        {
            std::lock_guard lock(item->session->latest_mutex);
            if (item->session->latest_event) canvas.overlay_event(*item->session->latest_event);
        }
        char name[64];
        std::snprintf(name, sizeof name, "%s_%06lld.ppm", item->session->id.c_str(),
                      static_cast<long long>(item->frame.frame_index));
        try {
            canvas.save_ppm(config_.tap_dir / name);
        } catch (const std::exception& e) {
            // A broken sink must never stall or affect the model path.
            std::fprintf(stderr, "egohoi: visualization tap disabled: %s\n", e.what());
            tap_enabled_.store(false);
        }
    }
}

}  // namespace egohoi
