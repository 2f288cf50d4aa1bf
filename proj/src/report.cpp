// report subcommand and the CLI entry point.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "egohoi/error.hpp"
#include "egohoi/harness.hpp"
#include "egohoi/render.hpp"
#include "egohoi/serialization.hpp"
#include "egohoi/stream_client.hpp"
#include "egohoi/stream_service.hpp"

namespace egohoi {

namespace {

json load_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
    return j;
}

// Success framing: the row's predictions on this frame reproduce the GT
// under all four metrics.
bool frame_success(const InteractionEvent& event, const HoiFrameGT& gt) {
    HoiVideo probe;
    probe.events.push_back(event);
    probe.gt.push_back(gt);
    const HoiApReport r = hoi_ap(std::vector<HoiVideo>{probe});
    return r.ap_hand == 1.0 && r.ap_hand_state == 1.0 && r.ap_hand_side == 1.0 &&
           r.ap_hand_all == 1.0;
}

}  // namespace

int run_report(const ReportOptions& options) {
    const json results = load_json_file(options.results_dir / "results.json", "results");

    // Re-render the tables from the stored metric payload.
    std::cout << "window      iou_thr   AP Hand    AP Hand+State  AP Hand+Side  AP Hand+All  p-AP mean\n";
    for (const json& row : results.at("rows")) {
        char line[256];
        std::snprintf(line, sizeof line, "%-10s  %-8.4f  %-9.4f  %-13.4f  %-12.4f  %-11.4f  %-9.4f\n",
                      row.at("window").get<std::string>().c_str(),
                      row.at("iou_threshold").get<double>(),
                      row.at("hoi").at("ap_hand").get<double>(),
                      row.at("hoi").at("ap_hand_state").get<double>(),
                      row.at("hoi").at("ap_hand_side").get<double>(),
                      row.at("hoi").at("ap_hand_all").get<double>(),
                      row.at("pap").at("mean").get<double>());
        std::cout << line;
    }

    if (options.overlays.empty()) return 0;
    if (options.corpus.empty())
        throw ConfigError("--overlays requires --corpus to draw ground truth");

    const Corpus corpus = load_corpus(options.corpus);
    const json row_events = load_json_file(
        options.results_dir / "events" / ("row_" + std::to_string(options.row) + ".json"),
        "row events");

    std::filesystem::create_directories(options.overlays);
    std::size_t written = 0;
    for (const json& video_entry : row_events.at("videos")) {
        const std::string video_id = video_entry.at("video_id").get<std::string>();
        const VideoGroundTruth& video = corpus.require(video_id);
        for (const json& jev : video_entry.at("events")) {
            if (written >= options.max_frames) break;
            const auto event = jev.get<InteractionEvent>();
            const FrameAnnotation* ann = video.annotation(event.frame_index);
            if (!ann) continue;

            Canvas canvas(video.info.geometry.width, video.info.geometry.height);
            canvas.overlay_gt(ann->gt);
            canvas.overlay_event(event);
            canvas.draw_border(frame_success(event, ann->gt) ? kSuccessColor : kFailureColor);

            char name[128];
            std::snprintf(name, sizeof name, "%s_%06lld.ppm", video_id.c_str(),
                          static_cast<long long>(event.frame_index));
            canvas.save_ppm(options.overlays / name);
            ++written;
        }
    }
    std::cout << "wrote " << written << " overlay frames to " << options.overlays.string()
              << "\n";
    return 0;
}

namespace {

std::atomic<bool> g_interrupted{false};

void handle_signal(int) { g_interrupted.store(true); }

// Config file keys override the corresponding flags.
void apply_config_file(const std::filesystem::path& path, ExperimentConfig& cfg) {
    const json j = load_json_file(path, "config");
    if (j.contains("corpus")) cfg.corpus = j["corpus"].get<std::string>();
    if (j.contains("videos")) cfg.videos = j["videos"].get<std::vector<std::string>>();
    if (j.contains("recognizer")) cfg.recognizer = j["recognizer"].get<std::string>();
    if (j.contains("detector")) cfg.detector = j["detector"].get<std::string>();
    if (j.contains("iou_thresholds"))
        cfg.iou_thresholds = j["iou_thresholds"].get<std::vector<double>>();
    if (j.contains("windows")) cfg.windows = j["windows"].get<std::vector<std::string>>();
    if (j.contains("pap_threshold_seconds"))
        cfg.pap_threshold_seconds = j["pap_threshold_seconds"].get<std::vector<double>>();
    if (j.contains("recognizer_threshold"))
        cfg.recognizer_threshold = j["recognizer_threshold"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
}

struct ServeFlags {
    std::string corpus;
    std::string bind = "127.0.0.1";
    int port = 8090;
    std::string recognizer = "oracle";
    std::string detector = "scripted";
    std::string window = "30";
    double iou_threshold = 0.01;
    double recognizer_threshold = 0.5;
    std::uint64_t seed = 0;
    std::string tap = "none";
    int group_size = 30;
    int linger_ms = 100;
    int queue_ingest = 4;
    int queue_model = 120;
    int queue_viz = 30;
    bool log_frames = false;
    std::string config_file;
};

void apply_serve_config_file(const std::filesystem::path& path, ServeFlags& f) {
    const json j = load_json_file(path, "config");
    if (j.contains("corpus")) f.corpus = j["corpus"].get<std::string>();
    if (j.contains("bind")) f.bind = j["bind"].get<std::string>();
    if (j.contains("port")) f.port = j["port"].get<int>();
    if (j.contains("recognizer")) f.recognizer = j["recognizer"].get<std::string>();
    if (j.contains("detector")) f.detector = j["detector"].get<std::string>();
    if (j.contains("window")) {
        if (j["window"].is_string())
            f.window = j["window"].get<std::string>();
        else
            f.window = std::to_string(j["window"].get<int>());
    }
    if (j.contains("iou_threshold")) f.iou_threshold = j["iou_threshold"].get<double>();
    if (j.contains("recognizer_threshold"))
        f.recognizer_threshold = j["recognizer_threshold"].get<double>();
    if (j.contains("seed")) f.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tap")) f.tap = j["tap"].get<std::string>();
    if (j.contains("group_size")) f.group_size = j["group_size"].get<int>();
    if (j.contains("group_linger_ms")) f.linger_ms = j["group_linger_ms"].get<int>();
    if (j.contains("queue_ingest_batches")) f.queue_ingest = j["queue_ingest_batches"].get<int>();
    if (j.contains("queue_model_frames")) f.queue_model = j["queue_model_frames"].get<int>();
    if (j.contains("queue_viz_frames")) f.queue_viz = j["queue_viz_frames"].get<int>();
    if (j.contains("log_frames")) f.log_frames = j["log_frames"].get<bool>();
}

int run_serve(const ServeFlags& flags) {
    const Corpus corpus = load_corpus(flags.corpus);

    ServiceConfig config;
    config.bind_address = flags.bind;
    config.port = flags.port;
    config.cascade =
        cascade_config_for(flags.window, flags.iou_threshold, flags.recognizer_threshold);
    config.group_size = flags.group_size;
    config.group_linger = std::chrono::milliseconds(flags.linger_ms);
    config.ingest_capacity_batches = static_cast<std::size_t>(flags.queue_ingest);
    config.model_capacity_frames = static_cast<std::size_t>(flags.queue_model);
    config.viz_capacity_frames = static_cast<std::size_t>(flags.queue_viz);
    if (flags.tap != "none" && !flags.tap.empty()) config.tap_dir = flags.tap;
    if (flags.log_frames) config.frame_log = &std::cerr;

    const std::string recognizer_spec = flags.recognizer;
    const std::string detector_spec = flags.detector;
    const double rec_threshold = flags.recognizer_threshold;
    const std::uint64_t seed = flags.seed;
    BackendFactory factory = [recognizer_spec, detector_spec, rec_threshold,
                              seed](const VideoGroundTruth& video) {
        SessionBackends backends;
        backends.recognizer = build_recognizer(recognizer_spec, video, rec_threshold, seed);
        backends.detector = build_detector(detector_spec, video, seed);
        return backends;
    };

    StreamService service(corpus, std::move(factory), config);
    service.start();
    std::cout << "serving on http://" << flags.bind << ":" << service.port()
              << " (videos: " << corpus.videos.size() << ", window: " << flags.window
              << ", iou threshold: " << flags.iou_threshold << ")\n";

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_interrupted.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    std::cout << "draining...\n";
    service.stop();
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Cascaded hand-object-interaction detection over egocentric streams"};
    app.require_subcommand(1);

    // evaluate
    ExperimentConfig eval_cfg;
    std::string eval_config_file;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "run offline evaluation rows");
    evaluate_cmd->add_option("--corpus", eval_cfg.corpus, "corpus directory")->required();
    evaluate_cmd->add_option("--out", eval_cfg.out_dir, "output directory")->required();
    evaluate_cmd->add_option("--videos", eval_cfg.videos, "subset of video ids");
    evaluate_cmd->add_option("--recognizer", eval_cfg.recognizer,
                             "oracle | scripted[:k=v,...] | external:tcp:...|stdio:...");
    evaluate_cmd->add_option("--detector", eval_cfg.detector,
                             "scripted[:k=v,...] | external:...");
    evaluate_cmd->add_option("--iou-threshold", eval_cfg.iou_thresholds,
                             "association threshold sweep (ascending)");
    evaluate_cmd->add_option("--window", eval_cfg.windows, "'oracle' or frame counts");
    evaluate_cmd->add_option("--pap-seconds", eval_cfg.pap_threshold_seconds,
                             "p-AP time thresholds in seconds");
    evaluate_cmd->add_option("--recognizer-threshold", eval_cfg.recognizer_threshold,
                             "contact decision threshold");
    evaluate_cmd->add_option("--seed", eval_cfg.seed, "root seed for scripted noise");
    evaluate_cmd->add_option("--config", eval_config_file,
                             "JSON config file (overrides flags)");

    // report
    ReportOptions report_options;
    auto* report_cmd = app.add_subcommand("report", "render tables and overlay dumps");
    report_cmd->add_option("--results", report_options.results_dir, "evaluate output directory")
        ->required();
    report_cmd->add_option("--corpus", report_options.corpus, "corpus directory (for overlays)");
    report_cmd->add_option("--overlays", report_options.overlays,
                           "write per-frame overlay PPMs here");
    report_cmd->add_option("--row", report_options.row, "row index for overlays");
    report_cmd->add_option("--max-frames", report_options.max_frames, "overlay frame cap");

    // serve
    ServeFlags serve_flags;
    auto* serve_cmd = app.add_subcommand("serve", "run the streaming HTTP service");
    serve_cmd->add_option("--corpus", serve_flags.corpus, "corpus directory")->required();
    serve_cmd->add_option("--bind", serve_flags.bind, "bind address");
    serve_cmd->add_option("--port", serve_flags.port, "TCP port (0 = ephemeral)");
    serve_cmd->add_option("--recognizer", serve_flags.recognizer, "recognizer backend spec");
    serve_cmd->add_option("--detector", serve_flags.detector, "detector backend spec");
    serve_cmd->add_option("--window", serve_flags.window, "'oracle' or trailing window frames");
    serve_cmd->add_option("--iou-threshold", serve_flags.iou_threshold,
                          "association IoU threshold");
    serve_cmd->add_option("--recognizer-threshold", serve_flags.recognizer_threshold,
                          "contact decision threshold");
    serve_cmd->add_option("--seed", serve_flags.seed, "root seed for scripted noise");
    serve_cmd->add_option("--tap", serve_flags.tap, "overlay dump directory or 'none'");
    serve_cmd->add_option("--group-size", serve_flags.group_size, "model worker group size");
    serve_cmd->add_option("--linger-ms", serve_flags.linger_ms, "partial-group flush linger");
    serve_cmd->add_option("--queue-ingest", serve_flags.queue_ingest, "ingest queue (batches)");
    serve_cmd->add_option("--queue-model", serve_flags.queue_model, "model queue (frames)");
    serve_cmd->add_option("--queue-viz", serve_flags.queue_viz, "visualization queue (frames)");
    serve_cmd->add_flag("--log", serve_flags.log_frames, "per-frame stage timing log lines");
    serve_cmd->add_option("--config", serve_flags.config_file,
                          "JSON config file (overrides flags)");

    // replay
    ReplayClientConfig replay_cfg;
    std::string replay_corpus;
    std::string replay_endpoint = "http://127.0.0.1:8090";
    auto* replay_cmd = app.add_subcommand("replay", "stream a corpus video to a service");
    replay_cmd->add_option("--corpus", replay_corpus, "corpus directory")->required();
    replay_cmd->add_option("--video", replay_cfg.video_id, "video id")->required();
    replay_cmd->add_option("--speed", replay_cfg.speed, "replay speed (0 = unpaced)");
    replay_cmd->add_option("--endpoint", replay_endpoint, "service endpoint http://HOST:PORT");
    replay_cmd->add_option("--batch-frames", replay_cfg.batch_frames, "frames per batch");

    // synth
    SynthSpec synth_spec;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--videos", synth_spec.videos, "video count");
    synth_cmd->add_option("--frames", synth_spec.frames_per_video, "frames per video");
    synth_cmd->add_option("--events", synth_spec.events_per_video, "contact events per video");
    synth_cmd->add_option("--segment", synth_spec.segment_frames, "contact segment length");
    synth_cmd->add_option("--fps", synth_spec.fps, "frame rate");
    synth_cmd->add_option("--width", synth_spec.width, "image width");
    synth_cmd->add_option("--height", synth_spec.height, "image height");
    synth_cmd->add_option("--distractors", synth_spec.distractor_objects, "distractor objects");
    synth_cmd->add_option("--iou-min", synth_spec.contact_iou_min, "lowest contact IoU target");
    synth_cmd->add_option("--iou-max", synth_spec.contact_iou_max, "highest contact IoU target");
    synth_cmd->add_option("--seed", synth_spec.seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (evaluate_cmd->parsed()) {
            if (!eval_config_file.empty()) apply_config_file(eval_config_file, eval_cfg);
            const Corpus corpus = load_corpus(eval_cfg.corpus);
            const EvalResults results = evaluate(corpus, eval_cfg);
            write_results(results, eval_cfg.out_dir);
            std::cout << render_tables(results);
            return 0;
        }
        if (report_cmd->parsed()) return run_report(report_options);
        if (serve_cmd->parsed()) {
            if (!serve_flags.config_file.empty())
                apply_serve_config_file(serve_flags.config_file, serve_flags);
            return run_serve(serve_flags);
        }
        if (replay_cmd->parsed()) {
            parse_http_endpoint(replay_endpoint, replay_cfg.host, replay_cfg.port);
            replay_cfg.corpus_root = replay_corpus;
            const Corpus corpus = load_corpus(replay_corpus);
            const ReplayClientResult result = run_replay_client(corpus, replay_cfg);
            std::cout << "session " << result.session_id << ": sent " << result.frames_sent
                      << " frames in " << result.batches_sent << " batches, "
                      << result.events.size() << " events, wall " << result.wall_seconds
                      << " s, mean per-frame overhead " << result.mean_frame_overhead_us / 1000.0
                      << " ms\n";
            return 0;
        }
        if (synth_cmd->parsed()) {
            synth_corpus_to_disk(synth_spec, synth_out);
            const Corpus corpus = load_corpus(synth_out);
            std::size_t points = 0;
            for (const auto& v : corpus.videos) points += v.contact_points.size();
            std::cout << "wrote " << corpus.videos.size() << " videos, " << points
                      << " contact points to " << synth_out << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CorpusError& e) {
        std::cerr << "corpus error: " << e.what() << "\n";
        return 3;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace egohoi
