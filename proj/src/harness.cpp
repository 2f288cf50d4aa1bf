#include "egohoi/harness.hpp"

#include <fstream>
#include <sstream>

#include "egohoi/error.hpp"
#include "egohoi/rng.hpp"
#include "egohoi/serialization.hpp"
#include "egohoi/wire.hpp"

namespace egohoi {

namespace {

struct SpecParams {
    std::string head;
    std::vector<std::pair<std::string, std::string>> params;
};

// "scripted:jitter=1.0,drop=0.1" -> head "scripted" + key/value list.
// "external:tcp:host:port" keeps everything after the first colon as head
// payload (endpoint syntax owns its own colons).
SpecParams parse_spec(const std::string& spec) {
    SpecParams out;
    const std::size_t colon = spec.find(':');
    out.head = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    if (out.head == "external") {
        if (colon == std::string::npos || colon + 1 >= spec.size())
            throw ConfigError("external backend spec needs an endpoint: '" + spec + "'");
        out.params.emplace_back("endpoint", spec.substr(colon + 1));
        return out;
    }
    if (colon == std::string::npos) return out;
    std::stringstream rest(spec.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("backend spec parameter '" + item + "' is not key=value in '" +
                              spec + "'");
        out.params.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw ConfigError("backend spec parameter " + key + "='" + value + "' is not a number");
    }
}

std::int64_t to_int(const std::string& key, const std::string& value) {
    try {
        return std::stoll(value);
    } catch (const std::exception&) {
        throw ConfigError("backend spec parameter " + key + "='" + value + "' is not an integer");
    }
}

}  // namespace

std::unique_ptr<Recognizer> build_recognizer(const std::string& spec,
                                             const VideoGroundTruth& video,
                                             double recognizer_threshold, std::uint64_t seed) {
    const SpecParams parsed = parse_spec(spec);
    if (parsed.head == "oracle") {
        if (!parsed.params.empty()) throw ConfigError("oracle recognizer takes no parameters");
        return make_oracle_recognizer(video);
    }
    if (parsed.head == "scripted") {
        RecognizerNoise noise;
        for (const auto& [key, value] : parsed.params) {
            if (key == "offsets") {
                noise.fire_offsets.clear();
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ';'))
                    noise.fire_offsets.push_back(to_int(key, item));
                if (noise.fire_offsets.empty())
                    throw ConfigError("offsets list must not be empty");
            } else if (key == "miss_every") {
                noise.miss_every = static_cast<int>(to_int(key, value));
            } else if (key == "confidence") {
                noise.confidence = to_double(key, value);
            } else {
                throw ConfigError("unknown scripted recognizer parameter '" + key + "'");
            }
        }
        return make_scripted_recognizer(video, noise);
    }
    if (parsed.head == "external") {
        wire::ExternalOptions options;
        options.recognizer_threshold = recognizer_threshold;
        options.image_path_pattern = video.info.frame_pattern;
        return wire::make_external_recognizer(parsed.params[0].second, options);
    }
    (void)seed;
    throw ConfigError("unknown recognizer spec '" + spec + "'");
}

std::unique_ptr<Detector> build_detector(const std::string& spec, const VideoGroundTruth& video,
                                         std::uint64_t seed) {
    const SpecParams parsed = parse_spec(spec);
    if (parsed.head == "scripted") {
        DetectorNoise noise;
        noise.seed = seed;
        for (const auto& [key, value] : parsed.params) {
            if (key == "jitter")
                noise.box_jitter = to_double(key, value);
            else if (key == "conf_jitter")
                noise.confidence_jitter = to_double(key, value);
            else if (key == "drop")
                noise.drop_prob = to_double(key, value);
            else if (key == "seed")
                noise.seed = static_cast<std::uint64_t>(to_int(key, value));
            else
                throw ConfigError("unknown scripted detector parameter '" + key + "'");
        }
        return make_scripted_detector(video, noise);
    }
    if (parsed.head == "external") {
        wire::ExternalOptions options;
        options.image_path_pattern = video.info.frame_pattern;
        return wire::make_external_detector(parsed.params[0].second, options);
    }
    throw ConfigError("unknown detector spec '" + spec + "'");
}

CascadeConfig cascade_config_for(const std::string& window, double iou_threshold,
                                 double recognizer_threshold) {
    CascadeConfig cfg;
    cfg.association.iou_threshold = iou_threshold;
    cfg.recognizer_threshold = recognizer_threshold;
    if (window == "oracle") {
        cfg.trigger = TriggerMode::Oracle;
    } else {
        cfg.trigger = TriggerMode::Window;
        try {
            cfg.window_frames = std::stoi(window);
        } catch (const std::exception&) {
            throw ConfigError("window must be 'oracle' or a frame count, got '" + window + "'");
        }
        if (cfg.window_frames < 1) throw ConfigError("window frame count must be >= 1");
    }
    return cfg;
}

EvalResults evaluate(const Corpus& corpus, const ExperimentConfig& config) {
    if (corpus.videos.empty()) throw CorpusError("corpus has no videos");
    if (config.iou_thresholds.empty()) throw ConfigError("iou threshold list must not be empty");
    if (!std::is_sorted(config.iou_thresholds.begin(), config.iou_thresholds.end()))
        throw ConfigError("iou threshold sweep must be ascending");
    if (config.windows.empty()) throw ConfigError("window list must not be empty");
    if (config.pap_threshold_seconds.empty() ||
        !std::is_sorted(config.pap_threshold_seconds.begin(), config.pap_threshold_seconds.end()))
        throw ConfigError("p-AP threshold seconds must be non-empty and ascending");

    std::vector<const VideoGroundTruth*> videos;
    if (config.videos.empty()) {
        for (const VideoGroundTruth& v : corpus.videos) videos.push_back(&v);
    } else {
        for (const std::string& id : config.videos) videos.push_back(&corpus.require(id));
    }

    EvalResults results;
    results.config = config;

    for (const std::string& window : config.windows) {
        for (const double threshold : config.iou_thresholds) {
            EvalRow row;
            row.window = window;
            row.iou_threshold = threshold;
            {
                char label[128];
                std::snprintf(label, sizeof label, "window=%s iou=%.4f", window.c_str(),
                              threshold);
                row.label = label;
            }
            const CascadeConfig cascade =
                cascade_config_for(window, threshold, config.recognizer_threshold);

            std::vector<HoiVideo> hoi_inputs;
            std::vector<PapVideo> pap_inputs;
            double fps = videos.front()->info.fps;

            for (std::size_t vi = 0; vi < videos.size(); ++vi) {
                const VideoGroundTruth& video = *videos[vi];
                const std::uint64_t video_seed =
                    DetRng::mix(config.seed, static_cast<std::uint64_t>(vi) + 1);
                // Oracle triggering does not consult the recognizer for the
                // trigger, but still feeds it for the p-AP report.
                auto recognizer = build_recognizer(config.recognizer, video,
                                                   config.recognizer_threshold, video_seed);
                auto detector = build_detector(config.detector, video, video_seed);

                const RunResult run = run_offline(video, recognizer.get(), *detector, cascade);

                // HOI evaluation protocol: frames where contact is annotated.
                HoiVideo hoi;
                for (const InteractionEvent& ev : run.events)
                    if (video.has_contact_state(ev.frame_index)) hoi.events.push_back(ev);
                for (const std::int64_t f : video.contact_state_frames)
                    hoi.gt.push_back(video.annotation(f)->gt);
                hoi_inputs.push_back(std::move(hoi));

                PapVideo pap;
                for (const ContactPrediction& p : run.predictions)
                    if (p.label == ContactLabel::Contact)
                        pap.predictions.push_back(
                            PointPrediction{p.frame_index, p.confidence, 0});
                pap.gt_frames = video.contact_points;
                pap_inputs.push_back(std::move(pap));

                row.timing.frames += run.timing.frames;
                row.timing.od_invocations += run.timing.od_invocations;
                row.timing.detector_calls += run.detector_calls;
                row.timing.recognizer_us_mean += run.timing.recognizer_us_total;
                row.timing.detector_us_mean += run.timing.detector_us_total;

                row.events_per_video.emplace_back(video.info.video_id, run.events);
            }

            if (row.timing.frames > 0)
                row.timing.recognizer_us_mean /= static_cast<double>(row.timing.frames);
            if (row.timing.od_invocations > 0)
                row.timing.detector_us_mean /= static_cast<double>(row.timing.od_invocations);

            row.hoi = hoi_ap(hoi_inputs);
            std::vector<std::int64_t> pap_thresholds;
            for (const double s : config.pap_threshold_seconds)
                pap_thresholds.push_back(static_cast<std::int64_t>(std::llround(s * fps)));
            row.pap = p_ap_pooled(pap_inputs, pap_thresholds);

            results.rows.push_back(std::move(row));
        }
    }
    return results;
}

namespace {

json results_payload(const EvalResults& results) {
    json rows = json::array();
    for (const EvalRow& row : results.rows) {
        json pap = json::array();
        for (const PapEntry& e : row.pap.per_threshold)
            pap.push_back(json{{"threshold_frames", e.threshold_frames}, {"ap", e.ap}});
        rows.push_back(json{{"label", row.label},
                            {"window", row.window},
                            {"iou_threshold", row.iou_threshold},
                            {"hoi",
                             {{"ap_hand", row.hoi.ap_hand},
                              {"ap_hand_state", row.hoi.ap_hand_state},
                              {"ap_hand_side", row.hoi.ap_hand_side},
                              {"ap_hand_all", row.hoi.ap_hand_all}}},
                            {"pap", {{"per_threshold", pap}, {"mean", row.pap.mean}}}});
    }
    return json{{"config",
                 {{"corpus", results.config.corpus.string()},
                  {"recognizer", results.config.recognizer},
                  {"detector", results.config.detector},
                  {"iou_thresholds", results.config.iou_thresholds},
                  {"windows", results.config.windows},
                  {"pap_threshold_seconds", results.config.pap_threshold_seconds},
                  {"recognizer_threshold", results.config.recognizer_threshold},
                  {"seed", results.config.seed}}},
                {"rows", rows}};
}

}  // namespace

std::string render_tables(const EvalResults& results) {
    std::ostringstream out;
    out << "window      iou_thr   AP Hand    AP Hand+State  AP Hand+Side  AP Hand+All  p-AP mean\n";
    for (const EvalRow& row : results.rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%-10s  %-8.4f  %-9.4f  %-13.4f  %-12.4f  %-11.4f  %-9.4f\n",
                      row.window.c_str(), row.iou_threshold, row.hoi.ap_hand,
                      row.hoi.ap_hand_state, row.hoi.ap_hand_side, row.hoi.ap_hand_all,
                      row.pap.mean);
        out << line;
    }
    out << "\np-AP per threshold (frames)\n";
    for (const EvalRow& row : results.rows) {
        out << row.label << ":";
        for (const PapEntry& e : row.pap.per_threshold) {
            char cell[64];
            std::snprintf(cell, sizeof cell, " %lld=%.4f",
                          static_cast<long long>(e.threshold_frames), e.ap);
            out << cell;
        }
        out << "\n";
    }
    return out.str();
}

void write_results(const EvalResults& results, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir / "events");

    {
        std::ofstream f(out_dir / "results.json", std::ios::binary);
        if (!f) throw Error("cannot write " + (out_dir / "results.json").string());
        f << results_payload(results).dump(2) << "\n";
    }
    {
        std::ofstream f(out_dir / "tables.txt", std::ios::binary);
        f << render_tables(results);
    }
    {
        // Measured timings: excluded from the determinism guarantee.
        json rows = json::array();
        for (const EvalRow& row : results.rows)
            rows.push_back(json{{"label", row.label},
                                {"frames", row.timing.frames},
                                {"od_invocations", row.timing.od_invocations},
                                {"detector_calls", row.timing.detector_calls},
                                {"recognizer_us_mean", row.timing.recognizer_us_mean},
                                {"detector_us_mean", row.timing.detector_us_mean}});
        std::ofstream f(out_dir / "timing.json", std::ios::binary);
        f << json{{"rows", rows}}.dump(2) << "\n";
    }
    for (std::size_t i = 0; i < results.rows.size(); ++i) {
        json videos = json::array();
        for (const auto& [video_id, events] : results.rows[i].events_per_video)
            videos.push_back(json{{"video_id", video_id}, {"events", events}});
        std::ofstream f(out_dir / "events" / ("row_" + std::to_string(i) + ".json"),
                        std::ios::binary);
        f << json{{"label", results.rows[i].label}, {"videos", videos}}.dump() << "\n";
    }
}

}  // namespace egohoi
