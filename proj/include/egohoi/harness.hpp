#pragma once

// Experiment driver: offline evaluation rows (association-threshold sweeps,
// trigger-window comparisons), deterministic report files, table rendering,
// overlay dumps, and the CLI entry point.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egohoi/cascade.hpp"
#include "egohoi/dataset.hpp"
#include "egohoi/metrics.hpp"

namespace egohoi {

struct ExperimentConfig {
    std::filesystem::path corpus;
    std::vector<std::string> videos;    // empty: every video in the corpus
    std::string recognizer = "oracle";  // oracle | scripted[:k=v,...] | external:tcp:...|stdio:...
    std::string detector = "scripted";  // scripted[:k=v,...] | external:...
    std::vector<double> iou_thresholds = {0.01};
    std::vector<std::string> windows = {"oracle"};  // "oracle" or a frame count
    std::vector<double> pap_threshold_seconds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double recognizer_threshold = 0.5;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

struct RowTiming {
    std::int64_t frames = 0;
    std::int64_t od_invocations = 0;
    std::int64_t detector_calls = 0;
    double recognizer_us_mean = 0.0;
    double detector_us_mean = 0.0;
};

struct EvalRow {
    std::string label;
    std::string window;
    double iou_threshold = 0.0;
    HoiApReport hoi;
    PapReport pap;
    RowTiming timing;
    std::vector<std::pair<std::string, std::vector<InteractionEvent>>> events_per_video;
};

struct EvalResults {
    ExperimentConfig config;
    std::vector<EvalRow> rows;
};

// Backend construction from a spec string; ConfigError on bad syntax,
// BackendError when an external endpoint cannot be reached.
std::unique_ptr<Recognizer> build_recognizer(const std::string& spec,
                                             const VideoGroundTruth& video,
                                             double recognizer_threshold, std::uint64_t seed);
std::unique_ptr<Detector> build_detector(const std::string& spec, const VideoGroundTruth& video,
                                         std::uint64_t seed);

// Window spec: "oracle" or a frame count >= 1.
CascadeConfig cascade_config_for(const std::string& window, double iou_threshold,
                                 double recognizer_threshold);

// Runs every (window x iou_threshold) row over the corpus. HOI AP follows
// the contact-frame protocol: the ground-truth index and the evaluated
// events are restricted to frames annotated with a contact-state hand.
EvalResults evaluate(const Corpus& corpus, const ExperimentConfig& config);

// Deterministic payloads: results.json + tables.txt (+ per-row event files).
// Measured timings go to timing.json, which is excluded from the
// byte-identity guarantee.
void write_results(const EvalResults& results, const std::filesystem::path& out_dir);

std::string render_tables(const EvalResults& results);

// report subcommand: re-render tables from a results directory; optionally
// dump per-frame overlay images (prediction vs GT, success/failure framing).
struct ReportOptions {
    std::filesystem::path results_dir;
    std::filesystem::path corpus;    // required for overlays
    std::filesystem::path overlays;  // empty: tables only
    std::size_t row = 0;
    std::size_t max_frames = 50;
};
int run_report(const ReportOptions& options);

int run_cli(int argc, const char* const* argv);

}  // namespace egohoi
