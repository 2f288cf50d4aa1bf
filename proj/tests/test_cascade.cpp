#include <doctest.h>

#include <set>

#include "egohoi/backends.hpp"
#include "egohoi/cascade.hpp"
#include "egohoi/dataset.hpp"
#include "egohoi/error.hpp"
#include "egohoi/rng.hpp"

using namespace egohoi;

namespace {

ContactPrediction contact(std::int64_t f, double conf = 1.0) {
    return ContactPrediction{f, conf, ContactLabel::Contact};
}
ContactPrediction background(std::int64_t f) {
    return ContactPrediction{f, 0.0, ContactLabel::Background};
}

HandInstance make_hand(double conf = 1.0) {
    return HandInstance{Detection::hand(BBox{0, 0, 10, 10}, conf), Side::Left};
}

// Detector driven by a per-frame script of detection lists.
class MapDetector final : public Detector {
public:
    std::map<std::int64_t, std::vector<Detection>> script;
    std::vector<std::int64_t> invoked;

private:
    std::vector<Detection> do_detect(const Frame& f) override {
        invoked.push_back(f.frame_index);
        const auto it = script.find(f.frame_index);
        return it == script.end() ? std::vector<Detection>{} : it->second;
    }
};

class MapRecognizer final : public Recognizer {
public:
    std::set<std::int64_t> positives;

    ContactPrediction feed(const Frame& f) override {
        return positives.count(f.frame_index) ? contact(f.frame_index)
                                              : background(f.frame_index);
    }
};

}  // namespace

TEST_CASE("trigger window fires on the current frame and across the trailing window") {
    TriggerWindow w(30);
    for (std::int64_t f = 70; f < 100; ++f) CHECK(w.push(background(f)) == TriggerDecision::Skip);
    CHECK(w.push(contact(100)) == TriggerDecision::InvokeOD);
    // Background pushes 101..130 still fire: the positive at 100 is inside
    // the preceding 30 frames.
    for (std::int64_t f = 101; f <= 130; ++f)
        CHECK(w.push(background(f)) == TriggerDecision::InvokeOD);
    // 131 - 100 = 31 > 30: out of window.
    CHECK(w.push(background(131)) == TriggerDecision::Skip);
}

TEST_CASE("trigger window rejects non-monotone streams") {
    TriggerWindow w(30);
    CHECK(w.push(background(10)) == TriggerDecision::Skip);
    CHECK_THROWS_AS(w.push(background(10)), StreamOrderError);
    CHECK_THROWS_AS(w.push(contact(5)), StreamOrderError);
    // Still usable afterwards.
    CHECK(w.push(contact(11)) == TriggerDecision::InvokeOD);
}

TEST_CASE("window minimum is one frame") {
    CHECK_THROWS_AS(TriggerWindow(0), ConfigError);
    CHECK_THROWS_AS(TriggerWindow(-3), ConfigError);
}

TEST_CASE("enlarging the window only adds InvokeOD frames") {
    DetRng rng(41);
    for (int round = 0; round < 100; ++round) {
        const int w_small = static_cast<int>(rng.uniform_int(1, 40));
        const int w_large = w_small + static_cast<int>(rng.uniform_int(1, 40));
        TriggerWindow small(w_small);
        TriggerWindow large(w_large);
        for (std::int64_t f = 0; f < 200; ++f) {
            const ContactPrediction p = rng.chance(0.1) ? contact(f) : background(f);
            const auto ds = small.push(p);
            const auto dl = large.push(p);
            if (ds == TriggerDecision::InvokeOD) CHECK(dl == TriggerDecision::InvokeOD);
        }
    }
}

TEST_CASE("replaying the same stream yields identical decisions") {
    DetRng seed_rng(42);
    std::vector<ContactPrediction> stream;
    for (std::int64_t f = 0; f < 300; ++f)
        stream.push_back(seed_rng.chance(0.07) ? contact(f) : background(f));

    std::vector<TriggerDecision> first, second;
    TriggerWindow w1(30), w2(30);
    for (const auto& p : stream) first.push_back(w1.push(p));
    for (const auto& p : stream) second.push_back(w2.push(p));
    CHECK(first == second);
}

TEST_CASE("fuse case table") {
    const std::vector<HandInstance> hands{make_hand(0.95)};

    // (a) contact + association: Contact event carrying the active object.
    ActiveObjectResult assoc;
    assoc.object = Detection::object(BBox{5, 5, 15, 15}, 3, 0.9);
    assoc.matched_hand = hands[0];
    assoc.hand_index = 0;
    assoc.iou = 0.25;
    const InteractionEvent a = fuse(contact(42, 0.95), hands, assoc);
    CHECK(a.frame_index == 42);
    CHECK(a.contact_state == ContactState::Contact);
    REQUIRE(a.active_object.has_value());
    CHECK(*a.active_object == assoc.object);
    CHECK(*a.matched_hand == 0);
    CHECK(a.source == EventSource::Fused);

    // (b) contact + no association: downgraded to NoContact, OdSuppressed.
    const InteractionEvent b = fuse(contact(43, 0.95), hands, std::nullopt);
    CHECK(b.contact_state == ContactState::NoContact);
    CHECK_FALSE(b.active_object.has_value());
    CHECK_FALSE(b.matched_hand.has_value());
    CHECK(b.source == EventSource::OdSuppressed);

    // (c) background input violates the contract: OD must not have run.
    CHECK_THROWS_AS(fuse(background(44), hands, std::nullopt), ContractViolation);
    CHECK_THROWS_AS(fuse(background(44), hands, assoc), ContractViolation);
}

TEST_CASE("fuse never emits an active object on a NoContact event") {
    DetRng rng(43);
    for (int round = 0; round < 100; ++round) {
        const std::vector<HandInstance> hands{make_hand()};
        std::optional<ActiveObjectResult> assoc;
        if (rng.chance(0.5)) {
            ActiveObjectResult r;
            r.object = Detection::object(BBox{0, 0, 4, 4}, 1, 1.0);
            r.matched_hand = hands[0];
            r.hand_index = 0;
            r.iou = 0.5;
            assoc = r;
        }
        const InteractionEvent ev = fuse(contact(round), hands, assoc);
        if (ev.contact_state == ContactState::NoContact) {
            CHECK_FALSE(ev.active_object.has_value());
        }
        if (ev.active_object.has_value()) {
            CHECK(ev.contact_state == ContactState::Contact);
            CHECK(ev.matched_hand.has_value());
        }
    }
}

TEST_CASE("OD runs exactly on triggered frames and never without an in-window contact") {
    // Synthetic 400-frame video, no annotations needed for window mode.
    VideoGroundTruth video;
    video.info = VideoInfo{"t", 400, 30.0, ImageGeometry{640, 480}, std::nullopt};

    MapRecognizer recognizer;
    recognizer.positives = {50, 51, 140, 333};
    MapDetector detector;

    CascadeConfig cfg;
    cfg.trigger = TriggerMode::Window;
    cfg.window_frames = 30;

    const RunResult result = run_offline(video, &recognizer, detector, cfg);

    CHECK(detector.calls() == static_cast<std::int64_t>(detector.invoked.size()));
    CHECK(result.detector_calls == detector.calls());
    CHECK(result.events.size() == detector.invoked.size());
    CHECK(result.timing.od_invocations == detector.calls());

    // Every invocation has a positive within the trailing window.
    for (const std::int64_t f : detector.invoked) {
        bool in_window = false;
        for (const std::int64_t p : recognizer.positives)
            if (p <= f && f - p <= 30) in_window = true;
        CHECK(in_window);
    }
    // And every in-window frame was invoked.
    std::int64_t expected = 0;
    for (std::int64_t f = 0; f < 400; ++f) {
        for (const std::int64_t p : recognizer.positives)
            if (p <= f && f - p <= 30) {
                ++expected;
                break;
            }
    }
    CHECK(static_cast<std::int64_t>(detector.invoked.size()) == expected);

    // Deterministic replay.
    MapRecognizer recognizer2;
    recognizer2.positives = recognizer.positives;
    MapDetector detector2;
    const RunResult result2 = run_offline(video, &recognizer2, detector2, cfg);
    CHECK(result2.events == result.events);
    CHECK(result2.predictions == result.predictions);
}

TEST_CASE("windowed trigger fuses the carried-over contact state with the current detections") {
    VideoGroundTruth video;
    video.info = VideoInfo{"t", 60, 30.0, ImageGeometry{640, 480}, std::nullopt};

    MapRecognizer recognizer;
    recognizer.positives = {10};
    MapDetector detector;
    // Hand + overlapping object on every frame.
    for (std::int64_t f = 0; f < 60; ++f)
        detector.script[f] = {Detection::hand(BBox{0, 0, 100, 100}, 0.9),
                              Detection::object(BBox{50, 50, 150, 150}, 2, 0.8)};

    CascadeConfig cfg;
    cfg.window_frames = 5;
    const RunResult result = run_offline(video, &recognizer, detector, cfg);

    REQUIRE(result.events.size() == 6);  // frames 10..15
    for (std::size_t i = 0; i < result.events.size(); ++i) {
        const InteractionEvent& ev = result.events[i];
        CHECK(ev.frame_index == 10 + static_cast<std::int64_t>(i));
        CHECK(ev.contact_state == ContactState::Contact);
        REQUIRE(ev.active_object.has_value());
        CHECK(ev.active_object->class_id == 2);
        REQUIRE(ev.hands.size() == 1);
        CHECK(ev.hands[0].side == Side::Left);
        CHECK(ev.source == EventSource::Fused);
    }
}

TEST_CASE("oracle trigger invokes OD exactly on contact-state frames") {
    const SynthSpec spec{.videos = 1, .frames_per_video = 120, .events_per_video = 3, .seed = 7};
    const Corpus corpus = synth_corpus(spec);
    const VideoGroundTruth& video = corpus.videos[0];

    auto recognizer = make_oracle_recognizer(video);
    MapDetector detector;

    CascadeConfig cfg;
    cfg.trigger = TriggerMode::Oracle;
    const RunResult result = run_offline(video, recognizer.get(), detector, cfg);

    const std::vector<std::int64_t> invoked(detector.invoked.begin(), detector.invoked.end());
    CHECK(invoked == video.contact_state_frames);
    CHECK(result.events.size() == video.contact_state_frames.size());
}

TEST_CASE("backend failures carry frame context") {
    VideoGroundTruth video;
    video.info = VideoInfo{"t", 20, 30.0, ImageGeometry{640, 480}, std::nullopt};

    class ThrowingDetector final : public Detector {
        std::vector<Detection> do_detect(const Frame& f) override {
            throw BackendError("model exploded", f.frame_index);
        }
    };

    MapRecognizer recognizer;
    recognizer.positives = {4};
    ThrowingDetector detector;
    CascadeConfig cfg;
    try {
        run_offline(video, &recognizer, detector, cfg);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        REQUIRE(e.frame().has_value());
        CHECK(*e.frame() == 4);
    }
}
