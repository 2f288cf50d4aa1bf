#include "egohoi/serialization.hpp"

#include "egohoi/error.hpp"

namespace egohoi {

const char* to_string(ContactLabel l) { return l == ContactLabel::Contact ? "contact" : "background"; }
const char* to_string(ContactState s) { return s == ContactState::Contact ? "contact" : "no_contact"; }
const char* to_string(EventSource s) { return s == EventSource::Fused ? "fused" : "od_suppressed"; }

ContactState contact_state_from_string(const std::string& s) {
    if (s == "contact") return ContactState::Contact;
    if (s == "no_contact") return ContactState::NoContact;
    throw std::invalid_argument("unknown contact state: " + s);
}

EventSource event_source_from_string(const std::string& s) {
    if (s == "fused") return EventSource::Fused;
    if (s == "od_suppressed") return EventSource::OdSuppressed;
    throw std::invalid_argument("unknown event source: " + s);
}

void to_json(json& j, const BBox& b) { j = json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

void from_json(const json& j, BBox& b) {
    if (!j.is_array() || j.size() != 4) throw json::type_error::create(302, "box must be [x_min,y_min,x_max,y_max]", &j);
    b = BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

void to_json(json& j, const Detection& d) {
    j = json{{"box", d.bbox},
             {"kind", to_string(d.kind)},
             {"class_id", d.class_id},
             {"confidence", d.confidence}};
}

void from_json(const json& j, Detection& d) {
    d.bbox = j.at("box").get<BBox>();
    d.kind = kind_from_string(j.at("kind").get<std::string>());
    d.class_id = j.at("class_id").get<int>();
    d.confidence = j.at("confidence").get<double>();
}

void to_json(json& j, const HandInstance& h) {
    j = json{{"box", h.detection.bbox},
             {"confidence", h.detection.confidence},
             {"side", to_string(h.side)}};
}

void from_json(const json& j, HandInstance& h) {
    h.detection = Detection::hand(j.at("box").get<BBox>(), j.at("confidence").get<double>());
    h.side = side_from_string(j.at("side").get<std::string>());
}

void to_json(json& j, const GtHand& h) {
    j = json{{"box", h.box}, {"side", to_string(h.side)}, {"state", to_string(h.state)}};
}

void from_json(const json& j, GtHand& h) {
    h.box = j.at("box").get<BBox>();
    h.side = side_from_string(j.at("side").get<std::string>());
    h.state = contact_state_from_string(j.at("state").get<std::string>());
}

void to_json(json& j, const GtActiveObject& o) {
    j = json{{"box", o.box}, {"class_id", o.class_id}, {"hand_side", to_string(o.hand_side)}};
}

void from_json(const json& j, GtActiveObject& o) {
    o.box = j.at("box").get<BBox>();
    o.class_id = j.at("class_id").get<int>();
    o.hand_side = side_from_string(j.at("hand_side").get<std::string>());
}

void to_json(json& j, const InteractionEvent& e) {
    j = json{{"frame_index", e.frame_index},
             {"hands", e.hands},
             {"contact_state", to_string(e.contact_state)},
             {"source", to_string(e.source)}};
    if (e.active_object) j["active_object"] = *e.active_object;
    if (e.matched_hand) j["matched_hand"] = *e.matched_hand;
}

void from_json(const json& j, InteractionEvent& e) {
    e.frame_index = j.at("frame_index").get<std::int64_t>();
    e.hands = j.at("hands").get<std::vector<HandInstance>>();
    e.contact_state = contact_state_from_string(j.at("contact_state").get<std::string>());
    e.source = event_source_from_string(j.at("source").get<std::string>());
    e.active_object.reset();
    e.matched_hand.reset();
    if (j.contains("active_object")) e.active_object = j.at("active_object").get<Detection>();
    if (j.contains("matched_hand")) e.matched_hand = j.at("matched_hand").get<std::size_t>();
}

void to_json(json& j, const ContactPrediction& p) {
    j = json{{"frame_index", p.frame_index},
             {"confidence", p.confidence},
             {"label", to_string(p.label)}};
}

void from_json(const json& j, ContactPrediction& p) {
    p.frame_index = j.at("frame_index").get<std::int64_t>();
    p.confidence = j.at("confidence").get<double>();
    const auto label = j.at("label").get<std::string>();
    if (label == "contact")
        p.label = ContactLabel::Contact;
    else if (label == "background")
        p.label = ContactLabel::Background;
    else
        throw std::invalid_argument("unknown contact label: " + label);
}

void to_json(json& j, const VideoInfo& v) {
    j = json{{"video_id", v.video_id},
             {"n_frames", v.n_frames},
             {"fps", v.fps},
             {"width", v.geometry.width},
             {"height", v.geometry.height}};
    if (v.frame_pattern) j["frame_pattern"] = *v.frame_pattern;
}

void from_json(const json& j, VideoInfo& v) {
    v.video_id = j.at("video_id").get<std::string>();
    v.n_frames = j.at("n_frames").get<std::int64_t>();
    v.fps = j.at("fps").get<double>();
    v.geometry = ImageGeometry{j.at("width").get<int>(), j.at("height").get<int>()};
    v.frame_pattern.reset();
    if (j.contains("frame_pattern")) v.frame_pattern = j.at("frame_pattern").get<std::string>();
}

}  // namespace egohoi
