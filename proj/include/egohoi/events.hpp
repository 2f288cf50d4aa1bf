#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "egohoi/geometry.hpp"

namespace egohoi {

// Per-frame output of a contact recognizer.
enum class ContactLabel { Background, Contact };

// Per-hand / per-event contact state.
enum class ContactState { NoContact, Contact };

enum class EventSource { Fused, OdSuppressed };

const char* to_string(ContactLabel l);
const char* to_string(ContactState s);
const char* to_string(EventSource s);
ContactState contact_state_from_string(const std::string& s);
EventSource event_source_from_string(const std::string& s);

struct ContactPrediction {
    std::int64_t frame_index = 0;
    double confidence = 0.0;
    ContactLabel label = ContactLabel::Background;

    bool operator==(const ContactPrediction&) const = default;
};

// The pipeline's output record for one OD-invoked frame.
// matched_hand indexes into `hands` and is present iff active_object is.
struct InteractionEvent {
    std::int64_t frame_index = 0;
    std::vector<HandInstance> hands;
    ContactState contact_state = ContactState::NoContact;
    std::optional<Detection> active_object;
    std::optional<std::size_t> matched_hand;
    EventSource source = EventSource::Fused;

    bool operator==(const InteractionEvent&) const = default;
};

// Ground-truth records.

struct GtHand {
    BBox box;
    Side side = Side::Left;
    ContactState state = ContactState::NoContact;

    bool operator==(const GtHand&) const = default;
};

struct GtActiveObject {
    BBox box;
    int class_id = 0;
    Side hand_side = Side::Left;  // link to the hand entry with this side

    bool operator==(const GtActiveObject&) const = default;
};

struct HoiFrameGT {
    std::int64_t frame_index = 0;
    std::vector<GtHand> hands;
    std::vector<GtActiveObject> active_objects;

    bool operator==(const HoiFrameGT&) const = default;
};

}  // namespace egohoi
