#pragma once

// JSON conversions shared by the corpus loader, the wire protocol, the HTTP
// service and the report writers. One canonical encoding everywhere.

#include <json.hpp>

#include "egohoi/dataset.hpp"
#include "egohoi/events.hpp"
#include "egohoi/geometry.hpp"

namespace egohoi {

using json = nlohmann::json;

void to_json(json& j, const BBox& b);
void from_json(const json& j, BBox& b);

void to_json(json& j, const Detection& d);
void from_json(const json& j, Detection& d);

void to_json(json& j, const HandInstance& h);
void from_json(const json& j, HandInstance& h);

void to_json(json& j, const GtHand& h);
void from_json(const json& j, GtHand& h);

void to_json(json& j, const GtActiveObject& o);
void from_json(const json& j, GtActiveObject& o);

void to_json(json& j, const InteractionEvent& e);
void from_json(const json& j, InteractionEvent& e);

void to_json(json& j, const ContactPrediction& p);
void from_json(const json& j, ContactPrediction& p);

void to_json(json& j, const VideoInfo& v);
void from_json(const json& j, VideoInfo& v);

}  // namespace egohoi
