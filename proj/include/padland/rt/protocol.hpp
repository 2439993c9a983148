// Line-delimited transport between the detector side and the controller.
//
// Detection event, one per frame:
//   frameId timestamp xmin ymin xmax ymax height gimbalPitch speed
// Reals are fixed 6-decimal; an absent bounding box is written as four `-`
// placeholders. The 6-decimal form is the canonical serialization:
// parse(serialize(parse(x))) == parse(x) for every valid line.
//
// Command, one per consumed event:
//   frameId pitch roll yaw throttle gimbalPitch
// Same 6-decimal fixed format, newline terminated.
#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "padland/action.hpp"
#include "padland/geometry.hpp"
#include "padland/result.hpp"

namespace padland::rt {

struct DetectionEvent {
  std::int64_t frameId = 0;
  double timestampS = 0.0;
  std::optional<geom::BoundingBox> bbox;
  geom::VehicleState vehicle;
};

struct CommandRecord {
  std::int64_t frameId = 0;
  ControlAction action;
  double gimbalPitchDeg = 0.0;
};

namespace detail {

inline std::vector<std::string_view> splitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ') ++end;
    if (end > pos) fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

inline bool parseDouble(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

inline bool parseInt64(std::string_view token, std::int64_t& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace detail

inline std::string format_detection_event(const DetectionEvent& e) {
  char buf[320];
  if (e.bbox.has_value()) {
    std::snprintf(buf, sizeof(buf), "%lld %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f",
                  static_cast<long long>(e.frameId), e.timestampS, e.bbox->xmin, e.bbox->ymin,
                  e.bbox->xmax, e.bbox->ymax, e.vehicle.heightM, e.vehicle.gimbalPitchDeg,
                  e.vehicle.speedMps);
  } else {
    std::snprintf(buf, sizeof(buf), "%lld %.6f - - - - %.6f %.6f %.6f",
                  static_cast<long long>(e.frameId), e.timestampS, e.vehicle.heightM,
                  e.vehicle.gimbalPitchDeg, e.vehicle.speedMps);
  }
  return std::string(buf);
}

inline Result<DetectionEvent> parse_detection_event(std::string_view line) {
  const auto fields = detail::splitFields(line);
  if (fields.size() != 9)
    return Result<DetectionEvent>::failure("detection event: expected 9 fields, got " +
                                           std::to_string(fields.size()));
  DetectionEvent e;
  if (!detail::parseInt64(fields[0], e.frameId))
    return Result<DetectionEvent>::failure("detection event: bad frameId '" +
                                           std::string(fields[0]) + "'");
  if (!detail::parseDouble(fields[1], e.timestampS))
    return Result<DetectionEvent>::failure("detection event: bad timestamp '" +
                                           std::string(fields[1]) + "'");

  const bool absent = fields[2] == "-" || fields[3] == "-" || fields[4] == "-" || fields[5] == "-";
  if (absent) {
    for (int i = 2; i <= 5; ++i)
      if (fields[i] != "-")
        return Result<DetectionEvent>::failure(
            "detection event: mixed absent/present bbox fields");
  } else {
    geom::BoundingBox box;
    static constexpr const char* names[4] = {"xmin", "ymin", "xmax", "ymax"};
    double* slots[4] = {&box.xmin, &box.ymin, &box.xmax, &box.ymax};
    for (int i = 0; i < 4; ++i) {
      if (!detail::parseDouble(fields[2 + i], *slots[i]))
        return Result<DetectionEvent>::failure(std::string("detection event: bad ") + names[i] +
                                               " '" + std::string(fields[2 + i]) + "'");
    }
    if (box.degenerate())
      return Result<DetectionEvent>::failure("detection event: degenerate bounding box");
    e.bbox = box;
  }
  if (!detail::parseDouble(fields[6], e.vehicle.heightM))
    return Result<DetectionEvent>::failure("detection event: bad height '" +
                                           std::string(fields[6]) + "'");
  if (!detail::parseDouble(fields[7], e.vehicle.gimbalPitchDeg))
    return Result<DetectionEvent>::failure("detection event: bad gimbalPitch '" +
                                           std::string(fields[7]) + "'");
  if (!detail::parseDouble(fields[8], e.vehicle.speedMps))
    return Result<DetectionEvent>::failure("detection event: bad speed '" +
                                           std::string(fields[8]) + "'");
  return e;
}

inline std::string format_command(const ControlAction& action, double gimbalPitchDeg,
                                  std::int64_t frameId) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%lld %.6f %.6f %.6f %.6f %.6f",
                static_cast<long long>(frameId), action.pitch, action.roll, action.yaw,
                action.throttle, gimbalPitchDeg);
  return std::string(buf);
}

inline Result<CommandRecord> parse_command(std::string_view line) {
  const auto fields = detail::splitFields(line);
  if (fields.size() != 6)
    return Result<CommandRecord>::failure("command: expected 6 fields, got " +
                                          std::to_string(fields.size()));
  CommandRecord c;
  if (!detail::parseInt64(fields[0], c.frameId))
    return Result<CommandRecord>::failure("command: bad frameId");
  double* slots[5] = {&c.action.pitch, &c.action.roll, &c.action.yaw, &c.action.throttle,
                      &c.gimbalPitchDeg};
  static constexpr const char* names[5] = {"pitch", "roll", "yaw", "throttle", "gimbalPitch"};
  for (int i = 0; i < 5; ++i) {
    if (!detail::parseDouble(fields[1 + i], *slots[i]))
      return Result<CommandRecord>::failure(std::string("command: bad ") + names[i]);
  }
  return c;
}

// Round-trips an event through its canonical serialization. The control loop
// consumes canonical events, which is what makes in-process and stream-fed
// command logs byte-identical.
inline DetectionEvent canonicalize(const DetectionEvent& e) {
  return parse_detection_event(format_detection_event(e)).value();
}

}  // namespace padland::rt
