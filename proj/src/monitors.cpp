#include "adstest/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace adstest {

std::string_view to_string(Requirement r) {
  switch (r) {
    case Requirement::kR1Dcl:
      return "R1_DCL";
    case Requirement::kR2Dv:
      return "R2_DV";
    case Requirement::kR3Dp:
      return "R3_DP";
    case Requirement::kR4Ds:
      return "R4_DS";
    case Requirement::kR5Dt:
      return "R5_DT";
    case Requirement::kR6Tr:
      return "R6_TR";
  }
  return "?";
}

Requirement parse_requirement(std::string_view text) {
  for (auto r : kAllRequirements) {
    if (to_string(r) == text) return r;
  }
  throw ConfigError("unknown requirement '" + std::string(text) + "'");
}

std::string_view to_string(DetectionMode m) {
  switch (m) {
    case DetectionMode::kSensor:
      return "sensor";
    case DetectionMode::kThreshold:
      return "threshold";
    case DetectionMode::kFused:
      return "fused";
  }
  return "?";
}

DetectionMode parse_detection_mode(std::string_view text) {
  if (text == "sensor") return DetectionMode::kSensor;
  if (text == "threshold") return DetectionMode::kThreshold;
  if (text == "fused") return DetectionMode::kFused;
  throw ConfigError("unknown detection mode '" + std::string(text) + "'");
}

DistanceVector compute_distances(const WorldState& w) {
  const Route& route = *w.route;
  const RouteSpec& spec = route.spec();
  DistanceVector d;
  const PathCoord c = route.project(w.ev.pose.x, w.ev.pose.y);
  d.dcl = std::abs(c.lateral);
  d.dv = center_distance(w.ev, w.vif);
  d.dp = center_distance(w.ev, w.ped);
  d.ds = std::numeric_limits<double>::infinity();
  const OrientedBox ev_box = footprint(w.ev);
  for (const auto& o : spec.obstacles) d.ds = std::min(d.ds, center_distance(ev_box, o));
  const double L = route.length();
  d.dt_norm = std::clamp((L - std::clamp(c.s, 0.0, L)) / L, 0.0, 1.0);
  if (spec.traffic_control) {
    const TrafficControl& tc = *spec.traffic_control;
    const bool red = w.tick >= tc.red_start && w.tick <= tc.red_end;
    const bool inside = std::hypot(w.ev.pose.x - tc.cx, w.ev.pose.y - tc.cy) <= tc.radius;
    d.tr_violated = red && inside && w.ev.speed > kTrafficSpeedTolerance;
  }
  return d;
}

SensorReadings read_sensors(const WorldState& w) {
  const Route& route = *w.route;
  const RouteSpec& spec = route.spec();
  SensorReadings s;
  const OrientedBox ev_box = footprint(w.ev);

  const double c = std::cos(ev_box.heading);
  const double sn = std::sin(ev_box.heading);
  const double hl = 0.5 * ev_box.length;
  const double hw = 0.5 * ev_box.width;
  for (double a : {hl, -hl}) {
    for (double b : {hw, -hw}) {
      const double x = ev_box.cx + a * c - b * sn;
      const double y = ev_box.cy + a * sn + b * c;
      if (std::abs(route.project(x, y).lateral) > spec.lane_half_width) s.lane_invasion = true;
    }
  }
  s.vif_collision = obb_intersects(ev_box, footprint(w.vif));
  s.ped_collision = obb_intersects(ev_box, footprint(w.ped));
  for (const auto& o : spec.obstacles) {
    if (obb_intersects(ev_box, o)) s.static_collision = true;
  }
  return s;
}

DistanceVector fuse_distances(const DistanceVector& d, const SensorReadings& s) {
  DistanceVector f = d;
  if (s.lane_invasion) f.dcl = std::max(f.dcl, kDclThreshold);
  if (s.vif_collision) f.dv = std::min(f.dv, kCollisionThreshold);
  if (s.ped_collision) f.dp = std::min(f.dp, kCollisionThreshold);
  if (s.static_collision) f.ds = std::min(f.ds, kCollisionThreshold);
  return f;
}

RequirementSet detect_violations(const SensorReadings& sensors, const DistanceVector& d,
                                 DetectionMode mode, bool episode_end) {
  RequirementSet out;
  auto by_threshold = [&](const DistanceVector& v) {
    if (v.dcl > kDclThreshold) out.insert(Requirement::kR1Dcl);
    if (v.dv <= kCollisionThreshold) out.insert(Requirement::kR2Dv);
    if (v.dp <= kCollisionThreshold) out.insert(Requirement::kR3Dp);
    if (v.ds <= kCollisionThreshold) out.insert(Requirement::kR4Ds);
  };
  auto by_sensor = [&] {
    if (sensors.lane_invasion) out.insert(Requirement::kR1Dcl);
    if (sensors.vif_collision) out.insert(Requirement::kR2Dv);
    if (sensors.ped_collision) out.insert(Requirement::kR3Dp);
    if (sensors.static_collision) out.insert(Requirement::kR4Ds);
  };

  switch (mode) {
    case DetectionMode::kThreshold:
      by_threshold(d);
      break;
    case DetectionMode::kSensor:
      by_sensor();
      break;
    case DetectionMode::kFused:
      // A forced distance sits exactly on its threshold and counts as reached.
      by_threshold(d);
      by_sensor();
      break;
  }
  if (episode_end && d.dt_norm > 0.0) out.insert(Requirement::kR5Dt);
  if (d.tr_violated) out.insert(Requirement::kR6Tr);
  return out;
}

RequirementSet detect_violations(const WorldState& world, const DistanceVector& d, DetectionMode mode,
                                 bool episode_end) {
  return detect_violations(read_sensors(world), d, mode, episode_end);
}

double reward(Requirement req, const DistanceVector& d, bool violated) {
  if (violated) return kViolationReward;
  auto inverse = [](double distance) { return 1.0 / std::max(distance, kDistanceFloor); };
  switch (req) {
    case Requirement::kR1Dcl: {
      const double dcl_norm = std::min(d.dcl / kDclThreshold, 1.0);
      return inverse(1.0 - dcl_norm);
    }
    case Requirement::kR2Dv:
      return inverse(d.dv);
    case Requirement::kR3Dp:
      return inverse(d.dp);
    case Requirement::kR4Ds:
      return inverse(d.ds);
    case Requirement::kR5Dt: {
      const double distance = 1.0 - d.dt_norm;
      if (distance <= 0.0) return kViolationReward;
      return inverse(distance);
    }
    case Requirement::kR6Tr:
      return 0.0;
  }
  return 0.0;
}

std::array<double, kNumRequirements> rewards(const DistanceVector& d, const RequirementSet& violated) {
  std::array<double, kNumRequirements> out{};
  for (auto r : kAllRequirements) out[index_of(r)] = reward(r, d, violated.contains(r));
  return out;
}

}  // namespace adstest
