#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adstest/actions.hpp"

namespace adstest {

/// Raised for malformed routes, configs and command-line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]

  bool operator==(const Pose2D&) const = default;
};

/// Rectangle with `length` measured along `heading` and `width` across it.
struct OrientedBox {
  double cx = 0.0;
  double cy = 0.0;
  double heading = 0.0;
  double length = 1.0;
  double width = 1.0;

  bool operator==(const OrientedBox&) const = default;
};

struct VehicleState {
  Pose2D pose;
  double speed = 0.0;     // m/s, >= 0
  double accel = 0.0;     // m/s^2
  double throttle = 0.0;  // [0, 1]
  double steer = 0.0;     // [-1, 1], positive = left
  double length = 4.5;
  double width = 2.0;
  bool halted = false;  // stopped by a collision for the rest of the episode

  bool operator==(const VehicleState&) const = default;
};

struct PedestrianState {
  Pose2D pose;
  double speed = 0.0;  // [0, 3]
  double radius = 0.4;

  bool operator==(const PedestrianState&) const = default;
};

struct Weather {
  double fog = 0.0;            // [0, 1]
  double rain = 0.0;           // [0, 1]
  double sun_altitude = 60.0;  // degrees, [-90, 90]

  bool operator==(const Weather&) const = default;
};

struct TrafficControl {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
  std::int64_t red_start = 0;  // inclusive tick range
  std::int64_t red_end = 0;

  bool operator==(const TrafficControl&) const = default;
};

enum class RouteId { kStraight, kLeftTurn, kRightTurn };

std::string_view to_string(RouteId id);
RouteId parse_route_id(std::string_view text);

struct RouteSpec {
  RouteId id = RouteId::kStraight;
  std::vector<Pose2D> centerline;
  double lane_half_width = 1.75;
  std::vector<OrientedBox> obstacles;
  Pose2D ev_start;
  Pose2D vif_start;
  Pose2D ped_start;
  Pose2D destination;
  std::optional<TrafficControl> traffic_control;
  double route_length = 0.0;

  bool operator==(const RouteSpec&) const = default;
};

/// Position of a point relative to the route centerline.
struct PathCoord {
  double s = 0.0;        // arc length of the closest centerline point (may leave [0, L] past the ends)
  double lateral = 0.0;  // signed offset, positive on the left of travel direction
  double path_heading = 0.0;
};

/// Validated route with precomputed arc lengths.
class Route {
 public:
  explicit Route(RouteSpec spec);

  const RouteSpec& spec() const { return spec_; }
  double length() const { return cumulative_.back(); }

  PathCoord project(double x, double y) const;
  Pose2D point_at(double s) const;  // extrapolates linearly past both ends

 private:
  RouteSpec spec_;
  std::vector<double> cumulative_;
};

/// Builds one of the three embedded scenarios.
RouteSpec builtin_route(RouteId id);
std::shared_ptr<const Route> make_route(RouteSpec spec);
std::shared_ptr<const Route> builtin(RouteId id);

/// Constants of the scripted driving stack and the actor dynamics.
struct SimParams {
  double dt = 0.1;
  double wheelbase = 2.7;
  double max_steer_angle = 0.6;  // rad at |steer| = 1

  // ADS under test.
  double target_speed = 8.0;
  double lookahead = 6.0;
  double perception_range = 40.0;  // R0, clear weather
  double brake_decel = 6.0;        // a0, dry road
  double brake_margin = 2.0;
  double throttle_accel = 3.0;
  double speed_gain = 0.5;
  double glare_threshold_deg = 10.0;
  double glare_factor = 0.6;

  // Vehicle in front: agent sets throttle (speed setpoint) and a steering bias
  // that is added to its own lane keeping.
  double vif_max_speed = 12.0;
  double vif_speed_gain = 1.0;
  double vif_max_accel = 3.0;
  double vif_max_decel = 6.0;
  double vif_lookahead = 10.0;
  double vif_initial_throttle = 0.65;

  bool operator==(const SimParams&) const = default;
};

struct WorldState {
  VehicleState ev;
  VehicleState vif;
  PedestrianState ped;
  Weather weather;
  std::shared_ptr<const Route> route;
  std::int64_t tick = 0;
  double dt = 0.1;
  SimParams params;

  const RouteSpec& route_spec() const { return route->spec(); }
  bool operator==(const WorldState& other) const;
};

struct EvCommand {
  double throttle = 0.0;
  double brake = 0.0;
  double steer = 0.0;

  bool operator==(const EvCommand&) const = default;
};

WorldState reset_scenario(std::shared_ptr<const Route> route, const SimParams& params = {});

/// Applies one perturbation, clamping the touched variable to its range.
WorldState apply_action(WorldState world, ActionId action);

/// Effective perception range after fog and sun glare.
double perception_range(const Weather& weather, const SimParams& params);
double braking_decel(const Weather& weather, const SimParams& params);

/// Deterministic stand-in for the driving stack under test.
EvCommand ads_control(const WorldState& world);

/// One fixed-step update of every actor.
WorldState simulate_tick(WorldState world, const EvCommand& ev_cmd);

OrientedBox footprint(const VehicleState& v);
OrientedBox footprint(const PedestrianState& p);

/// Separating-axis test; touching boxes intersect.
bool obb_intersects(const OrientedBox& a, const OrientedBox& b);

/// Center distance minus the inscribed radius (half width) of each body.
double center_distance(const OrientedBox& a, const OrientedBox& b);
double center_distance(const VehicleState& a, const VehicleState& b);
double center_distance(const VehicleState& a, const PedestrianState& p);

/// Progress of a point along the route clamped to [0, L].
double route_progress(const Route& route, double x, double y);

}  // namespace adstest
