#include "adstest/microworld.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace adstest {

namespace {

constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x;
  double y;
};

Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Pure-pursuit steering angle toward the centerline point `lookahead` ahead.
double pure_pursuit_angle(const Route& route, const VehicleState& v, double lookahead,
                          double wheelbase) {
  const PathCoord c = route.project(v.pose.x, v.pose.y);
  const Pose2D target = route.point_at(c.s + lookahead);
  const double dx = target.x - v.pose.x;
  const double dy = target.y - v.pose.y;
  const double ld = std::hypot(dx, dy);
  if (ld < 1e-9) return 0.0;
  const double alpha = normalize_angle(std::atan2(dy, dx) - v.pose.heading);
  return std::atan2(2.0 * wheelbase * std::sin(alpha), ld);
}

// Kinematic bicycle about the body center, explicit Euler.
void integrate_bicycle(VehicleState& v, double steer_angle, double accel, double dt,
                       double wheelbase) {
  const double rear = 0.5 * wheelbase;
  const double slip = std::atan(0.5 * std::tan(steer_angle));
  v.pose.x += v.speed * std::cos(v.pose.heading + slip) * dt;
  v.pose.y += v.speed * std::sin(v.pose.heading + slip) * dt;
  v.pose.heading = normalize_angle(v.pose.heading + (v.speed / rear) * std::sin(slip) * dt);
  v.speed = std::max(0.0, v.speed + accel * dt);
}

std::array<Vec2, 4> corners(const OrientedBox& b) {
  const double c = std::cos(b.heading);
  const double s = std::sin(b.heading);
  const double hl = 0.5 * b.length;
  const double hw = 0.5 * b.width;
  const Vec2 ax{c * hl, s * hl};
  const Vec2 ay{-s * hw, c * hw};
  return {{{b.cx + ax.x + ay.x, b.cy + ax.y + ay.y},
           {b.cx + ax.x - ay.x, b.cy + ax.y - ay.y},
           {b.cx - ax.x - ay.x, b.cy - ax.y - ay.y},
           {b.cx - ax.x + ay.x, b.cy - ax.y + ay.y}}};
}

}  // namespace

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

std::string_view to_string(RouteId id) {
  switch (id) {
    case RouteId::kStraight:
      return "straight";
    case RouteId::kLeftTurn:
      return "left_turn";
    case RouteId::kRightTurn:
      return "right_turn";
  }
  return "straight";
}

RouteId parse_route_id(std::string_view text) {
  if (text == "straight") return RouteId::kStraight;
  if (text == "left_turn") return RouteId::kLeftTurn;
  if (text == "right_turn") return RouteId::kRightTurn;
  throw ConfigError("unknown route id '" + std::string(text) + "'");
}

Route::Route(RouteSpec spec) : spec_(std::move(spec)) {
  const auto& pts = spec_.centerline;
  if (pts.size() < 2) throw ConfigError("route centerline needs at least 2 waypoints");
  if (!(spec_.lane_half_width > 0.0)) throw ConfigError("lane_half_width must be positive");
  cumulative_.reserve(pts.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double seg = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    if (!(seg > 0.0)) throw ConfigError("route waypoints must be strictly increasing in arc length");
    cumulative_.push_back(cumulative_.back() + seg);
  }
  for (const auto& o : spec_.obstacles) {
    if (!(o.length > 0.0 && o.width > 0.0)) throw ConfigError("obstacle extents must be positive");
  }
  if (spec_.route_length > 0.0 && std::abs(spec_.route_length - length()) > 1e-6) {
    throw ConfigError("route_length does not match centerline arc length");
  }
  spec_.route_length = length();
  spec_.destination = pts.back();
  const double s_ev = project(spec_.ev_start.x, spec_.ev_start.y).s;
  const double s_vif = project(spec_.vif_start.x, spec_.vif_start.y).s;
  if (!(s_vif > s_ev)) throw ConfigError("vif_start must lie ahead of ev_start");
}

PathCoord Route::project(double x, double y) const {
  const auto& pts = spec_.centerline;
  const Vec2 p{x, y};
  const std::size_t nseg = pts.size() - 1;
  double best_d2 = std::numeric_limits<double>::infinity();
  PathCoord best;
  for (std::size_t i = 0; i < nseg; ++i) {
    const Vec2 a{pts[i].x, pts[i].y};
    const Vec2 d = Vec2{pts[i + 1].x, pts[i + 1].y} - a;
    const double len2 = dot(d, d);
    double t = dot(p - a, d) / len2;
    if (i > 0) t = std::max(t, 0.0);
    if (i + 1 < nseg) t = std::min(t, 1.0);
    const Vec2 q{a.x + t * d.x, a.y + t * d.y};
    const Vec2 r = p - q;
    const double d2 = dot(r, r);
    if (d2 < best_d2) {
      best_d2 = d2;
      const double len = std::sqrt(len2);
      best.s = cumulative_[i] + t * len;
      best.lateral = cross(d, r) / len;
      best.path_heading = std::atan2(d.y, d.x);
    }
  }
  return best;
}

Pose2D Route::point_at(double s) const {
  const auto& pts = spec_.centerline;
  std::size_t i = 0;
  if (s >= cumulative_.back()) {
    i = pts.size() - 2;
  } else if (s > 0.0) {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  }
  const double len = cumulative_[i + 1] - cumulative_[i];
  const double t = (s - cumulative_[i]) / len;
  const double hx = pts[i + 1].x - pts[i].x;
  const double hy = pts[i + 1].y - pts[i].y;
  return {pts[i].x + t * hx, pts[i].y + t * hy, std::atan2(hy, hx)};
}

std::shared_ptr<const Route> make_route(RouteSpec spec) {
  return std::make_shared<const Route>(std::move(spec));
}

std::shared_ptr<const Route> builtin(RouteId id) { return make_route(builtin_route(id)); }

bool WorldState::operator==(const WorldState& o) const {
  const bool same_route = route == o.route || (route && o.route && route->spec() == o.route->spec());
  return same_route && ev == o.ev && vif == o.vif && ped == o.ped && weather == o.weather &&
         tick == o.tick && dt == o.dt && params == o.params;
}

WorldState reset_scenario(std::shared_ptr<const Route> route, const SimParams& params) {
  if (!route) throw ConfigError("reset_scenario: null route");
  const RouteSpec& spec = route->spec();
  WorldState w;
  w.params = params;
  w.dt = params.dt;
  w.ev.pose = spec.ev_start;
  w.vif.pose = spec.vif_start;
  w.vif.throttle = params.vif_initial_throttle;
  w.ped.pose = spec.ped_start;
  w.weather = Weather{};
  w.route = std::move(route);
  return w;
}

WorldState apply_action(WorldState w, ActionId action) {
  const ActionEffect& e = effect_of(action);
  switch (e.variable) {
    case ControlledVariable::kVifThrottle:
      w.vif.throttle = clamp01(w.vif.throttle + e.delta);
      break;
    case ControlledVariable::kVifSteer:
      w.vif.steer = std::clamp(w.vif.steer + e.delta, -1.0, 1.0);
      break;
    case ControlledVariable::kPedSpeed:
      w.ped.speed = std::clamp(w.ped.speed + e.delta, 0.0, 3.0);
      break;
    case ControlledVariable::kPedX:
      w.ped.pose.x += e.delta;
      break;
    case ControlledVariable::kPedY:
      w.ped.pose.y += e.delta;
      break;
    case ControlledVariable::kFog:
      w.weather.fog = clamp01(w.weather.fog + e.delta);
      break;
    case ControlledVariable::kRain:
      w.weather.rain = clamp01(w.weather.rain + e.delta);
      break;
    case ControlledVariable::kSunAltitude:
      w.weather.sun_altitude = std::clamp(w.weather.sun_altitude + e.delta, -90.0, 90.0);
      break;
    case ControlledVariable::kNone:
      break;
  }
  return w;
}

double perception_range(const Weather& weather, const SimParams& p) {
  const double glare = weather.sun_altitude < p.glare_threshold_deg ? p.glare_factor : 1.0;
  return p.perception_range * (1.0 - 0.7 * weather.fog) * glare;
}

double braking_decel(const Weather& weather, const SimParams& p) {
  return p.brake_decel * (1.0 - 0.5 * weather.rain);
}

EvCommand ads_control(const WorldState& w) {
  const Route& route = *w.route;
  const RouteSpec& spec = route.spec();
  const SimParams& p = w.params;
  const VehicleState& ev = w.ev;

  EvCommand cmd;
  const double delta = pure_pursuit_angle(route, ev, p.lookahead, p.wheelbase);
  cmd.steer = std::clamp(delta / p.max_steer_angle, -1.0, 1.0);

  const PathCoord self = route.project(ev.pose.x, ev.pose.y);
  const double range = perception_range(w.weather, p);
  const double decel = braking_decel(w.weather, p);
  const double envelope = ev.speed * ev.speed / (2.0 * decel) + p.brake_margin;
  const double w_detect = spec.lane_half_width;

  bool brake = false;
  auto consider = [&](double x, double y, double half_extent) {
    const PathCoord c = route.project(x, y);
    const double ahead = c.s - self.s;
    if (ahead <= 0.0 || ahead > range) return;
    if (std::abs(c.lateral) > w_detect) return;
    const double gap = ahead - 0.5 * ev.length - half_extent;
    if (gap <= envelope) brake = true;
  };

  consider(w.vif.pose.x, w.vif.pose.y, 0.5 * w.vif.length);
  consider(w.ped.pose.x, w.ped.pose.y, w.ped.radius);
  for (const auto& o : spec.obstacles) consider(o.cx, o.cy, 0.5 * std::max(o.length, o.width));

  if (spec.traffic_control) {
    const TrafficControl& tc = *spec.traffic_control;
    if (w.tick >= tc.red_start && w.tick <= tc.red_end) {
      const double stop_line = route.project(tc.cx, tc.cy).s - tc.radius;
      const double to_line = stop_line - self.s;
      const double gap = to_line - 0.5 * ev.length;
      // Once the front bumper is past the line the vehicle clears the zone.
      if (gap > -0.5 && to_line <= range && gap <= envelope) brake = true;
    }
  }

  if (brake) {
    cmd.throttle = 0.0;
    cmd.brake = 1.0;
  } else {
    const double err = p.target_speed - ev.speed;
    cmd.throttle = std::clamp(p.speed_gain * err, 0.0, 1.0);
    cmd.brake = std::clamp(-p.speed_gain * err, 0.0, 1.0);
  }
  return cmd;
}

OrientedBox footprint(const VehicleState& v) {
  return {v.pose.x, v.pose.y, v.pose.heading, v.length, v.width};
}

OrientedBox footprint(const PedestrianState& p) {
  return {p.pose.x, p.pose.y, p.pose.heading, 2.0 * p.radius, 2.0 * p.radius};
}

bool obb_intersects(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = corners(a);
  const auto cb = corners(b);
  const std::array<double, 2> headings{a.heading, b.heading};
  for (double h : headings) {
    const std::array<Vec2, 2> axes{Vec2{std::cos(h), std::sin(h)}, Vec2{-std::sin(h), std::cos(h)}};
    for (const Vec2& axis : axes) {
      double amin = std::numeric_limits<double>::infinity();
      double amax = -amin;
      double bmin = amin;
      double bmax = -amin;
      for (const Vec2& c : ca) {
        const double t = dot(c, axis);
        amin = std::min(amin, t);
        amax = std::max(amax, t);
      }
      for (const Vec2& c : cb) {
        const double t = dot(c, axis);
        bmin = std::min(bmin, t);
        bmax = std::max(bmax, t);
      }
      if (amax < bmin || bmax < amin) return false;
    }
  }
  return true;
}

double center_distance(const OrientedBox& a, const OrientedBox& b) {
  const double d = std::hypot(a.cx - b.cx, a.cy - b.cy);
  return d - 0.5 * std::min(a.length, a.width) - 0.5 * std::min(b.length, b.width);
}

double center_distance(const VehicleState& a, const VehicleState& b) {
  return std::hypot(a.pose.x - b.pose.x, a.pose.y - b.pose.y) - 0.5 * a.width - 0.5 * b.width;
}

double center_distance(const VehicleState& a, const PedestrianState& p) {
  return std::hypot(a.pose.x - p.pose.x, a.pose.y - p.pose.y) - 0.5 * a.width - p.radius;
}

double route_progress(const Route& route, double x, double y) {
  return std::clamp(route.project(x, y).s, 0.0, route.length());
}

WorldState simulate_tick(WorldState w, const EvCommand& ev_cmd) {
  const SimParams& p = w.params;
  const double dt = w.dt;
  const Route& route = *w.route;
  const RouteSpec& spec = route.spec();

  const double ev_speed0 = w.ev.speed;
  const double vif_speed0 = w.vif.speed;

  w.ev.throttle = clamp01(ev_cmd.throttle);
  w.ev.steer = std::clamp(ev_cmd.steer, -1.0, 1.0);
  if (!w.ev.halted) {
    const double brake = clamp01(ev_cmd.brake);
    const double accel = p.throttle_accel * w.ev.throttle - braking_decel(w.weather, p) * brake;
    integrate_bicycle(w.ev, w.ev.steer * p.max_steer_angle, accel, dt, p.wheelbase);
  }

  if (!w.vif.halted) {
    const double lane_keep = pure_pursuit_angle(route, w.vif, p.vif_lookahead, p.wheelbase);
    const double angle = std::clamp(lane_keep + w.vif.steer * p.max_steer_angle,
                                    -p.max_steer_angle, p.max_steer_angle);
    const double setpoint = w.vif.throttle * p.vif_max_speed;
    const double accel =
        std::clamp(p.vif_speed_gain * (setpoint - w.vif.speed), -p.vif_max_decel, p.vif_max_accel);
    integrate_bicycle(w.vif, angle, accel, dt, p.wheelbase);
  }

  w.ped.pose.x += w.ped.speed * std::cos(w.ped.pose.heading) * dt;
  w.ped.pose.y += w.ped.speed * std::sin(w.ped.pose.heading) * dt;

  const OrientedBox ev_box = footprint(w.ev);
  const OrientedBox vif_box = footprint(w.vif);
  const OrientedBox ped_box = footprint(w.ped);

  for (const auto& o : spec.obstacles) {
    if (!w.vif.halted && obb_intersects(vif_box, o)) w.vif.halted = true;
    if (!w.ev.halted && obb_intersects(ev_box, o)) w.ev.halted = true;
  }
  if (obb_intersects(ev_box, vif_box)) {
    w.ev.halted = true;
    w.vif.halted = true;
  }
  if (obb_intersects(ev_box, ped_box)) {
    w.ev.halted = true;
    w.ped.speed = 0.0;
  }
  if (w.ev.halted) w.ev.speed = 0.0;
  if (w.vif.halted) w.vif.speed = 0.0;

  w.ev.accel = (w.ev.speed - ev_speed0) / dt;
  w.vif.accel = (w.vif.speed - vif_speed0) / dt;
  w.tick += 1;
  return w;
}

}  // namespace adstest
