#include <cmath>
#include <numbers>

#include "adstest/microworld.hpp"

namespace adstest {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRouteLength = 150.0;
constexpr double kArcSpacing = 1.0;

// Accumulates a centerline out of straight and circular pieces.
class CenterlineBuilder {
 public:
  explicit CenterlineBuilder(Pose2D start) : cur_(start) { pts_.push_back(cur_); }

  void straight(double length) {
    cur_.x += length * std::cos(cur_.heading);
    cur_.y += length * std::sin(cur_.heading);
    pts_.push_back(cur_);
    travelled_ += length;
  }

  // turn > 0 turns left.
  void arc(double radius, double turn) {
    const double total = radius * std::abs(turn);
    const int steps = static_cast<int>(std::ceil(total / kArcSpacing));
    const double side = turn > 0 ? 1.0 : -1.0;
    const double cx = cur_.x - side * radius * std::sin(cur_.heading);
    const double cy = cur_.y + side * radius * std::cos(cur_.heading);
    const double h0 = cur_.heading;
    for (int i = 1; i <= steps; ++i) {
      const double h = h0 + turn * static_cast<double>(i) / steps;
      cur_.x = cx + side * radius * std::sin(h);
      cur_.y = cy - side * radius * std::cos(h);
      cur_.heading = normalize_angle(h);
      pts_.push_back(cur_);
    }
    travelled_ += total;
  }

  void straight_to_total(double total) { straight(total - travelled_); }
  std::vector<Pose2D> take() { return std::move(pts_); }

 private:
  Pose2D cur_;
  std::vector<Pose2D> pts_;
  double travelled_ = 0.0;
};

// Point at `lateral` metres left of the travel direction at arc length `s`.
Pose2D offset_from(const Route& route, double s, double lateral, double heading_offset = 0.0) {
  const Pose2D c = route.point_at(s);
  return {c.x - lateral * std::sin(c.heading), c.y + lateral * std::cos(c.heading),
          normalize_angle(c.heading + heading_offset)};
}

OrientedBox roadside_box(const Route& route, double s, double lateral, double length,
                         double width) {
  const Pose2D p = offset_from(route, s, lateral);
  return {p.x, p.y, p.heading, length, width};
}

RouteSpec finish(RouteSpec spec, double vif_gap, double ped_s, double ped_lateral) {
  // A temporary route gives access to projections while placing actors.
  spec.ev_start = spec.centerline.front();
  spec.vif_start = spec.centerline.front();
  spec.vif_start.x += 1.0 * std::cos(spec.ev_start.heading);
  spec.vif_start.y += 1.0 * std::sin(spec.ev_start.heading);
  const Route tmp(spec);
  spec.vif_start = tmp.point_at(vif_gap);
  // Pedestrian faces the road.
  const double face = ped_lateral > 0 ? -kPi / 2 : kPi / 2;
  spec.ped_start = offset_from(tmp, ped_s, ped_lateral, face);
  spec.destination = spec.centerline.back();
  spec.route_length = tmp.length();
  return spec;
}

}  // namespace

RouteSpec builtin_route(RouteId id) {
  RouteSpec spec;
  spec.id = id;
  spec.lane_half_width = 1.75;
  constexpr double kVifGap = 15.0;

  switch (id) {
    case RouteId::kStraight: {
      CenterlineBuilder b({0.0, 0.0, 0.0});
      b.straight_to_total(kRouteLength);
      spec.centerline = b.take();
      spec = finish(std::move(spec), kVifGap, 70.0, 5.0);
      const Route r(spec);
      for (double s : {45.0, 80.0, 115.0}) {
        spec.obstacles.push_back(roadside_box(r, s, -3.1, 4.0, 1.6));
      }
      break;
    }
    case RouteId::kLeftTurn: {
      CenterlineBuilder b({0.0, 0.0, 0.0});
      b.straight(20.0);
      b.arc(20.0, kPi / 2);
      b.straight_to_total(kRouteLength);
      spec.centerline = b.take();
      spec = finish(std::move(spec), kVifGap, 60.0, 5.0);
      const Route r(spec);
      // Sits where the curve begins, straight ahead of the start.
      spec.obstacles.push_back({33.0, 0.0, 0.0, 2.0, 2.0});
      for (double s : {75.0, 110.0}) {
        spec.obstacles.push_back(roadside_box(r, s, -3.1, 4.0, 1.6));
      }
      break;
    }
    case RouteId::kRightTurn: {
      CenterlineBuilder b({0.0, 0.0, 0.0});
      b.straight(80.0);
      b.arc(20.0, -kPi / 2);
      b.straight_to_total(kRouteLength);
      spec.centerline = b.take();
      spec = finish(std::move(spec), kVifGap, 125.0, 5.0);
      const Route r(spec);
      for (double s : {40.0, 65.0}) {
        spec.obstacles.push_back(roadside_box(r, s, -3.1, 4.0, 1.6));
      }
      const Pose2D zone = r.point_at(86.0);
      spec.traffic_control = TrafficControl{zone.x, zone.y, 4.0, 60, 160};
      break;
    }
  }
  return spec;
}

}  // namespace adstest
