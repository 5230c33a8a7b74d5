#include <gtest/gtest.h>

#include <cmath>

#include "adstest/monitors.hpp"

using namespace adstest;

namespace {

WorldState at_rest(RouteId id = RouteId::kStraight) { return reset_scenario(builtin(id)); }

// EV at the route start, VIF turned across it and overlapping one corner.
WorldState corner_contact(double dv) {
  WorldState w = at_rest();
  const double c = dv + (w.ev.width + w.vif.width) / 2;
  w.vif.pose = {w.ev.pose.x + c * std::cos(M_PI / 6), w.ev.pose.y + c * std::sin(M_PI / 6), M_PI / 2};
  return w;
}

RequirementSet collisions(const RequirementSet& s) {
  RequirementSet out;
  for (auto r : {Requirement::kR2Dv, Requirement::kR3Dp, Requirement::kR4Ds}) {
    if (s.contains(r)) out.insert(r);
  }
  return out;
}

}  // namespace

TEST(Requirement, SixInStableOrder) {
  ASSERT_EQ(kAllRequirements.size(), 6u);
  const char* names[] = {"R1_DCL", "R2_DV", "R3_DP", "R4_DS", "R5_DT", "R6_TR"};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(index_of(kAllRequirements[i]), i);
    EXPECT_EQ(to_string(kAllRequirements[i]), names[i]);
    EXPECT_EQ(parse_requirement(names[i]), kAllRequirements[i]);
  }
}

TEST(Distances, CenteredEvHasZeroDcl) {
  EXPECT_EQ(compute_distances(at_rest()).dcl, 0.0);
}

TEST(Distances, FullRouteRemainingAtStart) {
  for (auto id : {RouteId::kStraight, RouteId::kLeftTurn, RouteId::kRightTurn}) {
    EXPECT_DOUBLE_EQ(compute_distances(at_rest(id)).dt_norm, 1.0);
  }
}

TEST(Distances, DvIsCenterGapMinusHalfWidths) {
  WorldState w = at_rest();
  w.vif.pose = {w.ev.pose.x + 5.0, w.ev.pose.y, 0.0};
  EXPECT_DOUBLE_EQ(compute_distances(w).dv, 3.0);
}

TEST(Distances, DtNormClampedPastDestination) {
  WorldState w = at_rest();
  w.ev.pose.x = 400.0;
  EXPECT_EQ(compute_distances(w).dt_norm, 0.0);
}

TEST(Distances, RedLightSpeedCheck) {
  WorldState w = at_rest(RouteId::kRightTurn);
  const TrafficControl tc = *w.route_spec().traffic_control;
  w.ev.pose.x = tc.cx;
  w.ev.pose.y = tc.cy;
  w.tick = (tc.red_start + tc.red_end) / 2;
  w.ev.speed = 1.0;
  EXPECT_TRUE(compute_distances(w).tr_violated);
  w.ev.speed = 0.4;
  EXPECT_FALSE(compute_distances(w).tr_violated);
  w.ev.speed = 1.0;
  w.tick = tc.red_end + 1;
  EXPECT_FALSE(compute_distances(w).tr_violated);
}

TEST(Detect, ZeroDvIsViolationUnderThreshold) {
  DistanceVector d;
  d.dv = d.dp = d.ds = 10.0;
  d.dv = 0.0;
  EXPECT_EQ(detect_violations(SensorReadings{}, d, DetectionMode::kThreshold, false), RequirementSet{Requirement::kR2Dv});
}

TEST(Detect, DclThreshold) {
  DistanceVector d;
  d.dv = d.dp = d.ds = 10.0;
  d.dcl = 1.2;
  EXPECT_EQ(detect_violations(SensorReadings{}, d, DetectionMode::kThreshold, false), RequirementSet{Requirement::kR1Dcl});
  d.dcl = 1.15;
  EXPECT_TRUE(detect_violations(SensorReadings{}, d, DetectionMode::kThreshold, false).empty());
}

TEST(Detect, CornerContactSeenOnlyBySensor) {
  const WorldState w = corner_contact(0.3);
  const DistanceVector d = compute_distances(w);
  EXPECT_NEAR(d.dv, 0.3, 1e-12);
  EXPECT_EQ(collisions(detect_violations(w, d, DetectionMode::kSensor, false)), RequirementSet{Requirement::kR2Dv});
  EXPECT_TRUE(collisions(detect_violations(w, d, DetectionMode::kThreshold, false)).empty());
  EXPECT_EQ(collisions(detect_violations(w, d, DetectionMode::kFused, false)), RequirementSet{Requirement::kR2Dv});
}

TEST(Detect, FusedForcesOnlyFiredSensors) {
  DistanceVector d;
  d.dcl = 0.5;
  d.dv = 0.3;
  d.dp = 2.0;
  d.ds = 4.0;
  SensorReadings s;
  s.vif_collision = true;
  s.lane_invasion = true;
  const DistanceVector f = fuse_distances(d, s);
  EXPECT_EQ(f.dv, kCollisionThreshold);
  EXPECT_GE(f.dcl, kDclThreshold);
  EXPECT_EQ(f.dp, 2.0);
  EXPECT_EQ(f.ds, 4.0);
}

TEST(Detect, DestinationCheckedOnlyAtEpisodeEnd) {
  DistanceVector d;
  d.dv = d.dp = d.ds = 10.0;
  d.dt_norm = 0.4;
  for (auto m : {DetectionMode::kSensor, DetectionMode::kThreshold, DetectionMode::kFused}) {
    EXPECT_FALSE(detect_violations(SensorReadings{}, d, m, false).contains(Requirement::kR5Dt));
    EXPECT_TRUE(detect_violations(SensorReadings{}, d, m, true).contains(Requirement::kR5Dt));
  }
  d.dt_norm = 0.0;
  EXPECT_FALSE(detect_violations(SensorReadings{}, d, DetectionMode::kSensor, true).contains(Requirement::kR5Dt));
}

TEST(Detect, TrafficRuleInEveryMode) {
  DistanceVector d;
  d.dv = d.dp = d.ds = 10.0;
  d.tr_violated = true;
  for (auto m : {DetectionMode::kSensor, DetectionMode::kThreshold, DetectionMode::kFused}) {
    EXPECT_TRUE(detect_violations(SensorReadings{}, d, m, false).contains(Requirement::kR6Tr));
  }
}

TEST(Detect, ModeMonotonicityAlongRandomTrajectories) {
  std::uint64_t x = 99;
  for (auto id : {RouteId::kStraight, RouteId::kLeftTurn, RouteId::kRightTurn}) {
    WorldState w = at_rest(id);
    for (int i = 0; i < 600; ++i) {
      x = x * 6364136223846793005ULL + 1442695040888963407ULL;
      w = apply_action(w, action_from_index((x >> 33) % kNumActions));
      w = simulate_tick(w, ads_control(w));
      const DistanceVector d = compute_distances(w);
      const auto t = detect_violations(w, d, DetectionMode::kThreshold, false);
      const auto f = detect_violations(w, d, DetectionMode::kFused, false);
      const auto s = detect_violations(w, d, DetectionMode::kSensor, false);
      EXPECT_TRUE(t.subset_of(f));
      EXPECT_TRUE(collisions(t).subset_of(collisions(s)));
    }
  }
}

TEST(Reward, InverseDistance) {
  DistanceVector d;
  d.dv = 2.0;
  EXPECT_EQ(reward(Requirement::kR2Dv, d, false), 0.5);
}

TEST(Reward, ViolationIsExactlyOneMillion) {
  const DistanceVector d;
  for (auto r : kAllRequirements) EXPECT_EQ(reward(r, d, true), 1.0e6);
}

TEST(Reward, TrafficRuleSparse) {
  DistanceVector d;
  d.tr_violated = false;
  EXPECT_EQ(reward(Requirement::kR6Tr, d, false), 0.0);
}

TEST(Reward, DestinationAtRouteStart) {
  DistanceVector d;
  d.dt_norm = 1.0;
  EXPECT_EQ(reward(Requirement::kR5Dt, d, false), 1.0e6);
  d.dt_norm = 0.5;
  EXPECT_DOUBLE_EQ(reward(Requirement::kR5Dt, d, false), 2.0);
}

TEST(Reward, LaneCenterNormalized) {
  DistanceVector d;
  d.dcl = 0.0;
  EXPECT_DOUBLE_EQ(reward(Requirement::kR1Dcl, d, false), 1.0);
  d.dcl = 1.15 / 2;
  EXPECT_DOUBLE_EQ(reward(Requirement::kR1Dcl, d, false), 2.0);
  d.dcl = 5.0;
  EXPECT_DOUBLE_EQ(reward(Requirement::kR1Dcl, d, false), 100.0);
}

TEST(Reward, FloorCapsAtHundred) {
  DistanceVector d;
  d.dp = 0.001;
  EXPECT_EQ(reward(Requirement::kR3Dp, d, false), 100.0);
  d.dp = -3.0;
  EXPECT_EQ(reward(Requirement::kR3Dp, d, false), 100.0);
}

TEST(Reward, NonViolatedWithinRange) {
  std::uint64_t x = 7;
  auto u = [&x](double lo, double hi) {
    x = x * 6364136223846793005ULL + 1442695040888963407ULL;
    return lo + (hi - lo) * static_cast<double>(x >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 5000; ++i) {
    DistanceVector d{u(0, 3), u(-5, 100), u(-5, 100), u(-5, 100), u(0.0, 0.999), u(0, 1) < 0.5};
    for (auto r : kAllRequirements) {
      const double v = reward(r, d, false);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 100.0);
    }
  }
}

TEST(Reward, DvStrictlyDecreasing) {
  DistanceVector d;
  double prev = std::numeric_limits<double>::infinity();
  for (double dv = 0.01; dv <= 100.0; dv *= 1.01) {
    d.dv = dv;
    const double v = reward(Requirement::kR2Dv, d, false);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Latch, OneEventPerRequirementPerEpisode) {
  ViolationLatch latch;
  EXPECT_EQ(latch.update({Requirement::kR2Dv}), RequirementSet{Requirement::kR2Dv});
  EXPECT_TRUE(latch.update({Requirement::kR2Dv}).empty());
  EXPECT_EQ(latch.update({Requirement::kR2Dv, Requirement::kR4Ds}), RequirementSet{Requirement::kR4Ds});
  latch.reset();
  EXPECT_EQ(latch.update({Requirement::kR2Dv}), RequirementSet{Requirement::kR2Dv});
}
