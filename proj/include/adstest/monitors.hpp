#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <string_view>

#include "adstest/microworld.hpp"

namespace adstest {

enum class Requirement : std::uint8_t { kR1Dcl = 0, kR2Dv, kR3Dp, kR4Ds, kR5Dt, kR6Tr };

inline constexpr std::size_t kNumRequirements = 6;
inline constexpr std::array<Requirement, kNumRequirements> kAllRequirements{
    Requirement::kR1Dcl, Requirement::kR2Dv, Requirement::kR3Dp,
    Requirement::kR4Ds,  Requirement::kR5Dt, Requirement::kR6Tr};

constexpr std::size_t index_of(Requirement r) { return static_cast<std::size_t>(r); }
std::string_view to_string(Requirement r);
Requirement parse_requirement(std::string_view text);

/// Requirement set indexed by `index_of(Requirement)`.
class RequirementSet {
 public:
  RequirementSet() = default;
  RequirementSet(std::initializer_list<Requirement> rs) {
    for (auto r : rs) insert(r);
  }
  void insert(Requirement r) { bits_.set(index_of(r)); }
  void erase(Requirement r) { bits_.reset(index_of(r)); }
  bool contains(Requirement r) const { return bits_.test(index_of(r)); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }
  RequirementSet& operator|=(const RequirementSet& o) {
    bits_ |= o.bits_;
    return *this;
  }
  bool subset_of(const RequirementSet& o) const { return (bits_ & ~o.bits_).none(); }
  bool operator==(const RequirementSet&) const = default;

 private:
  std::bitset<kNumRequirements> bits_;
};

/// Violation thresholds.
inline constexpr double kDclThreshold = 1.15;
inline constexpr double kCollisionThreshold = 0.0;
inline constexpr double kTrafficSpeedTolerance = 0.5;
inline constexpr double kViolationReward = 1.0e6;
inline constexpr double kDistanceFloor = 0.01;

struct DistanceVector {
  double dcl = 0.0;      // |lateral offset| of the ego vehicle, >= 0
  double dv = 0.0;       // center distance to the vehicle in front
  double dp = 0.0;       // center distance to the pedestrian
  double ds = 0.0;       // center distance to the closest static obstacle
  double dt_norm = 1.0;  // remaining route fraction, [0, 1]
  bool tr_violated = false;

  bool operator==(const DistanceVector&) const = default;
};

enum class DetectionMode : std::uint8_t { kSensor, kThreshold, kFused };

std::string_view to_string(DetectionMode m);
DetectionMode parse_detection_mode(std::string_view text);

/// Raw simulator sensor readings.
struct SensorReadings {
  bool lane_invasion = false;
  bool vif_collision = false;
  bool ped_collision = false;
  bool static_collision = false;
};

struct ViolationEvent {
  Requirement requirement;
  std::int64_t tick = 0;
  std::int64_t episode = 0;
};

DistanceVector compute_distances(const WorldState& world);
SensorReadings read_sensors(const WorldState& world);

/// Collision distances forced to their thresholds wherever a sensor fired.
DistanceVector fuse_distances(const DistanceVector& d, const SensorReadings& s);

RequirementSet detect_violations(const WorldState& world, const DistanceVector& d, DetectionMode mode,
                                 bool episode_end);
/// Same rule with precomputed sensor readings.
RequirementSet detect_violations(const SensorReadings& sensors, const DistanceVector& d,
                                 DetectionMode mode, bool episode_end);

double reward(Requirement req, const DistanceVector& d, bool violated);
std::array<double, kNumRequirements> rewards(const DistanceVector& d, const RequirementSet& violated);

/// Latches one event per requirement per episode.
class ViolationLatch {
 public:
  /// Returns the requirements that were newly latched.
  RequirementSet update(const RequirementSet& detected) {
    RequirementSet fresh;
    for (auto r : kAllRequirements) {
      if (detected.contains(r) && !latched_.contains(r)) {
        fresh.insert(r);
        latched_.insert(r);
      }
    }
    return fresh;
  }
  const RequirementSet& latched() const { return latched_; }
  void reset() { latched_ = {}; }

 private:
  RequirementSet latched_;
};

}  // namespace adstest
