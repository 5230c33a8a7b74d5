#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace adstest {

/// Discrete perturbations available to a testing agent. Each one nudges a
/// single controlled variable by a constant amount.
enum class ActionId : std::uint8_t {
  kVifThrottleUp = 0,
  kVifThrottleDown,
  kVifSteerRight,
  kVifSteerLeft,
  kPedSpeedUp,
  kPedSpeedDown,
  kPedXUp,
  kPedXDown,
  kPedYUp,
  kPedYDown,
  kFogUp,
  kFogDown,
  kRainUp,
  kRainDown,
  kSunUp,
  kSunDown,
  kNoOp,
};

inline constexpr std::size_t kNumActions = 17;

enum class ControlledVariable : std::uint8_t {
  kVifThrottle,
  kVifSteer,
  kPedSpeed,
  kPedX,
  kPedY,
  kFog,
  kRain,
  kSunAltitude,
  kNone,
};

struct ActionEffect {
  ActionId id;
  std::string_view name;
  ControlledVariable variable;
  double delta;
};

// Steer is expressed in the vehicle's command convention: positive = left.
inline constexpr std::array<ActionEffect, kNumActions> kActionTable{{
    {ActionId::kVifThrottleUp, "vif_throttle_up", ControlledVariable::kVifThrottle, +0.1},
    {ActionId::kVifThrottleDown, "vif_throttle_down", ControlledVariable::kVifThrottle, -0.1},
    {ActionId::kVifSteerRight, "vif_steer_right", ControlledVariable::kVifSteer, -0.1},
    {ActionId::kVifSteerLeft, "vif_steer_left", ControlledVariable::kVifSteer, +0.1},
    {ActionId::kPedSpeedUp, "ped_speed_up", ControlledVariable::kPedSpeed, +0.2},
    {ActionId::kPedSpeedDown, "ped_speed_down", ControlledVariable::kPedSpeed, -0.2},
    {ActionId::kPedXUp, "ped_x_up", ControlledVariable::kPedX, +0.5},
    {ActionId::kPedXDown, "ped_x_down", ControlledVariable::kPedX, -0.5},
    {ActionId::kPedYUp, "ped_y_up", ControlledVariable::kPedY, +0.5},
    {ActionId::kPedYDown, "ped_y_down", ControlledVariable::kPedY, -0.5},
    {ActionId::kFogUp, "fog_up", ControlledVariable::kFog, +0.1},
    {ActionId::kFogDown, "fog_down", ControlledVariable::kFog, -0.1},
    {ActionId::kRainUp, "rain_up", ControlledVariable::kRain, +0.1},
    {ActionId::kRainDown, "rain_down", ControlledVariable::kRain, -0.1},
    {ActionId::kSunUp, "sun_up", ControlledVariable::kSunAltitude, +10.0},
    {ActionId::kSunDown, "sun_down", ControlledVariable::kSunAltitude, -10.0},
    {ActionId::kNoOp, "no_op", ControlledVariable::kNone, 0.0},
}};

constexpr std::size_t index_of(ActionId a) { return static_cast<std::size_t>(a); }
constexpr ActionId action_from_index(std::size_t i) { return static_cast<ActionId>(i); }
constexpr const ActionEffect& effect_of(ActionId a) { return kActionTable[index_of(a)]; }

constexpr bool affects_vif(ActionId a) {
  auto v = effect_of(a).variable;
  return v == ControlledVariable::kVifThrottle || v == ControlledVariable::kVifSteer;
}

}  // namespace adstest
