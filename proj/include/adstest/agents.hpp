#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "adstest/actions.hpp"
#include "adstest/microworld.hpp"
#include "adstest/monitors.hpp"

namespace adstest {

inline constexpr std::size_t kObservationSize = 19;

/// Observation slots. In the relative frame the position slots hold
/// (progress, lateral) for the ego vehicle and (range, bearing) for the
/// other actors, and headings become differences to the ego heading.
enum class Slot : std::uint8_t {
  kEvX = 0,
  kEvY,
  kEvHeading,
  kEvSpeed,
  kEvAccel,
  kVifX,
  kVifY,
  kVifHeading,
  kVifSpeed,
  kVifAccel,
  kPedX,
  kPedY,
  kPedHeading,
  kPedSpeed,
  kFog,
  kRain,
  kSunAltitude,
  kVifThrottle,
  kVifSteer,
};

using Observation = std::array<double, kObservationSize>;

constexpr std::size_t slot(Slot s) { return static_cast<std::size_t>(s); }

enum class Frame : std::uint8_t { kAbsolute, kRelative };
std::string_view to_string(Frame f);
Frame parse_frame(std::string_view text);

Observation encode_observation(const WorldState& world, Frame frame);

/// Fixed per-slot ranges mapping an observation into [-1, 1].
class ObservationScaler {
 public:
  ObservationScaler(const Route& route, Frame frame);
  Observation normalize(const Observation& obs) const;
  const std::array<std::pair<double, double>, kObservationSize>& ranges() const { return ranges_; }

 private:
  std::array<std::pair<double, double>, kObservationSize> ranges_;
};

/// Decimal places for state keys; nullopt keeps the shortest round-trip text.
using KeyPrecision = std::optional<int>;
KeyPrecision parse_key_precision(std::string_view text);
std::string to_string(const KeyPrecision& p);

std::string encode_state_key(const Observation& obs, const KeyPrecision& decimals = std::nullopt);
Observation parse_state_key(std::string_view key);

/// 64-bit Mersenne Twister with fixed draw accounting.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1); one draw.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n); one draw.
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }
  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Independent streams of one repetition. Action draws live on their own
/// stream so that an always-exploring learner replays the baseline exactly.
struct AgentRng {
  explicit AgentRng(std::uint64_t seed)
      : action(splitmix64(seed ^ 0xA5A5A5A5ULL)),
        explore(splitmix64(seed ^ 0x5A5A5A5AULL)),
        replay(splitmix64(seed ^ 0x3C3C3C3CULL)),
        init(splitmix64(seed ^ 0xC3C3C3C3ULL)),
        scenario(splitmix64(seed ^ 0x96969696ULL)),
        noise(splitmix64(seed ^ 0x69696969ULL)) {}
  Rng action;
  Rng explore;
  Rng replay;
  Rng init;
  Rng scenario;  // spawn jitter
  Rng noise;     // telemetry noise
};

/// Adds uniform noise in [-amplitude, amplitude] to the kinematic slots
/// (everything before the weather slots); one draw per slot.
void add_telemetry_noise(Observation& obs, double amplitude, Rng& rng);

ActionId random_select(Rng& rng);

using QRow = std::array<double, kNumActions>;

/// Dynamic Q-table; rows appear the first time a key is visited.
class QTable {
 public:
  QRow& row(const std::string& key);
  const QRow* find(const std::string& key) const;
  std::size_t distinct_states() const { return rows_.size(); }
  std::uint64_t visits() const { return visits_; }
  void count_visit() { ++visits_; }
  double max_value(const std::string& key) const;

  /// CSV: state_key followed by one column per action, rows sorted by key.
  void write_csv(std::ostream& out) const;

 private:
  std::unordered_map<std::string, QRow> rows_;
  std::uint64_t visits_ = 0;
};

std::size_t argmax_lowest(const QRow& row);

/// Greedy choice among equal action values.
enum class TieBreak : std::uint8_t { kLowest, kRandom };
std::string_view to_string(TieBreak t);
TieBreak parse_tie_break(std::string_view text);

/// Uniform among the maximal entries; one draw.
std::size_t argmax_random(const QRow& row, Rng& rng);

ActionId q_select(QTable& table, const std::string& key, double epsilon, AgentRng& rng,
                  TieBreak ties = TieBreak::kLowest);

double q_update(QTable& table, const std::string& key, ActionId action, double r,
                const std::string& next_key, double alpha, double gamma, bool terminal = false);

struct Transition {
  std::string state_key;
  ActionId action = ActionId::kNoOp;
  std::array<double, kNumRequirements> rewards{};
  std::string next_state_key;
  Observation observation{};
  Observation next_observation{};
  bool done = false;
};

struct MorlotState {
  std::array<QTable, kNumRequirements> tables;
  RequirementSet uncovered{Requirement::kR1Dcl, Requirement::kR2Dv, Requirement::kR3Dp,
                           Requirement::kR4Ds,  Requirement::kR5Dt, Requirement::kR6Tr};
  std::array<double, kNumRequirements> last_reward{};
};

/// Uncovered requirement with the highest previous reward; ties go to the
/// earliest requirement. Empty when everything is covered.
std::optional<Requirement> morlot_objective(const MorlotState& m);

/// nullopt once every requirement is covered.
std::optional<std::pair<ActionId, Requirement>> morlot_select(MorlotState& m, const std::string& key,
                                                              double epsilon, AgentRng& rng,
                                                              TieBreak ties = TieBreak::kLowest);

void morlot_update(MorlotState& m, const Transition& t, const RequirementSet& latched_now,
                   double alpha, double gamma);

}  // namespace adstest
