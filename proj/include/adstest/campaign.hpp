#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adstest/actions.hpp"
#include "adstest/agents.hpp"
#include "adstest/deepq.hpp"
#include "adstest/microworld.hpp"
#include "adstest/monitors.hpp"

namespace adstest {

enum class Technique : std::uint8_t { kRandom, kQ, kMorlot, kDqn };
std::string_view to_string(Technique t);
Technique parse_technique(std::string_view text);

/// Replication tests all six requirements; extension targets R2 only.
enum class CampaignMode : std::uint8_t { kReplication, kExtension };
std::string_view to_string(CampaignMode m);
CampaignMode parse_campaign_mode(std::string_view text);

enum class Termination : std::uint8_t { kDestination, kTimeout, kCollision, kOvertake };
std::string_view to_string(Termination t);

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  double anneal_fraction = 0.2;
};

struct CampaignConfig {
  Technique technique = Technique::kRandom;
  RouteId route = RouteId::kStraight;
  std::optional<RouteSpec> custom_route;  // overrides `route` when set
  CampaignMode mode = CampaignMode::kReplication;
  std::optional<DetectionMode> detection;  // default depends on the technique
  std::int64_t budget_steps = 200000;
  std::int64_t episode_timeout = 400;
  std::int64_t repetitions = 20;
  std::uint64_t seed = 0;
  EpsilonSchedule epsilon;
  int action_repeat = 1;
  Frame frame = Frame::kAbsolute;
  KeyPrecision key_decimals;
  TieBreak tie_break = TieBreak::kRandom;
  double alpha = 0.1;
  double gamma = 0.99;
  DqnConfig dqn;
  SimParams sim;
  double spawn_jitter = 0.05;  // metres; headings get a tenth of it in radians
  double telemetry_noise = 1e-6;  // amplitude on kinematic observation slots
  int timeline_samples = 12;
  std::int64_t growth_interval = 0;  // 0 picks budget / 100
  std::int64_t loss_interval = 100;
  bool keep_tick_records = false;
  int jobs = 0;  // 0 = hardware concurrency

  /// Throws ConfigError.
  void validate() const;
  DetectionMode detection_mode() const;
  RequirementSet objectives() const;
  std::shared_ptr<const Route> make_route() const;
  /// Deterministic directory name.
  std::string id() const;
};

double epsilon_at(std::int64_t step, const CampaignConfig& config);

/// EV progress strictly beyond the VIF progress plus the EV length.
bool overtake_detected(const WorldState& world);

struct TickRecord {
  std::int64_t tick = 0;
  ActionId action = ActionId::kNoOp;
  DistanceVector distances;
  std::array<double, kNumRequirements> rewards{};
};

struct LoggedEvent {
  std::int64_t episode = 0;
  std::int64_t tick = 0;  // within the episode, 1-based
  std::int64_t step = 0;  // global step index of the tick, 0-based
  Requirement requirement = Requirement::kR1Dcl;
};

struct EpisodeLog {
  std::int64_t episode = 0;
  std::int64_t start_step = 0;
  std::int64_t ticks = 0;
  Termination cause = Termination::kTimeout;
  RequirementSet violations;
  std::vector<std::array<double, 2>> vif_path;
  std::vector<TickRecord> records;  // only with keep_tick_records
};

struct GrowthPoint {
  std::int64_t step = 0;
  std::int64_t visits = 0;
  std::vector<std::int64_t> distinct;  // one per table
};

/// Change point of the table MORLOT acts with.
struct ChoicePoint {
  std::int64_t step = 0;
  std::optional<Requirement> chosen;  // empty once everything is covered
  std::array<double, kNumRequirements> last_reward{};
  RequirementSet uncovered;
};

struct LossPoint {
  std::int64_t step = 0;
  double loss = 0.0;
  double epsilon = 0.0;
};

struct TimelinePoint {
  int sample_index = 0;
  std::int64_t step = 0;
  double coverage = 0.0;
  std::int64_t violations_total = 0;
};

struct RepetitionResult {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::int64_t ticks = 0;
  std::int64_t episodes = 0;
  std::vector<LoggedEvent> events;
  std::vector<EpisodeLog> failing_episodes;
  std::array<std::int64_t, kNumRequirements> totals{};
  /// Per detection mode, events the same trajectory would have produced.
  std::array<std::array<std::int64_t, kNumRequirements>, 3> shadow_totals{};
  std::array<std::int64_t, 4> terminations{};
  std::vector<TimelinePoint> timeline;
  std::vector<GrowthPoint> growth;
  std::vector<ChoicePoint> choices;
  std::vector<LossPoint> loss;
  std::vector<ActionId> actions;  // one per decision
  std::vector<EpisodeLog> episodes_log;  // only with keep_tick_records
  std::int64_t total_violations() const;
  RequirementSet covered() const;
};

struct CampaignResult {
  CampaignConfig config;
  std::vector<RepetitionResult> repetitions;
  bool any_failed() const;
};

/// Samples i * budget / samples for i = 0..samples. An event counts from the
/// first sample whose step is >= its own.
std::vector<TimelinePoint> coverage_timeline(const std::vector<LoggedEvent>& events, std::int64_t budget_steps,
                                             std::size_t objective_count, int samples = 12);

/// Scripted actions for replaying a fixed sequence through the episode loop.
struct ScriptedEpisode {
  std::vector<ActionId> actions;  // NO_OP after the script runs out
};

/// Runs a single episode from reset with a fixed action script (no learning).
EpisodeLog run_scripted_episode(const CampaignConfig& config, const ScriptedEpisode& script,
                                WorldState* final_world = nullptr);

RepetitionResult run_repetition(const CampaignConfig& config, std::int64_t index);
CampaignResult run_campaign(const CampaignConfig& config);

/// Writes meta.json and one rep_<k> folder per repetition under `dir`.
void write_campaign(const CampaignResult& result, const std::filesystem::path& dir);

std::string config_to_json(const CampaignConfig& config);
/// Flat keys mirroring CampaignConfig; unknown keys raise ConfigError.
void apply_config_json(CampaignConfig& config, std::string_view json_text);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace adstest
