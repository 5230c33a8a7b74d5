#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adstest/campaign.hpp"
#include "adstest/stats.hpp"

namespace adstest {

struct TrajectoryRecord {
  std::int64_t episode = 0;
  std::string cause;
  std::vector<std::string> violations;
  std::vector<std::array<double, 2>> vif;
};

struct GrowthRow {
  std::int64_t step = 0;
  std::int64_t distinct_states = 0;
  std::int64_t visits = 0;
};

struct LoadedRepetition {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::int64_t violations_total = 0;
  double coverage = 0.0;
  std::vector<TimelinePoint> timeline;
  std::vector<GrowthRow> growth;
  std::vector<TrajectoryRecord> trajectories;
};

/// A campaign directory read back from disk.
struct LoadedCampaign {
  std::filesystem::path dir;
  std::string id;
  CampaignConfig config;
  std::vector<LoadedRepetition> repetitions;

  /// "<technique>/<detection>", the usual column name in comparisons.
  std::string label() const;
};

/// Throws ConfigError when meta.json is missing or malformed.
LoadedCampaign load_campaign(const std::filesystem::path& dir, bool with_trajectories = false);

enum class Metric : std::uint8_t { kCoverage, kViolations, kAuc };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);

struct ComparisonReport {
  Metric metric = Metric::kViolations;
  std::vector<std::string> labels;
  ResultMatrix matrix{2, 2};
  FriedmanReport friedman;
  std::vector<DunnPair> dunn;
  std::vector<Summary> summaries;
  std::vector<double> auc_mean;
  double v_max = 0.0;

  std::string to_json() const;
  std::string to_table() const;
};

/// Per-repetition series an AUC is taken over: coverage for replication
/// campaigns, the violation count for extension campaigns.
std::vector<double> efficiency_series(const LoadedRepetition& rep, CampaignMode mode);

/// Requires equal route, mode and repetition count; throws ConfigError otherwise.
ComparisonReport compare_campaigns(const std::vector<LoadedCampaign>& campaigns, Metric metric);

}  // namespace adstest
