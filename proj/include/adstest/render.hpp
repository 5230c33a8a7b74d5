#pragma once

#include <string>
#include <vector>

#include "adstest/results.hpp"

namespace adstest {

enum class RenderKind : std::uint8_t { kTrajectories, kCoverage, kGrowth };
std::string_view to_string(RenderKind k);
RenderKind parse_render_kind(std::string_view text);

/// Bird's-eye view. Lane boundaries are drawn as <path>, so the only
/// <polyline> elements are the failing-episode VIF paths.
std::string render_trajectories_svg(const RouteSpec& route, const std::vector<TrajectoryRecord>& failures);

/// Mean efficiency series per campaign with a +/- sem band.
std::string render_coverage_svg(const std::vector<LoadedCampaign>& campaigns);

/// Mean distinct states against steps per campaign; the legend carries
/// distinct/steps at the last sample.
std::string render_growth_svg(const std::vector<LoadedCampaign>& campaigns);

struct BandPoint {
  double x = 0.0;
  double mean = 0.0;
  double sem = 0.0;
};

/// Mean and sem over repetitions, per timeline sample.
std::vector<BandPoint> coverage_band(const LoadedCampaign& campaign);

/// distinct_states / steps at the last growth sample, averaged over repetitions.
double growth_ratio(const LoadedCampaign& campaign);

}  // namespace adstest
