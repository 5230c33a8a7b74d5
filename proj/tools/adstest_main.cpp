// adstest command-line front end.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "adstest/campaign.hpp"
#include "adstest/format.hpp"
#include "adstest/render.hpp"
#include "adstest/results.hpp"
#include "adstest/route_io.hpp"
#include "adstest/selftest.hpp"

using namespace adstest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunFlags {
  std::string technique, route, route_file, mode, detection, frame, key_decimals, tie_break;
  std::int64_t budget_steps = 0, episode_timeout = 0, reps = 0;
  std::uint64_t seed = 0;
  int action_repeat = 0, jobs = 0;
  double epsilon_start = 0, epsilon_end = 0, anneal_fraction = 0;
  std::string out, config;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

CLI::App* add_run(CLI::App& app, RunFlags& f) {
  auto* run = app.add_subcommand("run", "Run a testing campaign");
  run->add_option("--technique", f.technique, "random|q|morlot|dqn")
      ->check(CLI::IsMember({"random", "q", "morlot", "dqn"}));
  run->add_option("--route", f.route, "straight|left_turn|right_turn")
      ->check(CLI::IsMember({"straight", "left_turn", "right_turn"}));
  run->add_option("--route-file", f.route_file, "JSON route description (overrides --route)");
  run->add_option("--mode", f.mode, "replication|extension")->check(CLI::IsMember({"replication", "extension"}));
  run->add_option("--detection", f.detection, "sensor|threshold|fused")
      ->check(CLI::IsMember({"sensor", "threshold", "fused"}));
  run->add_option("--budget-steps", f.budget_steps, "Simulation steps per repetition")->check(CLI::PositiveNumber);
  run->add_option("--episode-timeout", f.episode_timeout, "Ticks per episode")->check(CLI::PositiveNumber);
  run->add_option("--reps", f.reps, "Repetitions")->check(CLI::PositiveNumber);
  run->add_option("--seed", f.seed, "Campaign seed");
  run->add_option("--frame", f.frame, "absolute|relative")->check(CLI::IsMember({"absolute", "relative"}));
  run->add_option("--action-repeat", f.action_repeat, "Ticks each action is held")->check(CLI::PositiveNumber);
  run->add_option("--key-decimals", f.key_decimals, "Q-table key rounding: D or full");
  run->add_option("--tie-break", f.tie_break, "lowest|random")->check(CLI::IsMember({"lowest", "random"}));
  run->add_option("--epsilon-start", f.epsilon_start)->check(CLI::Range(0.0, 1.0));
  run->add_option("--epsilon-end", f.epsilon_end)->check(CLI::Range(0.0, 1.0));
  run->add_option("--anneal-fraction", f.anneal_fraction)->check(CLI::Range(0.0, 1.0));
  run->add_option("--jobs", f.jobs, "Parallel repetitions (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--out", f.out, "Campaign directory (default result/<campaign id>)");
  run->add_option("--config", f.config, "JSON config; explicit flags win");
  return run;
}

CampaignConfig build_config(const CLI::App& run, const RunFlags& f) {
  CampaignConfig c;
  if (!f.config.empty()) apply_config_json(c, read_file(f.config));
  auto given = [&](const char* name) { return run.get_option(name)->count() > 0; };
  if (given("--technique")) c.technique = parse_technique(f.technique);
  if (given("--route")) {
    c.route = parse_route_id(f.route);
    c.custom_route.reset();
  }
  if (given("--route-file")) c.custom_route = load_route_file(f.route_file);
  if (given("--mode")) c.mode = parse_campaign_mode(f.mode);
  if (given("--detection")) c.detection = parse_detection_mode(f.detection);
  if (given("--budget-steps")) c.budget_steps = f.budget_steps;
  if (given("--episode-timeout")) c.episode_timeout = f.episode_timeout;
  if (given("--reps")) c.repetitions = f.reps;
  if (given("--seed")) c.seed = f.seed;
  if (given("--frame")) c.frame = parse_frame(f.frame);
  if (given("--action-repeat")) c.action_repeat = f.action_repeat;
  if (given("--key-decimals")) c.key_decimals = parse_key_precision(f.key_decimals);
  if (given("--tie-break")) c.tie_break = parse_tie_break(f.tie_break);
  if (given("--epsilon-start")) c.epsilon.start = f.epsilon_start;
  if (given("--epsilon-end")) c.epsilon.end = f.epsilon_end;
  if (given("--anneal-fraction")) c.epsilon.anneal_fraction = f.anneal_fraction;
  if (given("--jobs")) c.jobs = f.jobs;
  c.validate();
  return c;
}

int cmd_run(const CampaignConfig& config, const std::string& out) {
  const std::filesystem::path dir = out.empty() ? std::filesystem::path("result") / config.id() : std::filesystem::path(out);
  const auto t0 = std::chrono::steady_clock::now();
  const CampaignResult result = run_campaign(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double violations = 0.0, coverage = 0.0;
  int ok = 0;
  for (const auto& r : result.repetitions) {
    if (r.failed) continue;
    violations += static_cast<double>(r.total_violations());
    coverage += r.timeline.empty() ? 0.0 : r.timeline.back().coverage;
    ++ok;
  }
  if (ok) {
    violations /= ok;
    coverage /= ok;
  }
  int code = kExitOk;
  try {
    write_campaign(result, dir);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitRuntime;
  }
  std::cout << config.id() << ": reps " << ok << "/" << result.repetitions.size() << ", mean violations "
            << format_number(violations, 2) << ", mean coverage " << format_number(coverage, 3) << ", wall "
            << format_number(wall, 1) << " s -> " << dir.string() << "\n";
  return code;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& metric, const std::string& out) {
  std::vector<LoadedCampaign> campaigns;
  for (const auto& d : dirs) campaigns.push_back(load_campaign(d));
  const ComparisonReport report = compare_campaigns(campaigns, parse_metric(metric));
  if (!out.empty()) write_file(out, report.to_json());
  std::cout << report.to_table();
  return kExitOk;
}

int cmd_render(const std::vector<std::string>& dirs, const std::string& kind_text, std::string out, int rep) {
  const RenderKind kind = parse_render_kind(kind_text);
  std::vector<LoadedCampaign> campaigns;
  for (const auto& d : dirs) campaigns.push_back(load_campaign(d, kind == RenderKind::kTrajectories));
  if (out.empty()) out = (std::filesystem::path(dirs.front()) / (std::string(to_string(kind)) + ".svg")).string();

  std::string svg;
  switch (kind) {
    case RenderKind::kTrajectories: {
      if (campaigns.size() != 1) throw ConfigError("trajectories render takes exactly one campaign");
      const auto& c = campaigns.front();
      std::vector<TrajectoryRecord> failures;
      for (const auto& r : c.repetitions) {
        if (rep >= 0 && r.index != rep) continue;
        failures.insert(failures.end(), r.trajectories.begin(), r.trajectories.end());
      }
      if (failures.empty()) std::cerr << "warning: no failing episodes; rendering the route only\n";
      svg = render_trajectories_svg(c.config.make_route()->spec(), failures);
      break;
    }
    case RenderKind::kCoverage:
      svg = render_coverage_svg(campaigns);
      break;
    case RenderKind::kGrowth:
      for (const auto& c : campaigns) {
        if (c.config.technique != Technique::kQ && c.config.technique != Technique::kMorlot) {
          throw ConfigError("growth render needs a tabular campaign, got " + std::string(to_string(c.config.technique)));
        }
      }
      svg = render_growth_svg(campaigns);
      break;
  }
  write_file(out, svg);
  std::cout << out << "\n";
  return kExitOk;
}

int cmd_selftest() {
  int failed = 0;
  for (const auto& c : run_selftest()) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << "\n";
    failed += c.ok ? 0 : 1;
  }
  return failed ? kExitRuntime : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforcement-learning test generation for a driving microworld"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunFlags rf;
  auto* run = add_run(app, rf);

  std::vector<std::string> cmp_dirs;
  std::string metric = "violations", cmp_out;
  auto* compare = app.add_subcommand("compare", "Friedman and Dunn comparison of campaigns");
  compare->add_option("dirs", cmp_dirs, "Campaign directories")->required()->expected(2, -1);
  compare->add_option("--metric", metric, "coverage|violations|auc")
      ->check(CLI::IsMember({"coverage", "violations", "auc"}));
  compare->add_option("--out", cmp_out, "Write the JSON report here");

  std::vector<std::string> render_dirs;
  std::string kind = "trajectories", render_out;
  int render_rep = -1;
  auto* render = app.add_subcommand("render", "SVG figures from campaign directories");
  render->add_option("dirs", render_dirs, "Campaign directories")->required()->expected(1, -1);
  render->add_option("--kind", kind, "trajectories|coverage|growth")
      ->check(CLI::IsMember({"trajectories", "coverage", "growth"}));
  render->add_option("--rep", render_rep, "Only this repetition (trajectories)");
  render->add_option("--out", render_out, "SVG path (default <dir>/<kind>.svg)");

  std::string route_name = "straight", route_file, route_out;
  auto* route = app.add_subcommand("route", "Inspect route descriptions");
  route->require_subcommand(1);
  auto* dump = route->add_subcommand("dump", "Print a built-in route as JSON");
  dump->add_option("--route", route_name)->check(CLI::IsMember({"straight", "left_turn", "right_turn"}));
  dump->add_option("--out", route_out, "Write to a file instead of stdout");
  auto* check = route->add_subcommand("check", "Validate a route file");
  check->add_option("file", route_file)->required();

  auto* selftest = app.add_subcommand("selftest", "Gradient, statistics and geometry checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      CampaignConfig config = build_config(*run, rf);
      if (config.jobs == 0) config.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      return cmd_run(config, rf.out);
    }
    if (compare->parsed()) return cmd_compare(cmp_dirs, metric, cmp_out);
    if (render->parsed()) return cmd_render(render_dirs, kind, render_out, render_rep);
    if (dump->parsed()) {
      const std::string text = route_to_json(builtin_route(parse_route_id(route_name)), 2) + "\n";
      if (route_out.empty()) std::cout << text;
      else write_file(route_out, text);
      return kExitOk;
    }
    if (check->parsed()) {
      const RouteSpec spec = load_route_file(route_file);
      std::cout << route_file << ": ok, length " << format_number(spec.route_length, 2) << " m, "
                << spec.obstacles.size() << " obstacles\n";
      return kExitOk;
    }
    if (selftest->parsed()) return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
