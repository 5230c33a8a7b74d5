#include "adstest/results.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adstest/format.hpp"

namespace adstest {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text(p));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2E", v);
  return buf;
}

}  // namespace

std::string LoadedCampaign::label() const {
  return std::string(to_string(config.technique)) + "/" + std::string(to_string(config.detection_mode()));
}

LoadedCampaign load_campaign(const std::filesystem::path& dir, bool with_trajectories) {
  LoadedCampaign c;
  c.dir = dir;
  json meta;
  try {
    meta = json::parse(read_text(dir / "meta.json"));
    c.id = meta.at("campaign_id").get<std::string>();
    apply_config_json(c.config, meta.at("config").dump());
    for (const auto& r : meta.at("repetitions")) {
      LoadedRepetition rep;
      rep.index = r.at("index").get<std::int64_t>();
      rep.seed = r.at("seed").get<std::uint64_t>();
      rep.ok = r.at("status").get<std::string>() == "ok";
      rep.violations_total = r.at("violations_total").get<std::int64_t>();
      rep.coverage = r.at("coverage").get<double>();
      c.repetitions.push_back(std::move(rep));
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed meta.json in " + dir.string() + ": " + e.what());
  }

  for (auto& rep : c.repetitions) {
    if (!rep.ok) continue;
    const auto rdir = dir / ("rep_" + std::to_string(rep.index));
    for (const auto& row : read_csv(rdir / "timeline.csv")) {
      if (row.size() < 4) throw ConfigError("malformed timeline.csv in " + rdir.string());
      rep.timeline.push_back({std::stoi(row[0]), std::stoll(row[1]), std::stod(row[2]), std::stoll(row[3])});
    }
    if (std::filesystem::exists(rdir / "qtable_growth.csv")) {
      for (const auto& row : read_csv(rdir / "qtable_growth.csv")) {
        if (row.size() < 3) throw ConfigError("malformed qtable_growth.csv in " + rdir.string());
        rep.growth.push_back({std::stoll(row[0]), std::stoll(row[1]), std::stoll(row[2])});
      }
    }
    if (with_trajectories) {
      std::istringstream in(read_text(rdir / "trajectories.jsonl"));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          const json j = json::parse(line);
          TrajectoryRecord t;
          t.episode = j.at("episode").get<std::int64_t>();
          t.cause = j.at("cause").get<std::string>();
          t.violations = j.at("violations").get<std::vector<std::string>>();
          t.vif = j.at("vif").get<std::vector<std::array<double, 2>>>();
          rep.trajectories.push_back(std::move(t));
        } catch (const json::exception& e) {
          throw ConfigError("malformed trajectories.jsonl in " + rdir.string() + ": " + e.what());
        }
      }
    }
  }
  return c;
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kCoverage:
      return "coverage";
    case Metric::kViolations:
      return "violations";
    case Metric::kAuc:
      return "auc";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  for (auto m : {Metric::kCoverage, Metric::kViolations, Metric::kAuc}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown metric '" + std::string(text) + "'");
}

std::vector<double> efficiency_series(const LoadedRepetition& rep, CampaignMode mode) {
  std::vector<double> s;
  for (const auto& p : rep.timeline) {
    s.push_back(mode == CampaignMode::kReplication ? p.coverage : static_cast<double>(p.violations_total));
  }
  return s;
}

ComparisonReport compare_campaigns(const std::vector<LoadedCampaign>& campaigns, Metric metric) {
  if (campaigns.size() < 2) throw ConfigError("compare needs at least two campaigns");
  const auto& first = campaigns.front().config;
  for (const auto& c : campaigns) {
    const auto& cfg = c.config;
    if (cfg.mode != first.mode) throw ConfigError("campaigns differ in mode");
    if (cfg.route != first.route || cfg.custom_route != first.custom_route) {
      throw ConfigError("campaigns differ in route");
    }
    if (c.repetitions.size() != campaigns.front().repetitions.size()) {
      throw ConfigError("campaigns differ in repetition count");
    }
    for (const auto& r : c.repetitions) {
      if (!r.ok) throw ConfigError("campaign " + c.id + " has a failed repetition");
    }
  }

  ComparisonReport rep;
  rep.metric = metric;
  std::vector<std::vector<double>> columns;
  for (const auto& c : campaigns) {
    std::string label = c.label();
    int dup = 1;
    while (std::find(rep.labels.begin(), rep.labels.end(), label) != rep.labels.end()) {
      label = c.label() + "#" + std::to_string(++dup);
    }
    rep.labels.push_back(label);
  }

  // AUC always uses one v_max shared by every compared series.
  std::vector<std::vector<std::vector<double>>> series;
  for (const auto& c : campaigns) {
    auto& per = series.emplace_back();
    for (const auto& r : c.repetitions) {
      per.push_back(efficiency_series(r, c.config.mode));
      for (double v : per.back()) rep.v_max = std::max(rep.v_max, v);
    }
  }
  for (std::size_t j = 0; j < campaigns.size(); ++j) {
    std::vector<double> aucs;
    for (const auto& s : series[j]) aucs.push_back(auc_normalized(s, rep.v_max));
    double mean = 0.0;
    for (double a : aucs) mean += a;
    rep.auc_mean.push_back(aucs.empty() ? 0.0 : mean / static_cast<double>(aucs.size()));

    std::vector<double> col;
    for (std::size_t i = 0; i < campaigns[j].repetitions.size(); ++i) {
      const auto& r = campaigns[j].repetitions[i];
      switch (metric) {
        case Metric::kCoverage:
          col.push_back(r.coverage);
          break;
        case Metric::kViolations:
          col.push_back(static_cast<double>(r.violations_total));
          break;
        case Metric::kAuc:
          col.push_back(aucs[i]);
          break;
      }
    }
    rep.summaries.push_back(summarize(col));
    columns.push_back(std::move(col));
  }
  rep.matrix = ResultMatrix::from_columns(columns);
  rep.friedman = friedman(rep.matrix);
  rep.dunn = dunn(rep.matrix);
  return rep;
}

std::string ComparisonReport::to_json() const {
  ordered_json j;
  j["metric"] = to_string(metric);
  j["treatments"] = labels;
  j["friedman"] = {{"stat", friedman.statistic},
                   {"df", friedman.df},
                   {"p", friedman.p_value},
                   {"mean_ranks", friedman.mean_ranks},
                   {"tie_correction", friedman.tie_correction},
                   {"variant", "tie-corrected chi-square"}};
  auto& d = j["dunn"] = ordered_json::array();
  for (const auto& p : dunn) {
    d.push_back({{"pair", {labels[p.a], labels[p.b]}},
                 {"z", p.z},
                 {"p_raw", p.p_raw},
                 {"p_adj", p.p_adjusted},
                 {"adjustment", "bonferroni"},
                 {"direction", p.greater ? ordered_json(labels[*p.greater]) : ordered_json(nullptr)}});
  }
  ordered_json s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& m = summaries[i];
    s[labels[i]] = {{"n", m.n},
                    {"mean", m.mean},
                    {"std", m.std_dev ? ordered_json(*m.std_dev) : ordered_json(nullptr)},
                    {"sem", m.sem ? ordered_json(*m.sem) : ordered_json(nullptr)},
                    {"median", m.median},
                    {"q1", m.q1},
                    {"q3", m.q3},
                    {"iqr", m.iqr}};
  }
  j["summaries"] = s;
  j["quartile_method"] = kQuartileMethod;
  ordered_json a;
  for (std::size_t i = 0; i < labels.size(); ++i) a[labels[i]] = auc_mean[i];
  j["auc"] = a;
  j["auc_v_max"] = v_max;
  return j.dump(2) + "\n";
}

std::string ComparisonReport::to_table() const {
  std::ostringstream out;
  out << "metric: " << to_string(metric) << "\n";
  out << "friedman: stat=" << format_number(friedman.statistic, 4) << " df=" << friedman.df
      << " p=" << sci(friedman.p_value) << "\n\n";
  std::size_t w = 10;
  for (const auto& l : labels) w = std::max(w, l.size() + 2);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s %12s %12s %12s %12s %10s\n", static_cast<int>(w), "treatment", "mean",
                "std", "median", "iqr", "auc");
  out << buf;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& m = summaries[i];
    std::snprintf(buf, sizeof(buf), "%-*s %12.4f %12s %12.4f %12.4f %10.4f\n", static_cast<int>(w), labels[i].c_str(),
                  m.mean, m.std_dev ? format_number(*m.std_dev, 4).c_str() : "-", m.median, m.iqr, auc_mean[i]);
    out << buf;
  }
  out << "\npairwise (Dunn, Bonferroni):\n";
  for (const auto& p : dunn) {
    const std::string dir = p.greater ? (*p.greater == p.a ? " >" : " <") : " =";
    out << "  " << labels[p.a] << dir << " " << labels[p.b] << "  z=" << format_number(p.z, 3)
        << "  p_adj=" << (p.p_adjusted < 1e-4 ? std::string("<1.00E-04") : sci(p.p_adjusted)) << "\n";
  }
  return out.str();
}

}  // namespace adstest
