#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adstest/campaign.hpp"
#include "adstest/format.hpp"
#include "adstest/route_io.hpp"

namespace adstest {

namespace {

using nlohmann::ordered_json;

std::string requirement_list(const RequirementSet& s) {
  std::string out;
  for (auto r : kAllRequirements) {
    if (!s.contains(r)) continue;
    if (!out.empty()) out.push_back(';');
    out += to_string(r);
  }
  return out;
}

ordered_json config_json(const CampaignConfig& c) {
  ordered_json j;
  j["technique"] = to_string(c.technique);
  j["route"] = c.custom_route ? "custom" : std::string(to_string(c.route));
  j["mode"] = to_string(c.mode);
  j["detection"] = to_string(c.detection_mode());
  j["budget_steps"] = c.budget_steps;
  j["episode_timeout"] = c.episode_timeout;
  j["reps"] = c.repetitions;
  j["seed"] = c.seed;
  j["epsilon_start"] = c.epsilon.start;
  j["epsilon_end"] = c.epsilon.end;
  j["anneal_fraction"] = c.epsilon.anneal_fraction;
  j["action_repeat"] = c.action_repeat;
  j["frame"] = to_string(c.frame);
  j["key_decimals"] = to_string(c.key_decimals);
  j["tie_break"] = to_string(c.tie_break);
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["dqn_hidden"] = c.dqn.hidden;
  j["dqn_gamma"] = c.dqn.gamma;
  j["dqn_learning_rate"] = c.dqn.learning_rate;
  j["dqn_batch_size"] = c.dqn.batch_size;
  j["dqn_buffer_capacity"] = c.dqn.buffer_capacity;
  j["dqn_target_sync"] = c.dqn.target_sync_period;
  j["dqn_warmup"] = c.dqn.warmup;
  j["dqn_train_interval"] = c.dqn.train_interval;
  j["dqn_huber_delta"] = c.dqn.huber_delta;
  j["spawn_jitter"] = c.spawn_jitter;
  j["telemetry_noise"] = c.telemetry_noise;
  j["timeline_samples"] = c.timeline_samples;
  j["growth_interval"] = c.growth_interval;
  j["loss_interval"] = c.loss_interval;
  if (c.custom_route) j["route_spec"] = ordered_json::parse(route_to_json(*c.custom_route));
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + p.string());
}

void write_repetition(const RepetitionResult& rep, const CampaignConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  std::string events;
  for (const auto& e : rep.events) {
    events += "{\"episode\":" + std::to_string(e.episode) + ",\"tick\":" + std::to_string(e.tick) +
              ",\"step\":" + std::to_string(e.step) + ",\"requirement\":\"" + std::string(to_string(e.requirement)) +
              "\"}\n";
  }
  write_file(dir / "events.jsonl", events);

  std::string timeline = "sample_index,step,coverage,violations_total\n";
  for (const auto& p : rep.timeline) {
    timeline += std::to_string(p.sample_index) + "," + std::to_string(p.step) + "," + format_number(p.coverage) +
                "," + std::to_string(p.violations_total) + "\n";
  }
  write_file(dir / "timeline.csv", timeline);

  if (config.technique == Technique::kQ || config.technique == Technique::kMorlot) {
    std::string growth = "step,distinct_states,visits";
    const bool per_table = config.technique == Technique::kMorlot;
    if (per_table) {
      for (auto r : kAllRequirements) growth += "," + std::string(to_string(r));
    }
    growth += "\n";
    for (const auto& g : rep.growth) {
      std::int64_t total = 0;
      for (auto d : g.distinct) total += d;
      growth += std::to_string(g.step) + "," + std::to_string(total) + "," + std::to_string(g.visits);
      if (per_table) {
        for (auto d : g.distinct) growth += "," + std::to_string(d);
      }
      growth += "\n";
    }
    write_file(dir / "qtable_growth.csv", growth);
  }

  if (config.technique == Technique::kMorlot) {
    std::string choices = "step,chosen,uncovered";
    for (auto r : kAllRequirements) choices += ",last_" + std::string(to_string(r));
    choices += "\n";
    for (const auto& c : rep.choices) {
      choices += std::to_string(c.step) + "," + (c.chosen ? std::string(to_string(*c.chosen)) : std::string("none")) +
                 "," + requirement_list(c.uncovered);
      for (double v : c.last_reward) choices += "," + format_number(v);
      choices += "\n";
    }
    write_file(dir / "morlot_choices.csv", choices);
  }

  if (config.technique == Technique::kDqn) {
    std::string loss = "step,loss,epsilon\n";
    for (const auto& l : rep.loss) {
      loss += std::to_string(l.step) + "," + format_number(l.loss) + "," + format_number(l.epsilon) + "\n";
    }
    write_file(dir / "loss.csv", loss);
  }

  std::string traj;
  for (const auto& ep : rep.failing_episodes) {
    traj += "{\"episode\":" + std::to_string(ep.episode) + ",\"start_step\":" + std::to_string(ep.start_step) +
            ",\"ticks\":" + std::to_string(ep.ticks) + ",\"cause\":\"" + std::string(to_string(ep.cause)) +
            "\",\"violations\":[";
    bool first = true;
    for (auto r : kAllRequirements) {
      if (!ep.violations.contains(r)) continue;
      traj += std::string(first ? "" : ",") + "\"" + std::string(to_string(r)) + "\"";
      first = false;
    }
    traj += "],\"vif\":[";
    for (std::size_t i = 0; i < ep.vif_path.size(); ++i) {
      if (i) traj += ",";
      traj += "[" + format_number(ep.vif_path[i][0], 3) + "," + format_number(ep.vif_path[i][1], 3) + "]";
    }
    traj += "]}\n";
  }
  write_file(dir / "trajectories.jsonl", traj);
}

ordered_json totals_json(const std::array<std::int64_t, kNumRequirements>& t) {
  ordered_json j;
  for (auto r : kAllRequirements) j[std::string(to_string(r))] = t[index_of(r)];
  return j;
}

}  // namespace

std::string config_to_json(const CampaignConfig& config) { return config_json(config).dump(); }

void write_campaign(const CampaignResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const CampaignConfig& c = result.config;
  ordered_json meta;
  meta["version"] = kVersion;
  meta["campaign_id"] = c.id();
  meta["config"] = config_json(c);
  // Built separately: ordered_json keys live in a vector, so references into
  // `meta` do not survive later insertions.
  ordered_json seeds = ordered_json::array();
  ordered_json reps = ordered_json::array();
  std::string first_error;
  for (const auto& rep : result.repetitions) {
    seeds.push_back(rep.seed);
    ordered_json r;
    r["index"] = rep.index;
    r["seed"] = rep.seed;
    std::string error = rep.error;
    if (!rep.failed) {
      try {
        write_repetition(rep, c, dir / ("rep_" + std::to_string(rep.index)));
      } catch (const std::exception& e) {
        error = std::string("output: ") + e.what();
      }
    }
    const bool failed = rep.failed || !error.empty();
    if (failed && first_error.empty()) first_error = error;
    r["status"] = failed ? "failed" : "ok";
    if (failed) r["error"] = error;
    r["ticks"] = rep.ticks;
    r["episodes"] = rep.episodes;
    r["violations"] = totals_json(rep.totals);
    r["violations_total"] = rep.total_violations();
    r["coverage"] = rep.timeline.empty() ? 0.0 : rep.timeline.back().coverage;
    ordered_json shadow;
    for (auto m : {DetectionMode::kSensor, DetectionMode::kThreshold, DetectionMode::kFused}) {
      shadow[std::string(to_string(m))] = totals_json(rep.shadow_totals[static_cast<std::size_t>(m)]);
    }
    r["violations_by_detection"] = shadow;
    ordered_json term;
    for (auto t : {Termination::kDestination, Termination::kTimeout, Termination::kCollision, Termination::kOvertake}) {
      term[std::string(to_string(t))] = rep.terminations[static_cast<std::size_t>(t)];
    }
    r["terminations"] = term;
    reps.push_back(r);
  }
  meta["seeds"] = seeds;
  meta["repetitions"] = reps;
  write_file(dir / "meta.json", meta.dump(2) + "\n");
  if (!first_error.empty()) throw std::runtime_error("repetition failed: " + first_error);
}

void apply_config_json(CampaignConfig& c, std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  // The config echo written to meta.json nests its settings under "config".
  if (j.contains("config") && j.at("config").is_object()) j = j.at("config");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "technique") c.technique = parse_technique(v.get<std::string>());
      else if (key == "route") {
        if (v.get<std::string>() != "custom") c.route = parse_route_id(v.get<std::string>());
      } else if (key == "route_file") c.custom_route = load_route_file(v.get<std::string>());
      else if (key == "route_spec") c.custom_route = route_from_json(v.dump());
      else if (key == "mode") c.mode = parse_campaign_mode(v.get<std::string>());
      else if (key == "detection") c.detection = parse_detection_mode(v.get<std::string>());
      else if (key == "budget_steps") c.budget_steps = v.get<std::int64_t>();
      else if (key == "episode_timeout") c.episode_timeout = v.get<std::int64_t>();
      else if (key == "reps" || key == "repetitions") c.repetitions = v.get<std::int64_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "epsilon_start") c.epsilon.start = v.get<double>();
      else if (key == "epsilon_end") c.epsilon.end = v.get<double>();
      else if (key == "anneal_fraction") c.epsilon.anneal_fraction = v.get<double>();
      else if (key == "action_repeat") c.action_repeat = v.get<int>();
      else if (key == "frame") c.frame = parse_frame(v.get<std::string>());
      else if (key == "key_decimals") {
        c.key_decimals = v.is_number() ? parse_key_precision(std::to_string(v.get<int>()))
                                       : parse_key_precision(v.get<std::string>());
      } else if (key == "tie_break") c.tie_break = parse_tie_break(v.get<std::string>());
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "gamma") c.gamma = v.get<double>();
      else if (key == "dqn_hidden") c.dqn.hidden = v.get<std::vector<std::size_t>>();
      else if (key == "dqn_gamma") c.dqn.gamma = v.get<double>();
      else if (key == "dqn_learning_rate") c.dqn.learning_rate = v.get<double>();
      else if (key == "dqn_batch_size") c.dqn.batch_size = v.get<std::size_t>();
      else if (key == "dqn_buffer_capacity") c.dqn.buffer_capacity = v.get<std::size_t>();
      else if (key == "dqn_target_sync") c.dqn.target_sync_period = v.get<std::size_t>();
      else if (key == "dqn_warmup") c.dqn.warmup = v.get<std::size_t>();
      else if (key == "dqn_train_interval") c.dqn.train_interval = v.get<std::size_t>();
      else if (key == "dqn_huber_delta") c.dqn.huber_delta = v.get<double>();
      else if (key == "spawn_jitter") c.spawn_jitter = v.get<double>();
      else if (key == "telemetry_noise") c.telemetry_noise = v.get<double>();
      else if (key == "timeline_samples") c.timeline_samples = v.get<int>();
      else if (key == "growth_interval") c.growth_interval = v.get<std::int64_t>();
      else if (key == "loss_interval") c.loss_interval = v.get<std::int64_t>();
      else if (key == "jobs") c.jobs = v.get<int>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

}  // namespace adstest
