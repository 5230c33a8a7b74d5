#include "adstest/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "adstest/format.hpp"

namespace adstest {

std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::kRandom:
      return "random";
    case Technique::kQ:
      return "q";
    case Technique::kMorlot:
      return "morlot";
    case Technique::kDqn:
      return "dqn";
  }
  return "?";
}

Technique parse_technique(std::string_view text) {
  for (auto t : {Technique::kRandom, Technique::kQ, Technique::kMorlot, Technique::kDqn}) {
    if (to_string(t) == text) return t;
  }
  throw ConfigError("unknown technique '" + std::string(text) + "'");
}

std::string_view to_string(CampaignMode m) {
  return m == CampaignMode::kReplication ? "replication" : "extension";
}

CampaignMode parse_campaign_mode(std::string_view text) {
  if (text == "replication") return CampaignMode::kReplication;
  if (text == "extension") return CampaignMode::kExtension;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kDestination:
      return "destination";
    case Termination::kTimeout:
      return "timeout";
    case Termination::kCollision:
      return "collision";
    case Termination::kOvertake:
      return "overtake";
  }
  return "?";
}

void CampaignConfig::validate() const {
  if (budget_steps <= 0) throw ConfigError("budget_steps must be positive");
  if (episode_timeout <= 0) throw ConfigError("episode_timeout must be positive");
  if (budget_steps <= episode_timeout) throw ConfigError("budget_steps must exceed episode_timeout");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (!(epsilon.anneal_fraction > 0.0 && epsilon.anneal_fraction <= 1.0)) {
    throw ConfigError("anneal fraction must lie in (0, 1]");
  }
  for (double e : {epsilon.start, epsilon.end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon values must lie in [0, 1]");
  }
  if (action_repeat < 1) throw ConfigError("action_repeat must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(dqn.gamma >= 0.0 && dqn.gamma <= 1.0)) throw ConfigError("dqn gamma must lie in [0, 1]");
  if (!(dqn.learning_rate > 0.0)) throw ConfigError("dqn learning rate must be positive");
  if (dqn.batch_size == 0 || dqn.buffer_capacity == 0 || dqn.target_sync_period == 0 || dqn.train_interval == 0) {
    throw ConfigError("dqn batch size, capacity, sync period and train interval must be positive");
  }
  if (dqn.batch_size > dqn.buffer_capacity) throw ConfigError("dqn batch size exceeds buffer capacity");
  if (!(spawn_jitter >= 0.0)) throw ConfigError("spawn_jitter must be non-negative");
  if (!(telemetry_noise >= 0.0)) throw ConfigError("telemetry_noise must be non-negative");
  if (timeline_samples < 1) throw ConfigError("timeline_samples must be at least 1");
  if (growth_interval < 0 || loss_interval < 1) throw ConfigError("logging intervals must be positive");
  if (jobs < 0) throw ConfigError("jobs must be non-negative");
  if (custom_route) Route check(*custom_route);
}

DetectionMode CampaignConfig::detection_mode() const {
  if (detection) return *detection;
  return technique == Technique::kRandom ? DetectionMode::kSensor : DetectionMode::kFused;
}

RequirementSet CampaignConfig::objectives() const {
  if (mode == CampaignMode::kExtension) return {Requirement::kR2Dv};
  RequirementSet all;
  for (auto r : kAllRequirements) all.insert(r);
  return all;
}

std::shared_ptr<const Route> CampaignConfig::make_route() const {
  return custom_route ? adstest::make_route(*custom_route) : builtin(route);
}

std::string CampaignConfig::id() const {
  // FNV-1a over the config echo separates campaigns that differ in any knob.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config_to_json(*this)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* kHex = "0123456789abcdef";
  std::string tag;
  for (int i = 0; i < 8; ++i) tag.push_back(kHex[(h >> (60 - 4 * i)) & 0xF]);
  const std::string route_name = custom_route ? "custom" : std::string(to_string(route));
  return std::string(to_string(technique)) + "_" + route_name + "_" + std::string(to_string(mode)) + "_" +
         std::string(to_string(detection_mode())) + "_s" + std::to_string(seed) + "_" + tag;
}

double epsilon_at(std::int64_t step, const CampaignConfig& config) {
  const auto& e = config.epsilon;
  const double horizon = e.anneal_fraction * static_cast<double>(config.budget_steps);
  const double frac = std::clamp(static_cast<double>(step) / horizon, 0.0, 1.0);
  return e.start + (e.end - e.start) * frac;
}

bool overtake_detected(const WorldState& w) {
  const double ev_s = w.route->project(w.ev.pose.x, w.ev.pose.y).s;
  const double vif_s = w.route->project(w.vif.pose.x, w.vif.pose.y).s;
  return ev_s > vif_s + w.ev.length;
}

std::int64_t RepetitionResult::total_violations() const {
  std::int64_t n = 0;
  for (auto t : totals) n += t;
  return n;
}

RequirementSet RepetitionResult::covered() const {
  RequirementSet s;
  for (auto r : kAllRequirements) {
    if (totals[index_of(r)] > 0) s.insert(r);
  }
  return s;
}

bool CampaignResult::any_failed() const {
  return std::any_of(repetitions.begin(), repetitions.end(), [](const auto& r) { return r.failed; });
}

std::vector<TimelinePoint> coverage_timeline(const std::vector<LoggedEvent>& events, std::int64_t budget_steps,
                                             std::size_t objective_count, int samples) {
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  std::vector<TimelinePoint> out;
  for (int i = 0; i <= samples; ++i) {
    TimelinePoint p;
    p.sample_index = i;
    p.step = budget_steps * i / samples;
    RequirementSet covered;
    for (const auto& e : events) {
      if (e.step <= p.step) {
        covered.insert(e.requirement);
        ++p.violations_total;
      }
    }
    p.coverage = objective_count ? static_cast<double>(covered.size()) / static_cast<double>(objective_count) : 0.0;
    out.push_back(p);
  }
  return out;
}

namespace {

using RewardVec = std::array<double, kNumRequirements>;

double scalarize(const RewardVec& r, const RequirementSet& objectives) {
  double s = 0.0;
  for (auto q : kAllRequirements) {
    if (objectives.contains(q)) s += r[index_of(q)];
  }
  return s;
}

struct Feedback {
  const WorldState* next = nullptr;
  ActionId action = ActionId::kNoOp;
  RewardVec rewards{};
  RequirementSet latched;
  bool terminal = false;      // no bootstrap from the next state
  bool episode_over = false;  // next decision starts from a reset world
  std::int64_t step = 0;      // global steps consumed so far
  double epsilon = 0.0;
};

class Agent {
 public:
  virtual ~Agent() = default;
  /// Observation as the learner sees it.
  static Observation observe(const WorldState& w, const CampaignConfig& c, AgentRng& rng) {
    Observation o = encode_observation(w, c.frame);
    add_telemetry_noise(o, c.telemetry_noise, rng.noise);
    return o;
  }
  virtual ActionId select(const WorldState& w, double epsilon, AgentRng& rng) = 0;
  virtual void learn(const Feedback&, AgentRng&) {}
  virtual bool tabular() const { return false; }
  virtual GrowthPoint growth(std::int64_t step) const { return {step, 0, {}}; }
  virtual std::optional<Requirement> chosen() const { return std::nullopt; }
  virtual const MorlotState* morlot() const { return nullptr; }
  virtual bool take_loss(LossPoint&) { return false; }
};

class RandomAgent : public Agent {
 public:
  ActionId select(const WorldState&, double, AgentRng& rng) override { return random_select(rng.action); }
};

class TabularBase : public Agent {
 public:
  TabularBase(const CampaignConfig& c) : decimals_(c.key_decimals), cfg_(c) {}
  bool tabular() const override { return true; }

 protected:
  const std::string& key_for(const WorldState& w, AgentRng& rng) {
    if (!key_) {
      obs_ = observe(w, cfg_, rng);
      key_ = encode_state_key(obs_, decimals_);
    }
    return *key_;
  }
  // Encodes the next state and makes it current.
  Transition advance(const Feedback& f, AgentRng& rng) {
    Transition t;
    t.state_key = std::move(*key_);
    t.observation = obs_;
    t.action = f.action;
    t.rewards = f.rewards;
    t.next_observation = observe(*f.next, cfg_, rng);
    t.next_state_key = encode_state_key(t.next_observation, decimals_);
    t.done = f.terminal;
    key_.reset();
    if (!f.episode_over) {
      obs_ = t.next_observation;
      key_ = t.next_state_key;
    }
    return t;
  }

  KeyPrecision decimals_;
  const CampaignConfig& cfg_;
  std::optional<std::string> key_;
  Observation obs_{};
};

class QAgent : public TabularBase {
 public:
  QAgent(const CampaignConfig& c) : TabularBase(c), objectives_(c.objectives()) {}
  ActionId select(const WorldState& w, double epsilon, AgentRng& rng) override {
    return q_select(table_, key_for(w, rng), epsilon, rng, cfg_.tie_break);
  }
  void learn(const Feedback& f, AgentRng& rng) override {
    const Transition t = advance(f, rng);
    q_update(table_, t.state_key, t.action, scalarize(t.rewards, objectives_), t.next_state_key, cfg_.alpha,
             cfg_.gamma, t.done);
  }
  GrowthPoint growth(std::int64_t step) const override {
    return {step, static_cast<std::int64_t>(table_.visits()), {static_cast<std::int64_t>(table_.distinct_states())}};
  }

 private:
  RequirementSet objectives_;
  QTable table_;
};

class MorlotAgent : public TabularBase {
 public:
  MorlotAgent(const CampaignConfig& c) : TabularBase(c) { m_.uncovered = c.objectives(); }
  ActionId select(const WorldState& w, double epsilon, AgentRng& rng) override {
    const std::string& key = key_for(w, rng);
    auto pick = morlot_select(m_, key, epsilon, rng, cfg_.tie_break);
    if (!pick) {
      chosen_.reset();
      return random_select(rng.action);
    }
    chosen_ = pick->second;
    return pick->first;
  }
  void learn(const Feedback& f, AgentRng& rng) override {
    const Transition t = advance(f, rng);
    morlot_update(m_, t, f.latched, cfg_.alpha, cfg_.gamma);
  }
  GrowthPoint growth(std::int64_t step) const override {
    GrowthPoint g{step, 0, {}};
    for (const auto& t : m_.tables) {
      g.visits += static_cast<std::int64_t>(t.visits());
      g.distinct.push_back(static_cast<std::int64_t>(t.distinct_states()));
    }
    return g;
  }
  std::optional<Requirement> chosen() const override { return chosen_; }
  const MorlotState* morlot() const override { return &m_; }

 private:
  MorlotState m_;
  std::optional<Requirement> chosen_;
};

class DeepAgent : public Agent {
 public:
  DeepAgent(const CampaignConfig& c, const Route& route, AgentRng& rng)
      : cfg_(c),
        objectives_(c.objectives()),
        scaler_(route, c.frame),
        agent_(c.dqn, kObservationSize, kNumActions, rng.init) {}

  ActionId select(const WorldState& w, double epsilon, AgentRng& rng) override {
    if (!have_obs_) {
      obs_ = scaler_.normalize(observe(w, cfg_, rng));
      have_obs_ = true;
    }
    return dqn_select(agent_, obs_, epsilon, rng);
  }

  void learn(const Feedback& f, AgentRng& rng) override {
    DqnTransition t;
    t.obs = obs_;
    t.action = f.action;
    t.reward = scalarize(f.rewards, objectives_);
    t.next_obs = scaler_.normalize(observe(*f.next, cfg_, rng));
    t.done = f.terminal;
    agent_.buffer().push(t);
    obs_ = t.next_obs;
    have_obs_ = !f.episode_over;
    if (++decisions_ % cfg_.dqn.train_interval != 0) return;
    if (auto loss = agent_.train_step(rng.replay)) {
      loss_sum_ += *loss;
      if (++loss_count_ == cfg_.loss_interval) {
        pending_ = LossPoint{f.step, loss_sum_ / static_cast<double>(loss_count_), f.epsilon};
        loss_sum_ = 0.0;
        loss_count_ = 0;
      }
    }
  }

  bool take_loss(LossPoint& out) override {
    if (!pending_) return false;
    out = *pending_;
    pending_.reset();
    return true;
  }

 private:
  const CampaignConfig& cfg_;
  RequirementSet objectives_;
  ObservationScaler scaler_;
  DqnAgent agent_;
  Observation obs_{};
  bool have_obs_ = false;
  std::uint64_t decisions_ = 0;
  double loss_sum_ = 0.0;
  std::int64_t loss_count_ = 0;
  std::optional<LossPoint> pending_;
};

std::unique_ptr<Agent> make_agent(const CampaignConfig& c, const Route& route, AgentRng& rng) {
  switch (c.technique) {
    case Technique::kRandom:
      return std::make_unique<RandomAgent>();
    case Technique::kQ:
      return std::make_unique<QAgent>(c);
    case Technique::kMorlot:
      return std::make_unique<MorlotAgent>(c);
    case Technique::kDqn:
      return std::make_unique<DeepAgent>(c, route, rng);
  }
  throw ConfigError("unknown technique");
}

void apply_spawn_jitter(WorldState& w, double j, Rng& rng) {
  auto shift = [&](Pose2D& p) {
    p.x += j * (2.0 * rng.uniform() - 1.0);
    p.y += j * (2.0 * rng.uniform() - 1.0);
    p.heading = normalize_angle(p.heading + 0.1 * j * (2.0 * rng.uniform() - 1.0));
  };
  shift(w.ev.pose);
  shift(w.vif.pose);
  shift(w.ped.pose);
}

RequirementSet restrict(const RequirementSet& s, const RequirementSet& objectives) {
  RequirementSet out;
  for (auto r : kAllRequirements) {
    if (s.contains(r) && objectives.contains(r)) out.insert(r);
  }
  return out;
}

// Mutable state of one repetition while episodes run.
struct Runner {
  const CampaignConfig& cfg;
  std::shared_ptr<const Route> route;
  RepetitionResult& res;
  AgentRng rng;
  std::unique_ptr<Agent> agent;
  RequirementSet objectives;
  DetectionMode mode;
  std::int64_t step = 0;
  std::int64_t growth_interval;
  std::int64_t next_growth = 0;

  Runner(const CampaignConfig& c, RepetitionResult& r, std::uint64_t seed)
      : cfg(c),
        route(c.make_route()),
        res(r),
        rng(seed),
        objectives(c.objectives()),
        mode(c.detection_mode()) {
    agent = make_agent(cfg, *route, rng);
    growth_interval = cfg.growth_interval > 0 ? cfg.growth_interval : std::max<std::int64_t>(1, cfg.budget_steps / 100);
    next_growth = growth_interval;
  }

  void record_growth() {
    if (!agent->tabular()) return;
    while (step >= next_growth) {
      res.growth.push_back(agent->growth(step));
      next_growth += growth_interval;
    }
  }

  void record_choice(std::int64_t at) {
    const MorlotState* m = agent->morlot();
    if (!m) return;
    const auto c = agent->chosen();
    if (!res.choices.empty() && res.choices.back().chosen == c) return;
    // Reward and uncovered set as seen by the selection.
    res.choices.push_back({at, c, choice_reward_, choice_uncovered_});
  }

  EpisodeLog run_episode(std::int64_t episode, const std::vector<ActionId>* script) {
    WorldState w = reset_scenario(route, cfg.sim);
    if (cfg.spawn_jitter > 0.0) apply_spawn_jitter(w, cfg.spawn_jitter, rng.scenario);
    EpisodeLog log;
    log.episode = episode;
    log.start_step = step;
    log.vif_path.push_back({w.vif.pose.x, w.vif.pose.y});
    ViolationLatch latch;
    std::array<ViolationLatch, 3> shadow;
    bool ended = false;
    std::size_t decision = 0;

    while (!ended) {
      const double eps = epsilon_at(step, cfg);
      ActionId a = ActionId::kNoOp;
      if (script) {
        if (decision < script->size()) a = (*script)[decision];
      } else {
        if (const MorlotState* m = agent->morlot()) {
          choice_reward_ = m->last_reward;
          choice_uncovered_ = m->uncovered;
        }
        a = agent->select(w, eps, rng);
        record_choice(step);
        res.actions.push_back(a);
      }
      ++decision;

      RewardVec held{};
      held.fill(-1.0);
      RequirementSet latched_now;
      for (int k = 0; k < cfg.action_repeat && !ended; ++k) {
        w = apply_action(w, a);
        w = simulate_tick(w, ads_control(w));
        const std::int64_t tick_step = step++;
        ++log.ticks;
        log.vif_path.push_back({w.vif.pose.x, w.vif.pose.y});

        const DistanceVector d = compute_distances(w);
        const SensorReadings s = read_sensors(w);
        const RequirementSet in_lane = restrict(detect_violations(s, d, mode, false), objectives);
        if (cfg.mode == CampaignMode::kExtension && in_lane.contains(Requirement::kR2Dv)) {
          log.cause = Termination::kCollision;
          ended = true;
        } else if (cfg.mode == CampaignMode::kExtension && overtake_detected(w)) {
          log.cause = Termination::kOvertake;
          ended = true;
        } else if (d.dt_norm <= 0.0) {
          log.cause = Termination::kDestination;
          ended = true;
        } else if (log.ticks >= cfg.episode_timeout || step >= cfg.budget_steps) {
          log.cause = Termination::kTimeout;
          ended = true;
        }

        const RequirementSet detected = restrict(detect_violations(s, d, mode, ended), objectives);
        const RequirementSet fresh = latch.update(detected);
        for (auto r : kAllRequirements) {
          if (!fresh.contains(r)) continue;
          res.events.push_back({episode, log.ticks, tick_step, r});
          ++res.totals[index_of(r)];
          latched_now.insert(r);
        }
        for (auto m : {DetectionMode::kSensor, DetectionMode::kThreshold, DetectionMode::kFused}) {
          const auto mi = static_cast<std::size_t>(m);
          const RequirementSet f = shadow[mi].update(restrict(detect_violations(s, d, m, ended), objectives));
          for (auto r : kAllRequirements) res.shadow_totals[mi][index_of(r)] += f.contains(r);
        }

        const DistanceVector dr = mode == DetectionMode::kFused ? fuse_distances(d, s) : d;
        const RewardVec r = rewards(dr, detected);
        for (std::size_t i = 0; i < kNumRequirements; ++i) held[i] = std::max(held[i], r[i]);
        if (cfg.keep_tick_records) log.records.push_back({log.ticks, a, d, r});
      }

      if (!script) {
        Feedback f;
        f.next = &w;
        f.action = a;
        f.rewards = held;
        f.latched = latched_now;
        f.terminal = ended && log.cause != Termination::kTimeout;
        f.episode_over = ended;
        f.step = step;
        f.epsilon = eps;
        agent->learn(f, rng);
        LossPoint lp;
        if (agent->take_loss(lp)) res.loss.push_back(lp);
        record_growth();
      }
    }
    log.violations = latch.latched();
    ++res.terminations[static_cast<std::size_t>(log.cause)];
    final_world_ = w;
    return log;
  }

  std::array<double, kNumRequirements> choice_reward_{};
  RequirementSet choice_uncovered_;
  WorldState final_world_;
};

}  // namespace

EpisodeLog run_scripted_episode(const CampaignConfig& config, const ScriptedEpisode& script, WorldState* final_world) {
  config.validate();
  CampaignConfig c = config;
  c.technique = Technique::kRandom;
  c.keep_tick_records = true;
  RepetitionResult res;
  Runner runner(c, res, c.seed);
  EpisodeLog log = runner.run_episode(0, &script.actions);
  if (final_world) *final_world = runner.final_world_;
  return log;
}

RepetitionResult run_repetition(const CampaignConfig& config, std::int64_t index) {
  RepetitionResult res;
  res.index = index;
  res.seed = config.seed + static_cast<std::uint64_t>(index);
  try {
    Runner runner(config, res, res.seed);
    std::int64_t episode = 0;
    while (runner.step < config.budget_steps) {
      EpisodeLog log = runner.run_episode(episode++, nullptr);
      if (!log.violations.empty()) {
        EpisodeLog kept = log;
        kept.records.clear();
        res.failing_episodes.push_back(std::move(kept));
      }
      if (config.keep_tick_records) res.episodes_log.push_back(std::move(log));
    }
    res.ticks = runner.step;
    res.episodes = episode;
    res.timeline = coverage_timeline(res.events, config.budget_steps, config.objectives().size(),
                                     config.timeline_samples);
  } catch (const std::exception& e) {
    res.failed = true;
    res.error = e.what();
  }
  return res;
}

CampaignResult run_campaign(const CampaignConfig& config) {
  config.validate();
  CampaignResult out;
  out.config = config;
  const auto n = static_cast<std::size_t>(config.repetitions);
  out.repetitions.resize(n);
  unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs) : std::thread::hardware_concurrency();
  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(n));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      out.repetitions[i] = run_repetition(config, static_cast<std::int64_t>(i));
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace adstest
