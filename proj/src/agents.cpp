#include "adstest/agents.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace adstest {

namespace {

constexpr double kPi = std::numbers::pi;

void append_number(std::string& out, double v, const KeyPrecision& decimals) {
  char buf[64];
  std::to_chars_result res{};
  if (decimals) {
    res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, *decimals);
  } else {
    res = std::to_chars(buf, buf + sizeof(buf), v);
  }
  char* begin = buf;
  // A negative value that rounds to zero prints as "-0..."; keep one zero key.
  if (*begin == '-' && std::all_of(begin + 1, res.ptr, [](char c) { return c == '0' || c == '.'; })) ++begin;
  out.append(begin, res.ptr);
}

}  // namespace

std::string_view to_string(Frame f) { return f == Frame::kAbsolute ? "absolute" : "relative"; }

Frame parse_frame(std::string_view text) {
  if (text == "absolute") return Frame::kAbsolute;
  if (text == "relative") return Frame::kRelative;
  throw ConfigError("unknown frame '" + std::string(text) + "'");
}

Observation encode_observation(const WorldState& w, Frame frame) {
  Observation o{};
  o[slot(Slot::kEvSpeed)] = w.ev.speed;
  o[slot(Slot::kEvAccel)] = w.ev.accel;
  o[slot(Slot::kVifSpeed)] = w.vif.speed;
  o[slot(Slot::kVifAccel)] = w.vif.accel;
  o[slot(Slot::kPedSpeed)] = w.ped.speed;
  o[slot(Slot::kFog)] = w.weather.fog;
  o[slot(Slot::kRain)] = w.weather.rain;
  o[slot(Slot::kSunAltitude)] = w.weather.sun_altitude;
  o[slot(Slot::kVifThrottle)] = w.vif.throttle;
  o[slot(Slot::kVifSteer)] = w.vif.steer;

  if (frame == Frame::kAbsolute) {
    o[slot(Slot::kEvX)] = w.ev.pose.x;
    o[slot(Slot::kEvY)] = w.ev.pose.y;
    o[slot(Slot::kEvHeading)] = w.ev.pose.heading;
    o[slot(Slot::kVifX)] = w.vif.pose.x;
    o[slot(Slot::kVifY)] = w.vif.pose.y;
    o[slot(Slot::kVifHeading)] = w.vif.pose.heading;
    o[slot(Slot::kPedX)] = w.ped.pose.x;
    o[slot(Slot::kPedY)] = w.ped.pose.y;
    o[slot(Slot::kPedHeading)] = w.ped.pose.heading;
    return o;
  }

  const PathCoord c = w.route->project(w.ev.pose.x, w.ev.pose.y);
  const double h = w.ev.pose.heading;
  auto polar = [&](const Pose2D& p, Slot range_slot, Slot bearing_slot) {
    const double dx = p.x - w.ev.pose.x;
    const double dy = p.y - w.ev.pose.y;
    o[slot(range_slot)] = std::hypot(dx, dy);
    o[slot(bearing_slot)] = normalize_angle(std::atan2(dy, dx) - h);
  };
  o[slot(Slot::kEvX)] = c.s;
  o[slot(Slot::kEvY)] = c.lateral;
  o[slot(Slot::kEvHeading)] = normalize_angle(h - c.path_heading);
  polar(w.vif.pose, Slot::kVifX, Slot::kVifY);
  o[slot(Slot::kVifHeading)] = normalize_angle(w.vif.pose.heading - h);
  polar(w.ped.pose, Slot::kPedX, Slot::kPedY);
  o[slot(Slot::kPedHeading)] = normalize_angle(w.ped.pose.heading - h);
  return o;
}

void add_telemetry_noise(Observation& obs, double amplitude, Rng& rng) {
  if (amplitude <= 0.0) return;
  for (std::size_t i = 0; i < slot(Slot::kFog); ++i) obs[i] += amplitude * (2.0 * rng.uniform() - 1.0);
}

ObservationScaler::ObservationScaler(const Route& route, Frame frame) {
  const auto& spec = route.spec();
  double xmin = spec.centerline.front().x, xmax = xmin;
  double ymin = spec.centerline.front().y, ymax = ymin;
  for (const auto& p : spec.centerline) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  constexpr double kPad = 20.0;
  xmin -= kPad;
  xmax += kPad;
  ymin -= kPad;
  ymax += kPad;

  auto set = [&](Slot s, double lo, double hi) { ranges_[slot(s)] = {lo, hi}; };
  set(Slot::kEvSpeed, 0.0, 15.0);
  set(Slot::kEvAccel, -10.0, 10.0);
  set(Slot::kVifSpeed, 0.0, 15.0);
  set(Slot::kVifAccel, -10.0, 10.0);
  set(Slot::kPedSpeed, 0.0, 3.0);
  set(Slot::kFog, 0.0, 1.0);
  set(Slot::kRain, 0.0, 1.0);
  set(Slot::kSunAltitude, -90.0, 90.0);
  set(Slot::kVifThrottle, 0.0, 1.0);
  set(Slot::kVifSteer, -1.0, 1.0);
  set(Slot::kEvHeading, -kPi, kPi);
  set(Slot::kVifHeading, -kPi, kPi);
  set(Slot::kPedHeading, -kPi, kPi);
  if (frame == Frame::kAbsolute) {
    for (Slot s : {Slot::kEvX, Slot::kVifX, Slot::kPedX}) set(s, xmin, xmax);
    for (Slot s : {Slot::kEvY, Slot::kVifY, Slot::kPedY}) set(s, ymin, ymax);
  } else {
    set(Slot::kEvX, 0.0, route.length());
    set(Slot::kEvY, -10.0, 10.0);
    set(Slot::kVifX, 0.0, 60.0);
    set(Slot::kVifY, -kPi, kPi);
    set(Slot::kPedX, 0.0, 60.0);
    set(Slot::kPedY, -kPi, kPi);
  }
}

Observation ObservationScaler::normalize(const Observation& obs) const {
  Observation out{};
  for (std::size_t i = 0; i < kObservationSize; ++i) {
    const auto [lo, hi] = ranges_[i];
    out[i] = std::clamp(2.0 * (obs[i] - lo) / (hi - lo) - 1.0, -1.0, 1.0);
  }
  return out;
}

KeyPrecision parse_key_precision(std::string_view text) {
  if (text == "full") return std::nullopt;
  int d = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec != std::errc{} || ptr != text.data() + text.size() || d < 0 || d > 17) {
    throw ConfigError("key decimals must be 'full' or an integer in [0, 17]");
  }
  return d;
}

std::string to_string(const KeyPrecision& p) { return p ? std::to_string(*p) : "full"; }

std::string encode_state_key(const Observation& obs, const KeyPrecision& decimals) {
  std::string key;
  key.reserve(kObservationSize * 12);
  for (std::size_t i = 0; i < kObservationSize; ++i) {
    if (i) key.push_back('|');
    append_number(key, obs[i], decimals);
  }
  return key;
}

Observation parse_state_key(std::string_view key) {
  Observation o{};
  std::size_t i = 0;
  const char* p = key.data();
  const char* end = key.data() + key.size();
  while (i < kObservationSize) {
    auto [next, ec] = std::from_chars(p, end, o[i]);
    if (ec != std::errc{}) throw std::invalid_argument("malformed state key");
    ++i;
    p = next;
    if (i < kObservationSize) {
      if (p == end || *p != '|') throw std::invalid_argument("malformed state key");
      ++p;
    }
  }
  if (p != end) throw std::invalid_argument("malformed state key");
  return o;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

ActionId random_select(Rng& rng) { return action_from_index(rng.below(kNumActions)); }

QRow& QTable::row(const std::string& key) {
  auto [it, inserted] = rows_.try_emplace(key);
  if (inserted) it->second.fill(0.0);
  return it->second;
}

const QRow* QTable::find(const std::string& key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

double QTable::max_value(const std::string& key) const {
  const QRow* r = find(key);
  if (!r) return 0.0;
  return *std::max_element(r->begin(), r->end());
}

void QTable::write_csv(std::ostream& out) const {
  out << "state_key";
  for (const auto& a : kActionTable) out << ',' << a.name;
  out << '\n';
  std::vector<const std::pair<const std::string, QRow>*> sorted;
  sorted.reserve(rows_.size());
  for (const auto& kv : rows_) sorted.push_back(&kv);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });
  std::string num;
  for (const auto* kv : sorted) {
    out << '"' << kv->first << '"';
    for (double v : kv->second) {
      num.clear();
      append_number(num, v, std::nullopt);
      out << ',' << num;
    }
    out << '\n';
  }
}

std::size_t argmax_lowest(const QRow& row) {
  return static_cast<std::size_t>(std::distance(row.begin(), std::max_element(row.begin(), row.end())));
}

std::string_view to_string(TieBreak t) { return t == TieBreak::kLowest ? "lowest" : "random"; }

TieBreak parse_tie_break(std::string_view text) {
  if (text == "lowest") return TieBreak::kLowest;
  if (text == "random") return TieBreak::kRandom;
  throw ConfigError("unknown tie break '" + std::string(text) + "'");
}

std::size_t argmax_random(const QRow& row, Rng& rng) {
  const double best = *std::max_element(row.begin(), row.end());
  std::size_t count = 0;
  for (double v : row) count += (v == best);
  std::size_t pick = rng.below(count);
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == best && pick-- == 0) return i;
  }
  return 0;
}

ActionId q_select(QTable& table, const std::string& key, double epsilon, AgentRng& rng, TieBreak ties) {
  QRow& row = table.row(key);
  table.count_visit();
  if (rng.explore.uniform() < epsilon) return random_select(rng.action);
  return action_from_index(ties == TieBreak::kLowest ? argmax_lowest(row) : argmax_random(row, rng.action));
}

double q_update(QTable& table, const std::string& key, ActionId action, double r,
                const std::string& next_key, double alpha, double gamma, bool terminal) {
  const double next_max = terminal ? 0.0 : table.max_value(next_key);
  double& q = table.row(key)[index_of(action)];
  q += alpha * (r + gamma * next_max - q);
  return q;
}

std::optional<Requirement> morlot_objective(const MorlotState& m) {
  std::optional<Requirement> best;
  for (auto r : kAllRequirements) {
    if (!m.uncovered.contains(r)) continue;
    if (!best || m.last_reward[index_of(r)] > m.last_reward[index_of(*best)]) best = r;
  }
  return best;
}

std::optional<std::pair<ActionId, Requirement>> morlot_select(MorlotState& m, const std::string& key,
                                                              double epsilon, AgentRng& rng, TieBreak ties) {
  const auto objective = morlot_objective(m);
  if (!objective) return std::nullopt;
  const ActionId a = q_select(m.tables[index_of(*objective)], key, epsilon, rng, ties);
  return std::make_pair(a, *objective);
}

void morlot_update(MorlotState& m, const Transition& t, const RequirementSet& latched_now,
                   double alpha, double gamma) {
  for (auto r : kAllRequirements) {
    if (!m.uncovered.contains(r)) continue;
    q_update(m.tables[index_of(r)], t.state_key, t.action, t.rewards[index_of(r)], t.next_state_key,
             alpha, gamma, t.done);
  }
  m.last_reward = t.rewards;
  for (auto r : kAllRequirements) {
    if (latched_now.contains(r)) m.uncovered.erase(r);
  }
}

}  // namespace adstest
