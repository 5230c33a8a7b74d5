#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "adstest/agents.hpp"

using namespace adstest;

namespace {

Observation filled(double v) {
  Observation o;
  o.fill(v);
  return o;
}

std::string first_field(const std::string& key) { return key.substr(0, key.find('|')); }

}  // namespace

TEST(Observation, AbsoluteAtResetEvAtRest) {
  const Observation o = encode_observation(reset_scenario(builtin(RouteId::kStraight)), Frame::kAbsolute);
  EXPECT_EQ(o[slot(Slot::kEvSpeed)], 0.0);
  EXPECT_EQ(o[slot(Slot::kVifX)], 15.0);
  EXPECT_EQ(o[slot(Slot::kSunAltitude)], 60.0);
}

TEST(Observation, RelativeVifStraightAhead) {
  WorldState w = reset_scenario(builtin(RouteId::kStraight));
  w.vif.pose = {w.ev.pose.x + 10.0, w.ev.pose.y, 0.0};
  const Observation o = encode_observation(w, Frame::kRelative);
  EXPECT_DOUBLE_EQ(o[slot(Slot::kVifX)], 10.0);
  EXPECT_DOUBLE_EQ(o[slot(Slot::kVifY)], 0.0);
}

TEST(Observation, RelativeIgnoresTranslation) {
  RouteSpec moved = builtin_route(RouteId::kStraight);
  auto shift = [](Pose2D& p) {
    p.x += 50.0;
    p.y += 20.0;
  };
  for (auto& p : moved.centerline) shift(p);
  for (auto& o : moved.obstacles) {
    o.cx += 50.0;
    o.cy += 20.0;
  }
  shift(moved.ev_start);
  shift(moved.vif_start);
  shift(moved.ped_start);
  shift(moved.destination);

  const WorldState a = reset_scenario(builtin(RouteId::kStraight));
  const WorldState b = reset_scenario(make_route(moved));
  EXPECT_EQ(encode_observation(a, Frame::kRelative), encode_observation(b, Frame::kRelative));
  EXPECT_NE(encode_observation(a, Frame::kAbsolute), encode_observation(b, Frame::kAbsolute));
}

TEST(Observation, ScalerMapsIntoUnitBox) {
  const auto route = builtin(RouteId::kLeftTurn);
  const ObservationScaler scaler(*route, Frame::kAbsolute);
  WorldState w = reset_scenario(route);
  for (int i = 0; i < 300; ++i) {
    w = apply_action(w, action_from_index(static_cast<std::size_t>(i * 7) % kNumActions));
    w = simulate_tick(w, ads_control(w));
    for (double v : scaler.normalize(encode_observation(w, Frame::kAbsolute))) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(StateKey, RoundsAtRequestedDecimals) {
  Observation o = filled(0.0);
  o[0] = 1.234;
  EXPECT_EQ(first_field(encode_state_key(o, 1)), "1.2");
  EXPECT_EQ(first_field(encode_state_key(o, 0)), "1");
  EXPECT_EQ(first_field(encode_state_key(o)), "1.234");
}

TEST(StateKey, DeterministicAndNineteenFields) {
  Observation o;
  for (std::size_t i = 0; i < kObservationSize; ++i) o[i] = 0.1 * static_cast<double>(i) - 0.7;
  const std::string k = encode_state_key(o);
  EXPECT_EQ(k, encode_state_key(o));
  EXPECT_EQ(std::count(k.begin(), k.end(), '|'), 18);
}

TEST(StateKey, FullPrecisionSeparatesTinyDifferences) {
  Observation a = filled(3.0);
  Observation b = a;
  b[7] += 1e-9;
  EXPECT_NE(encode_state_key(a), encode_state_key(b));
}

TEST(StateKey, FullPrecisionRoundTrips) {
  Observation o;
  for (std::size_t i = 0; i < kObservationSize; ++i) o[i] = std::sqrt(2.0 + static_cast<double>(i)) * (i % 2 ? -1 : 1);
  EXPECT_EQ(parse_state_key(encode_state_key(o)), o);
}

TEST(StateKey, NegativeZeroSharesKeyWithZero) {
  Observation a = filled(0.0);
  Observation b = a;
  b[0] = -0.2;
  EXPECT_EQ(encode_state_key(a, 0), encode_state_key(b, 0));
  b[0] = -0.0;
  EXPECT_EQ(encode_state_key(a), encode_state_key(b));
}

TEST(StateKey, PrecisionParsing) {
  EXPECT_FALSE(parse_key_precision("full").has_value());
  EXPECT_EQ(parse_key_precision("0"), 0);
  EXPECT_EQ(parse_key_precision("3"), 3);
  EXPECT_THROW(parse_key_precision("-1"), ConfigError);
  EXPECT_THROW(parse_key_precision("two"), ConfigError);
}

TEST(RandomSelect, Reproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(random_select(a), random_select(b));
}

TEST(RandomSelect, DistinctSeedsDiffer) {
  Rng a(1), b(2);
  std::vector<ActionId> pa, pb;
  for (int i = 0; i < 20; ++i) {
    pa.push_back(random_select(a));
    pb.push_back(random_select(b));
  }
  EXPECT_NE(pa, pb);
}

TEST(RandomSelect, OneDrawPerCall) {
  Rng a(5), b(5);
  random_select(a);
  b.next();
  EXPECT_EQ(a, b);
}

TEST(RandomSelect, UniformChiSquare) {
  Rng rng(2024);
  std::array<int, kNumActions> counts{};
  const int draws = 17000;
  for (int i = 0; i < draws; ++i) ++counts[index_of(random_select(rng))];
  const double expected = draws / 17.0;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 1% point of chi-square with 16 degrees of freedom.
  EXPECT_LT(chi2, 32.0);
}

TEST(QSelect, FullEpsilonReplaysRandomStream) {
  AgentRng learner(77);
  Rng baseline = AgentRng(77).action;
  QTable table;
  for (int i = 0; i < 500; ++i) {
    const std::string key = "k" + std::to_string(i % 13);
    table.row(key)[3] = 5.0;
    EXPECT_EQ(q_select(table, key, 1.0, learner), random_select(baseline));
  }
}

TEST(QSelect, GreedyPicksArgmax) {
  AgentRng rng(1);
  QTable t;
  t.row("s")[3] = 5.0;
  EXPECT_EQ(q_select(t, "s", 0.0, rng), ActionId::kVifSteerLeft);
}

TEST(QSelect, UnseenKeyLowestTieIsActionZero) {
  AgentRng rng(1);
  QTable t;
  EXPECT_EQ(q_select(t, "new", 0.0, rng), action_from_index(0));
  EXPECT_EQ(t.distinct_states(), 1u);
  EXPECT_EQ(t.visits(), 1u);
}

TEST(QSelect, RandomTieBreakStaysAmongMaxima) {
  AgentRng rng(3);
  QTable t;
  t.row("s")[2] = 1.0;
  t.row("s")[9] = 1.0;
  std::set<ActionId> seen;
  for (int i = 0; i < 200; ++i) seen.insert(q_select(t, "s", 0.0, rng, TieBreak::kRandom));
  EXPECT_EQ(seen, (std::set<ActionId>{action_from_index(2), action_from_index(9)}));
}

TEST(QTable, RowCreatedOnce) {
  QTable t;
  t.row("a")[0] = 1.0;
  t.row("a");
  t.row("b");
  EXPECT_EQ(t.distinct_states(), 2u);
  EXPECT_EQ(t.row("a")[0], 1.0);
}

TEST(QTable, CsvExport) {
  QTable t;
  t.row("b")[16] = 2.5;
  t.row("a");
  std::ostringstream out;
  t.write_csv(out);
  std::istringstream in(out.str());
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 17);
  EXPECT_EQ(first.substr(0, 4), "\"a\",");
  EXPECT_EQ(second.substr(second.rfind(',') + 1), "2.5");
}

TEST(QUpdate, HandExamples) {
  QTable t;
  EXPECT_DOUBLE_EQ(q_update(t, "s", ActionId::kNoOp, 1.0, "n", 0.1, 0.99), 0.1);

  QTable u;
  u.row("s")[0] = 1.0;
  u.row("n")[5] = 4.0;
  EXPECT_DOUBLE_EQ(q_update(u, "s", action_from_index(0), 2.0, "n", 1.0, 0.5), 4.0);
}

TEST(QUpdate, ZeroAlphaLeavesValue) {
  QTable t;
  t.row("s")[4] = 7.0;
  t.row("n")[0] = 100.0;
  EXPECT_EQ(q_update(t, "s", action_from_index(4), 3.0, "n", 0.0, 0.9), 7.0);
}

TEST(QUpdate, ExactlyOneCellChanges) {
  QTable t;
  t.row("n")[1] = 2.0;
  const QRow before = t.row("s");
  q_update(t, "s", action_from_index(6), 1.0, "n", 0.5, 0.9);
  const QRow after = t.row("s");
  for (std::size_t i = 0; i < kNumActions; ++i) {
    if (i == 6) EXPECT_NE(after[i], before[i]);
    else EXPECT_EQ(after[i], before[i]);
  }
}

TEST(QUpdate, ContractsToFixedTarget) {
  QTable t;
  t.row("n")[2] = 3.0;
  const double target = 1.5 + 0.9 * 3.0;
  int it = 0;
  double q = 0.0;
  while (std::abs(q - target) > 1e-9 && it < 2000) {
    q = q_update(t, "s", ActionId::kNoOp, 1.5, "n", 0.1, 0.9);
    ++it;
  }
  EXPECT_LE(it, 2000);
  EXPECT_NEAR(q, target, 1e-9);
}

TEST(Morlot, ChoosesHighestLastReward) {
  MorlotState m;
  m.last_reward = {1.0, 12.1, 2.0, 6.8, 3.0, 0.0};
  AgentRng rng(0);
  EXPECT_EQ(morlot_select(m, "s", 0.0, rng)->second, Requirement::kR2Dv);
  m.uncovered.erase(Requirement::kR2Dv);
  EXPECT_EQ(morlot_select(m, "s", 0.0, rng)->second, Requirement::kR4Ds);
}

TEST(Morlot, SingletonAndEmpty) {
  MorlotState m;
  m.uncovered = {Requirement::kR6Tr};
  m.last_reward = {9, 9, 9, 9, 9, 0};
  AgentRng rng(0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(morlot_select(m, "s", 0.5, rng)->second, Requirement::kR6Tr);
  m.uncovered = {};
  EXPECT_FALSE(morlot_select(m, "s", 0.5, rng).has_value());
}

TEST(Morlot, InitialChoiceFallsToOrdering) {
  MorlotState m;
  EXPECT_EQ(morlot_objective(m), Requirement::kR1Dcl);
}

TEST(Morlot, UpdateTouchesUncoveredTablesAndLatches) {
  MorlotState m;
  Transition t;
  t.state_key = "s";
  t.next_state_key = "n";
  t.action = action_from_index(2);
  t.rewards = {1, 2, 3, 4, 5, 6};
  morlot_update(m, t, {}, 0.1, 0.99);
  for (auto r : kAllRequirements) {
    EXPECT_DOUBLE_EQ(m.tables[index_of(r)].row("s")[2], 0.1 * t.rewards[index_of(r)]);
  }
  EXPECT_EQ(m.last_reward, t.rewards);

  morlot_update(m, t, {Requirement::kR2Dv}, 0.1, 0.99);
  EXPECT_FALSE(m.uncovered.contains(Requirement::kR2Dv));
  const double frozen = m.tables[index_of(Requirement::kR2Dv)].row("s")[2];
  morlot_update(m, t, {}, 0.1, 0.99);
  EXPECT_EQ(m.tables[index_of(Requirement::kR2Dv)].row("s")[2], frozen);
  EXPECT_NE(morlot_objective(m), Requirement::kR2Dv);
}

TEST(Morlot, NeverSelectsCoveredTable) {
  MorlotState m;
  AgentRng rng(11);
  Rng r(12);
  for (int step = 0; step < 400; ++step) {
    for (auto& v : m.last_reward) v = r.uniform() * 100;
    const auto pick = morlot_select(m, "k" + std::to_string(step % 5), 0.3, rng);
    if (!pick) break;
    EXPECT_TRUE(m.uncovered.contains(pick->second));
    if (step % 60 == 59) m.uncovered.erase(pick->second);
  }
}

TEST(Noise, KinematicSlotsOnly) {
  Observation o = filled(1.0);
  Rng rng(9);
  add_telemetry_noise(o, 1e-6, rng);
  for (std::size_t i = 0; i < kObservationSize; ++i) {
    if (i < slot(Slot::kFog)) EXPECT_NEAR(o[i], 1.0, 1e-6);
    else EXPECT_EQ(o[i], 1.0);
  }
  EXPECT_NE(o[0], 1.0);
}
