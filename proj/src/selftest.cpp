#include "adstest/selftest.hpp"

#include <cmath>

#include "adstest/deepq.hpp"
#include "adstest/format.hpp"
#include "adstest/microworld.hpp"
#include "adstest/stats.hpp"

namespace adstest {

namespace {

SelfCheck check(std::string name, bool ok, std::string detail = {}) {
  return {std::move(name), ok, std::move(detail)};
}

}  // namespace

std::vector<SelfCheck> run_selftest() {
  std::vector<SelfCheck> out;

  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Mlp net = Mlp::initialized({kObservationSize, 16, 16, kNumActions}, rng);
    worst = std::max(worst, grad_check(net, rng).max_relative_error);
  }
  out.push_back(check("grad_check", worst < 1e-4, "max relative error " + format_number(worst)));

  // One treatment always best, one always worst: closed form 40 on 2 df.
  {
    std::vector<double> v;
    for (int i = 0; i < 20; ++i) v.insert(v.end(), {1.0 + i, 2.0 + i, 3.0 + i});
    const auto f = friedman(ResultMatrix(20, 3, v));
    out.push_back(check("friedman_ordered", f.statistic == 40.0 && f.df == 2 && std::abs(f.p_value - std::exp(-20.0)) < 1e-15,
                        "stat " + format_number(f.statistic) + " p " + format_number(f.p_value)));
    const auto d = dunn(ResultMatrix(20, 3, v));
    bool extreme = false;
    for (const auto& p : d) extreme = extreme || (p.a == 0 && p.b == 2 && p.p_adjusted < 1e-4);
    out.push_back(check("dunn_ordered", extreme));
  }
  {
    const auto f = friedman(ResultMatrix(4, 3, std::vector<double>(12, 5.0)));
    bool all_one = f.p_value == 1.0 && f.statistic == 0.0;
    for (const auto& p : dunn(ResultMatrix(4, 3, std::vector<double>(12, 5.0)))) all_one = all_one && p.p_adjusted == 1.0;
    out.push_back(check("all_ties", all_one));
  }
  {
    const std::vector<double> x{1, 2, 3, 4};
    const auto s = summarize(x);
    out.push_back(check("summary", s.mean == 2.5 && s.std_dev && std::abs(*s.std_dev - std::sqrt(5.0 / 3.0)) < 1e-12));
  }

  {
    const OrientedBox a{0, 0, 0, 1, 1}, b{1, 0, 0, 1, 1}, c{10, 0, 0, 1, 1};
    out.push_back(check("sat_edge_contact", obb_intersects(a, b) && obb_intersects(a, a) && !obb_intersects(a, c)));
  }
  {
    // Perpendicular 5x2 boxes touching corner to corner along the diagonal.
    const OrientedBox a{0, 0, 0, 5, 2};
    const OrientedBox b{2.5 + 1.0, 1.0 + 2.5, M_PI / 2, 5, 2};
    const double gap = center_distance(a, b);
    out.push_back(check("confound_witness", obb_intersects(a, b) && gap > 0, "center distance " + format_number(gap)));
  }
  {
    const WorldState w1 = reset_scenario(builtin(RouteId::kRightTurn));
    const WorldState w2 = reset_scenario(builtin(RouteId::kRightTurn));
    out.push_back(check("reset_deterministic", w1 == w2));
  }
  return out;
}

}  // namespace adstest
