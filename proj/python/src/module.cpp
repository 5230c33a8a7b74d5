#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adstest/campaign.hpp"
#include "adstest/results.hpp"
#include "adstest/selftest.hpp"
#include "adstest/stats.hpp"

namespace py = pybind11;
using namespace adstest;

namespace {

ResultMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("matrix needs at least one row");
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw std::invalid_argument("ragged matrix");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return ResultMatrix(rows.size(), rows.front().size(), flat);
}

py::dict repetition_dict(const RepetitionResult& r) {
  py::dict d;
  d["index"] = r.index;
  d["seed"] = r.seed;
  d["failed"] = r.failed;
  d["error"] = r.error;
  d["ticks"] = r.ticks;
  d["episodes"] = r.episodes;
  py::dict totals;
  for (auto q : kAllRequirements) totals[py::str(std::string(to_string(q)))] = r.totals[index_of(q)];
  d["violations"] = totals;
  d["violations_total"] = r.total_violations();
  py::list timeline;
  for (const auto& p : r.timeline) timeline.append(py::make_tuple(p.step, p.coverage, p.violations_total));
  d["timeline"] = timeline;
  py::list actions;
  for (auto a : r.actions) actions.append(index_of(a));
  d["actions"] = actions;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reinforcement-learning test generation for a driving microworld";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "run_campaign",
      [](const std::string& config_json, const std::string& out) {
        CampaignConfig c;
        apply_config_json(c, config_json);
        c.validate();
        CampaignResult res;
        {
          py::gil_scoped_release release;
          res = run_campaign(c);
          if (!out.empty()) write_campaign(res, out);
        }
        py::dict d;
        d["id"] = c.id();
        py::list reps;
        for (const auto& r : res.repetitions) reps.append(repetition_dict(r));
        d["repetitions"] = reps;
        return d;
      },
      py::arg("config_json") = "{}", py::arg("out") = "",
      "Run a campaign from flat JSON config keys; writes the result tree when `out` is set.");

  m.def("config_json", [](const std::string& overrides) {
    CampaignConfig c;
    apply_config_json(c, overrides);
    return config_to_json(c);
  }, py::arg("overrides") = "{}", "Full config echo after applying overrides.");

  m.def(
      "compare",
      [](const std::vector<std::string>& dirs, const std::string& metric) {
        std::vector<LoadedCampaign> cs;
        for (const auto& d : dirs) cs.push_back(load_campaign(d));
        return compare_campaigns(cs, parse_metric(metric)).to_json();
      },
      py::arg("dirs"), py::arg("metric") = "violations", "Friedman and Dunn report as a JSON string.");

  m.def("friedman", [](const std::vector<std::vector<double>>& rows) {
    const auto f = friedman(to_matrix(rows));
    py::dict d;
    d["statistic"] = f.statistic;
    d["df"] = f.df;
    d["p"] = f.p_value;
    d["mean_ranks"] = f.mean_ranks;
    d["tie_correction"] = f.tie_correction;
    return d;
  }, py::arg("rows"), "Rows are blocks (repetitions), columns treatments.");

  m.def("dunn", [](const std::vector<std::vector<double>>& rows) {
    py::list out;
    for (const auto& p : dunn(to_matrix(rows))) {
      py::dict d;
      d["a"] = p.a;
      d["b"] = p.b;
      d["z"] = p.z;
      d["p_raw"] = p.p_raw;
      d["p_adj"] = p.p_adjusted;
      d["greater"] = p.greater ? py::object(py::int_(*p.greater)) : py::object(py::none());
      out.append(d);
    }
    return out;
  }, py::arg("rows"));

  m.def("summarize", [](const std::vector<double>& x) {
    const auto s = summarize(x);
    py::dict d;
    d["n"] = s.n;
    d["mean"] = s.mean;
    d["std"] = s.std_dev ? py::object(py::float_(*s.std_dev)) : py::object(py::none());
    d["sem"] = s.sem ? py::object(py::float_(*s.sem)) : py::object(py::none());
    d["median"] = s.median;
    d["q1"] = s.q1;
    d["q3"] = s.q3;
    d["iqr"] = s.iqr;
    return d;
  }, py::arg("values"));

  m.def("auc", [](const std::vector<double>& values, double v_max) { return auc_normalized(values, v_max); },
        py::arg("values"), py::arg("v_max"), "Evenly spaced samples.");

  m.def("reward", [](const std::string& req, double dcl, double dv, double dp, double ds, double dt_norm,
                     bool tr_violated, bool violated) {
    return reward(parse_requirement(req), DistanceVector{dcl, dv, dp, ds, dt_norm, tr_violated}, violated);
  }, py::arg("requirement"), py::arg("dcl") = 0.0, py::arg("dv") = 0.0, py::arg("dp") = 0.0,
     py::arg("ds") = 0.0, py::arg("dt_norm") = 1.0, py::arg("tr_violated") = false, py::arg("violated") = false);

  m.def("state_key", [](const std::vector<double>& obs, std::optional<int> decimals) {
    if (obs.size() != kObservationSize) throw std::invalid_argument("observation needs 19 values");
    Observation o{};
    std::copy(obs.begin(), obs.end(), o.begin());
    return encode_state_key(o, decimals);
  }, py::arg("obs"), py::arg("decimals") = py::none());

  m.def("contextual_bandit", [](std::int64_t steps, std::uint64_t seed) {
    BanditReport r;
    {
      py::gil_scoped_release release;
      r = run_contextual_bandit(bandit_config(), steps, seed);
    }
    py::dict d;
    d["final_accuracy"] = r.final_accuracy;
    d["best_accuracy"] = r.best_accuracy;
    d["first_step_above"] = r.first_step_above;
    d["curve"] = r.curve;
    return d;
  }, py::arg("steps") = 20000, py::arg("seed") = 1);

  m.def("selftest", [] {
    py::list out;
    for (const auto& c : run_selftest()) out.append(py::make_tuple(c.name, c.ok, c.detail));
    return out;
  });
}
