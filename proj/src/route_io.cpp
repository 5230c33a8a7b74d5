#include "adstest/route_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace adstest {

namespace {

using nlohmann::json;

json pose_json(const Pose2D& p) { return {{"x", p.x}, {"y", p.y}, {"heading", p.heading}}; }

Pose2D pose_from(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.value("heading", 0.0)};
}

}  // namespace

std::string route_to_json(const RouteSpec& spec, int indent) {
  json j;
  j["id"] = std::string(to_string(spec.id));
  auto& cl = j["centerline"] = json::array();
  for (const auto& p : spec.centerline) cl.push_back(pose_json(p));
  j["lane_half_width"] = spec.lane_half_width;
  auto& obs = j["obstacles"] = json::array();
  for (const auto& o : spec.obstacles) {
    obs.push_back({{"cx", o.cx}, {"cy", o.cy}, {"heading", o.heading}, {"length", o.length}, {"width", o.width}});
  }
  j["ev_start"] = pose_json(spec.ev_start);
  j["vif_start"] = pose_json(spec.vif_start);
  j["ped_start"] = pose_json(spec.ped_start);
  j["destination"] = pose_json(spec.destination);
  if (spec.traffic_control) {
    const auto& tc = *spec.traffic_control;
    j["traffic_control"] = {{"cx", tc.cx},
                            {"cy", tc.cy},
                            {"radius", tc.radius},
                            {"red_interval", {tc.red_start, tc.red_end}}};
  } else {
    j["traffic_control"] = nullptr;
  }
  j["route_length"] = spec.route_length;
  return j.dump(indent) + "\n";
}

RouteSpec route_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    RouteSpec spec;
    spec.id = parse_route_id(j.at("id").get<std::string>());
    for (const auto& p : j.at("centerline")) spec.centerline.push_back(pose_from(p));
    spec.lane_half_width = j.at("lane_half_width").get<double>();
    for (const auto& o : j.value("obstacles", json::array())) {
      spec.obstacles.push_back({o.at("cx").get<double>(), o.at("cy").get<double>(), o.value("heading", 0.0),
                                o.at("length").get<double>(), o.at("width").get<double>()});
    }
    spec.ev_start = pose_from(j.at("ev_start"));
    spec.vif_start = pose_from(j.at("vif_start"));
    spec.ped_start = pose_from(j.at("ped_start"));
    if (j.contains("destination")) spec.destination = pose_from(j.at("destination"));
    if (j.contains("traffic_control") && !j.at("traffic_control").is_null()) {
      const auto& t = j.at("traffic_control");
      const auto red = t.at("red_interval");
      spec.traffic_control = TrafficControl{t.at("cx").get<double>(), t.at("cy").get<double>(),
                                            t.at("radius").get<double>(), red.at(0).get<std::int64_t>(),
                                            red.at(1).get<std::int64_t>()};
    }
    spec.route_length = j.value("route_length", 0.0);
    // Validation fills route_length and destination.
    return Route(spec).spec();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed route JSON: ") + e.what());
  }
}

RouteSpec load_route_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open route file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return route_from_json(ss.str());
}

}  // namespace adstest
