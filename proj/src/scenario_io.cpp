#include "apfnet/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "apfnet/errors.hpp"
#include "json.hpp"

namespace apfnet {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
  for (const auto& key : required) {
    if (!j.contains(key)) throw InputError(where + ": missing key '" + key + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

Vec2 vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw InputError(where + ": expected [x, y]");
  return {number(j[0], where), number(j[1], where)};
}

Scenario from_json(const json& j) {
  require_keys(j, {"ego", "goal", "obstacles", "road_halfwidth", "horizon_steps", "dt"},
               {"ego", "goal", "road_halfwidth", "horizon_steps", "dt"}, "scenario");
  Scenario s;
  require_keys(j["ego"], {"pos", "vel"}, {"pos", "vel"}, "ego");
  s.ego.position = vec2(j["ego"]["pos"], "ego.pos");
  s.ego.velocity = vec2(j["ego"]["vel"], "ego.vel");
  s.goal = vec2(j["goal"], "goal");
  if (j.contains("obstacles")) {
    const auto& obs = j["obstacles"];
    if (!obs.is_array()) throw InputError("obstacles: expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string where = "obstacles[" + std::to_string(i) + "]";
      require_keys(obs[i], {"pos", "vel", "radius"}, {"pos", "radius"}, where);
      Obstacle o;
      o.position = vec2(obs[i]["pos"], where + ".pos");
      if (obs[i].contains("vel")) o.velocity = vec2(obs[i]["vel"], where + ".vel");
      o.radius = number(obs[i]["radius"], where + ".radius");
      s.obstacles.push_back(o);
    }
  }
  s.road_halfwidth = number(j["road_halfwidth"], "road_halfwidth");
  if (!j["horizon_steps"].is_number_integer()) throw InputError("horizon_steps: expected an integer");
  s.horizon_steps = j["horizon_steps"].get<int>();
  s.dt = number(j["dt"], "dt");
  s.validate();
  return s;
}

json to_json(const Scenario& s) {
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    obstacles.push_back({{"pos", {o.position.x, o.position.y}},
                         {"vel", {o.velocity.x, o.velocity.y}},
                         {"radius", o.radius}});
  }
  return json{{"ego",
               {{"pos", {s.ego.position.x, s.ego.position.y}},
                {"vel", {s.ego.velocity.x, s.ego.velocity.y}}}},
              {"goal", {s.goal.x, s.goal.y}},
              {"obstacles", std::move(obstacles)},
              {"road_halfwidth", s.road_halfwidth},
              {"horizon_steps", s.horizon_steps},
              {"dt", s.dt}};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) { return from_json(parse_json(json_text)); }

std::vector<Scenario> parse_suite(std::string_view json_text) {
  const json doc = parse_json(json_text);
  if (doc.is_object()) return {from_json(doc)};
  if (!doc.is_array()) throw InputError("suite: expected an array of scenarios");
  std::vector<Scenario> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    try {
      out.push_back(from_json(doc[i]));
    } catch (const std::exception& e) {
      throw InputError("scenario " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Scenario> load_suite(const std::filesystem::path& path) {
  return parse_suite(read_text_file(path));
}

std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

std::string dump_suite(const std::vector<Scenario>& suite) {
  json arr = json::array();
  for (const auto& s : suite) arr.push_back(to_json(s));
  return arr.dump(2) + "\n";
}

void save_suite(const std::filesystem::path& path, const std::vector<Scenario>& suite) {
  write_text_file(path, dump_suite(suite));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace apfnet
