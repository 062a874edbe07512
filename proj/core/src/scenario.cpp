#include "tetherfly/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "tetherfly/error.hpp"

namespace tetherfly::scenario {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Collects problems instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  void known(const YAML::Node& node, const std::string& path,
             std::initializer_list<std::string_view> keys) {
    if (!node) return;
    if (!node.IsMap()) {
      errors.push_back(path + ": expected a mapping");
      return;
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto k : keys) ok = ok || k == key;
      if (!ok) errors.push_back(join(path, key) + ": unknown key");
    }
  }

  void number(const YAML::Node& parent, const std::string& path,
              const char* key, double& out) {
    const YAML::Node n = child(parent, key);
    if (!n) return;
    try {
      out = n.as<double>();
    } catch (const YAML::Exception&) {
      errors.push_back(join(path, key) + ": expected a number");
    }
  }

  void integer(const YAML::Node& parent, const std::string& path,
               const char* key, std::uint64_t& out) {
    const YAML::Node n = child(parent, key);
    if (!n) return;
    try {
      out = n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      errors.push_back(join(path, key) + ": expected a non-negative integer");
    }
  }

  void text(const YAML::Node& parent, const std::string& path, const char* key,
            std::string& out) {
    const YAML::Node n = child(parent, key);
    if (!n) return;
    if (!n.IsScalar()) {
      errors.push_back(join(path, key) + ": expected a string");
      return;
    }
    out = n.as<std::string>();
  }

  template <int N>
  bool vector(const YAML::Node& parent, const std::string& path,
              const char* key, Eigen::Matrix<double, N, 1>& out) {
    const YAML::Node n = child(parent, key);
    if (!n) return false;
    if (!n.IsSequence() || n.size() != N) {
      errors.push_back(fmt::format("{}: expected a list of {} numbers", join(path, key), N));
      return false;
    }
    try {
      for (int i = 0; i < N; ++i) out[i] = n[i].as<double>();
    } catch (const YAML::Exception&) {
      errors.push_back(join(path, key) + ": expected numbers");
      return false;
    }
    return true;
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

 private:
  static YAML::Node child(const YAML::Node& parent, const char* key) {
    if (!parent || !parent.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    return parent[key];
  }
};

void read_filter(Reader& rd, const YAML::Node& n, tension::KalmanConfig& f) {
  rd.known(n, "filter", {"model", "q", "r", "a", "b", "p0"});
  std::string model = "constant";
  rd.text(n, "filter", "model", model);
  if (model == "derivative") {
    f = tension::KalmanConfig::derivative_model();
  } else if (model != "constant") {
    rd.errors.push_back("filter.model: expected 'constant' or 'derivative'");
  }
  rd.number(n, "filter", "q", f.q_var);
  rd.number(n, "filter", "r", f.r_var);
  rd.number(n, "filter", "a", f.deriv_a);
  rd.number(n, "filter", "b", f.deriv_b);
  rd.number(n, "filter", "p0", f.p0);
}

void read_controller(Reader& rd, const YAML::Node& n, sim::ControllerConfig& c) {
  rd.known(n, "controller",
           {"mode", "goal", "pull_threshold", "landing_height", "tilt_limit_deg",
            "integral_limit", "tension_gain", "tension_damping", "goal_tension",
            "gains"});
  std::string mode = "position_hold";
  rd.text(n, "controller", "mode", mode);
  if (mode == "position_hold") {
    c.mode = sim::ControllerMode::PositionHold;
  } else if (mode == "tension_following") {
    c.mode = sim::ControllerMode::TensionFollowing;
  } else if (mode == "tension_goal") {
    c.mode = sim::ControllerMode::TensionGoal;
  } else {
    rd.errors.push_back(
        "controller.mode: expected position_hold, tension_following or tension_goal");
  }
  rd.vector(n, "controller", "goal", c.goal_pos);
  rd.number(n, "controller", "pull_threshold", c.pull_threshold);
  rd.number(n, "controller", "landing_height", c.landing_height);
  double tilt_deg = c.gains.max_tilt / kDeg;
  rd.number(n, "controller", "tilt_limit_deg", tilt_deg);
  c.gains.max_tilt = tilt_deg * kDeg;
  rd.number(n, "controller", "integral_limit", c.gains.integral_limit);
  rd.number(n, "controller", "tension_gain", c.tension_gain);
  rd.number(n, "controller", "tension_damping", c.tension_damping);
  Eigen::Vector2d gt;
  if (rd.vector(n, "controller", "goal_tension", gt)) {
    c.goal_tension = catenary::HorizontalComponents{gt.x(), gt.y()};
  }
  const YAML::Node g = n ? n["gains"] : YAML::Node(YAML::NodeType::Undefined);
  rd.known(g, "controller.gains", {"kp_xy", "kd_xy", "ki_xy", "kp_z", "kd_z", "ki_z"});
  const std::string gp = "controller.gains";
  rd.number(g, gp, "kp_xy", c.gains.kp_xy);
  rd.number(g, gp, "kd_xy", c.gains.kd_xy);
  rd.number(g, gp, "ki_xy", c.gains.ki_xy);
  rd.number(g, gp, "kp_z", c.gains.kp_z);
  rd.number(g, gp, "kd_z", c.gains.kd_z);
  rd.number(g, gp, "ki_z", c.gains.ki_z);
}

void read_pulls(Reader& rd, const YAML::Node& n, sim::PullProfile& pulls) {
  if (!n) return;
  if (!n.IsSequence()) {
    rd.errors.push_back("pulls: expected a list");
    return;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string path = fmt::format("pulls[{}]", i);
    const YAML::Node p = n[i];
    rd.known(p, path, {"start", "end", "magnitude", "force"});
    sim::PullSegment seg;
    rd.number(p, path, "start", seg.t_start);
    rd.number(p, path, "end", seg.t_end);
    rd.number(p, path, "magnitude", seg.magnitude);
    sim::Vec3 f;
    if (rd.vector(p, path, "force", f)) seg.force = f;
    pulls.segments.push_back(seg);
  }
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

sim::Scenario parse_scenario(std::string_view text, std::string name) {
  YAML::Node loaded;
  try {
    loaded = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  // const access so that lookups of absent keys do not insert them
  const YAML::Node root = loaded;
  if (!root.IsMap()) {
    throw Error(ErrorCode::InvalidConfig, "config: top level must be a mapping");
  }

  sim::Scenario sc;
  sc.name = std::move(name);
  Reader rd;
  rd.known(root, "",
           {"name", "duration", "seed", "rates", "vehicle", "tether", "anchor",
            "initial", "noise", "filter", "controller", "localization", "pulls"});
  rd.text(root, "", "name", sc.name);
  rd.number(root, "", "duration", sc.duration);
  rd.integer(root, "", "seed", sc.noise.seed);

  rd.known(root["rates"], "rates", {"dynamics_hz", "control_hz"});
  rd.number(root["rates"], "rates", "dynamics_hz", sc.dynamics_hz);
  rd.number(root["rates"], "rates", "control_hz", sc.control_hz);

  const YAML::Node v = root["vehicle"];
  rd.known(v, "vehicle",
           {"mass", "g", "max_thrust", "attitude_tau", "linear_drag", "f_ext"});
  rd.number(v, "vehicle", "mass", sc.vehicle.quad.mass);
  rd.number(v, "vehicle", "g", sc.vehicle.quad.g);
  rd.number(v, "vehicle", "max_thrust", sc.vehicle.max_thrust);
  rd.number(v, "vehicle", "attitude_tau", sc.vehicle.attitude_tau);
  rd.number(v, "vehicle", "linear_drag", sc.vehicle.linear_drag);
  rd.vector(v, "vehicle", "f_ext", sc.vehicle.quad.f_ext);

  rd.known(root["tether"], "tether", {"omega", "length"});
  rd.number(root["tether"], "tether", "omega", sc.tether.omega);
  rd.number(root["tether"], "tether", "length", sc.tether.s_total);

  rd.known(root["anchor"], "anchor", {"r", "z"});
  rd.number(root["anchor"], "anchor", "r", sc.anchor.r_i);
  rd.number(root["anchor"], "anchor", "z", sc.anchor.z_i);

  rd.known(root["initial"], "initial", {"position"});
  rd.vector(root["initial"], "initial", "position", sc.initial_pos);

  const YAML::Node nz = root["noise"];
  rd.known(nz, "noise", {"accel_sigma", "thrust_sigma", "attitude_sigma_deg"});
  rd.number(nz, "noise", "accel_sigma", sc.noise.accel_sigma);
  rd.number(nz, "noise", "thrust_sigma", sc.noise.thrust_sigma);
  double att_deg = sc.noise.attitude_sigma / kDeg;
  rd.number(nz, "noise", "attitude_sigma_deg", att_deg);
  sc.noise.attitude_sigma = att_deg * kDeg;

  read_filter(rd, root["filter"], sc.filter);
  read_controller(rd, root["controller"], sc.controller);

  rd.known(root["localization"], "localization", {"beta_override_deg"});
  if (root["localization"] && root["localization"]["beta_override_deg"]) {
    double beta = 0.0;
    rd.number(root["localization"], "localization", "beta_override_deg", beta);
    sc.beta_override = beta * kDeg;
  }

  read_pulls(rd, root["pulls"], sc.pulls);

  std::vector<std::string> errors = std::move(rd.errors);
  for (auto& e : sc.validate()) errors.push_back(std::move(e));
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(ErrorCode::InvalidConfig, msg,
                static_cast<double>(errors.size()));
  }
  return sc;
}

sim::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), std::filesystem::path(path).stem().string());
}

}  // namespace tetherfly::scenario
