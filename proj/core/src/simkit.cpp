#include "tetherfly/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "tetherfly/error.hpp"

namespace tetherfly::sim {
namespace {

const Vec3 kE3(0.0, 0.0, 1.0);

// Below this horizontal offset the tether is treated as hanging straight.
constexpr double kVerticalOffset = 1e-9;

bool finite(const Vec3& v) { return v.allFinite(); }

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

Vec3 PullProfile::at(double t, const Vec3& tether_dir) const {
  for (const auto& seg : segments) {
    if (t >= seg.t_start && t < seg.t_end) {
      return seg.force ? *seg.force : Vec3(seg.magnitude * tether_dir);
    }
  }
  return Vec3::Zero();
}

bool PullProfile::valid() const {
  double prev_end = 0.0;
  for (const auto& seg : segments) {
    if (!(seg.t_start >= prev_end) || !(seg.t_end > seg.t_start)) return false;
    if (!std::isfinite(seg.magnitude) || seg.magnitude < 0.0) return false;
    if (seg.force && !finite(*seg.force)) return false;
    prev_end = seg.t_end;
  }
  return true;
}

bool ControllerConfig::valid() const {
  const bool gains_ok = gains.kp_xy >= 0.0 && gains.kd_xy >= 0.0 &&
                        gains.ki_xy >= 0.0 && gains.kp_z >= 0.0 &&
                        gains.kd_z >= 0.0 && gains.ki_z >= 0.0 &&
                        gains.max_tilt > 0.0 && gains.max_tilt < std::numbers::pi / 2 &&
                        gains.integral_limit >= 0.0;
  return gains_ok && pull_threshold >= 0.0 && landing_height >= 0.0 &&
         tension_gain >= 0.0 && tension_damping >= 0.0 && finite(goal_pos);
}

tension::TensionVec tether_force(const Vec3& uav_pos,
                                 const localization::AnchorPose& anchor,
                                 const catenary::TetherProperties& tether) {
  const double d = std::hypot(uav_pos.x(), uav_pos.y());
  const double dz = uav_pos.z() - anchor.z_i;
  const double chord = std::hypot(d, dz);
  if (!(chord < tether.s_total)) {
    throw Error(ErrorCode::TetherTaut,
                fmt::format("tether taut: anchor distance {:.6g} m reaches "
                            "length {:.6g} m",
                            chord, tether.s_total),
                chord);
  }
  if (d <= kVerticalOffset) {
    // Folded in a vertical line; the strand below the vehicle hangs from it.
    const double c = 0.5 * (anchor.z_i + uav_pos.z() - tether.s_total);
    return {0.0, 0.0, -tether.omega * (uav_pos.z() - c)};
  }

  const catenary::ShapeSolution shape = catenary::solve_shape(
      {anchor.r_i, anchor.z_i}, {anchor.r_i + d, uav_pos.z()}, tether.s_total);
  if (shape.vertical) {
    return {0.0, 0.0, -tether.omega * (uav_pos.z() - shape.c)};
  }
  const double h = tether.omega * shape.a;
  const double cb = uav_pos.x() / d;
  const double sb = uav_pos.y() / d;
  // The tether leaves the vehicle toward the anchor, along -slope.
  const double slope = std::sinh((anchor.r_i + d - shape.x0) / shape.a);
  return {-h * cb, -h * sb, -h * slope};
}

QuadState apply_command(const QuadState& state, const AttitudeThrust& cmd,
                        const VehicleParams& params, double dt) {
  QuadState next = state;
  const double k =
      params.attitude_tau > 0.0 ? 1.0 - std::exp(-dt / params.attitude_tau) : 1.0;
  next.att.phi += k * (cmd.att.phi - state.att.phi);
  next.att.theta += k * (cmd.att.theta - state.att.theta);
  next.att.psi += k * (cmd.att.psi - state.att.psi);
  next.fp = state.motors_on ? cmd.fp : 0.0;
  return next;
}

Vec3 acceleration(const QuadState& state, const tension::TensionVec& tether_f,
                  const Vec3& pull, const VehicleParams& params) {
  const auto& q = params.quad;
  const double fp = state.motors_on ? state.fp : 0.0;
  // f_ext is the observation-side correction, so the disturbance itself is
  // its negative.
  const Vec3 force = tension::rotation_world_from_body(state.att) * (fp * kE3) +
                     tether_f.vec() + pull - params.linear_drag * state.vel -
                     q.f_ext;
  Vec3 a = force / q.mass - q.g * kE3;
  if (state.grounded && a.z() <= 0.0) a.setZero();
  return a;
}

QuadState step_dynamics(const QuadState& state,
                        const tension::TensionVec& tether_f, const Vec3& pull,
                        const VehicleParams& params, double dt) {
  QuadState next = state;
  if (!state.motors_on) next.fp = 0.0;
  const Vec3 a = acceleration(next, tether_f, pull, params);
  next.vel = state.vel + a * dt;
  next.pos = state.pos + 0.5 * (state.vel + next.vel) * dt;
  next.grounded = false;
  if (next.pos.z() <= 0.0) {
    next.pos.z() = 0.0;
    next.vel.setZero();
    next.grounded = true;
  }
  return next;
}

tension::ImuSample sample_sensors(const QuadState& state,
                                  const tension::TensionVec& tether_f,
                                  const Vec3& pull, const SensorNoise& noise,
                                  const VehicleParams& params, double t,
                                  std::mt19937_64& rng) {
  const Vec3 a = acceleration(state, tether_f, pull, params);
  const Eigen::Matrix3d r = tension::rotation_world_from_body(state.att);
  const Vec3 specific = r.transpose() * (a + params.quad.g * kE3);

  // Fixed draw order: accel x, y, z, thrust, phi, theta, psi.
  std::normal_distribution<double> unit(0.0, 1.0);
  tension::ImuSample s;
  s.t = t;
  s.accel_body.x() = specific.x() + noise.accel_sigma * unit(rng);
  s.accel_body.y() = specific.y() + noise.accel_sigma * unit(rng);
  s.accel_body.z() = specific.z() + noise.accel_sigma * unit(rng);
  const double fp = state.motors_on ? state.fp : 0.0;
  s.thrust = fp + noise.thrust_sigma * unit(rng);
  s.attitude.phi = state.att.phi + noise.attitude_sigma * unit(rng);
  s.attitude.theta = state.att.theta + noise.attitude_sigma * unit(rng);
  s.attitude.psi = state.att.psi + noise.attitude_sigma * unit(rng);
  return s;
}

AttitudeThrust attitude_for_acceleration(const Vec3& accel_cmd, double psi,
                                         const PositionGains& gains,
                                         const VehicleParams& params) {
  const double m = params.quad.mass;
  const Vec3 f = m * (accel_cmd + params.quad.g * kE3);
  AttitudeThrust out;
  out.att.psi = psi;
  const double norm = f.norm();
  if (!(norm > 0.0)) return out;

  // Undo yaw, then read phi/theta off the body z axis direction
  // (s_phi c_theta, -s_theta, c_phi c_theta).
  const double c = std::cos(psi), s = std::sin(psi);
  const Vec3 u(c * f.x() + s * f.y(), -s * f.x() + c * f.y(), f.z());
  const Vec3 dir = u / norm;
  out.att.theta = clamp_abs(std::asin(std::clamp(-dir.y(), -1.0, 1.0)), gains.max_tilt);
  out.att.phi = clamp_abs(std::atan2(dir.x(), dir.z()), gains.max_tilt);

  const double tilt = std::cos(out.att.phi) * std::cos(out.att.theta);
  out.fp = std::clamp(f.z() / tilt, 0.0, params.max_thrust);
  return out;
}

AttitudeThrust cascade_controller(const QuadState& state, const Vec3& goal,
                                  const PositionGains& gains,
                                  const VehicleParams& params,
                                  const Vec3& integral) {
  const Vec3 e = goal - state.pos;
  Vec3 a;
  a.x() = gains.kp_xy * e.x() - gains.kd_xy * state.vel.x() + gains.ki_xy * integral.x();
  a.y() = gains.kp_xy * e.y() - gains.kd_xy * state.vel.y() + gains.ki_xy * integral.y();
  a.z() = gains.kp_z * e.z() - gains.kd_z * state.vel.z() + gains.ki_z * integral.z();
  return attitude_for_acceleration(a, state.att.psi, gains, params);
}

FollowUpdate tension_following_update(const Vec3& goal,
                                      const tension::TensionVec& est,
                                      const Vec3& current_pos, bool following,
                                      const ControllerConfig& cfg) {
  if (est.norm() > cfg.pull_threshold) return {current_pos, true};
  return {goal, following};
}

Vec3 tension_goal_controller(const tension::TensionVec& est,
                             const catenary::HorizontalComponents& goal_tension,
                             double altitude, double goal_altitude,
                             const Vec3& velocity, double z_integral,
                             const ControllerConfig& cfg) {
  // Tension grows with distance from the anchor and points back at it, so
  // following the excess (est - goal) moves the vehicle to where they agree.
  const auto& g = cfg.gains;
  Vec3 a;
  a.x() = cfg.tension_gain * (est.tx - goal_tension.tx) - cfg.tension_damping * velocity.x();
  a.y() = cfg.tension_gain * (est.ty - goal_tension.ty) - cfg.tension_damping * velocity.y();
  a.z() = g.kp_z * (goal_altitude - altitude) - g.kd_z * velocity.z() + g.ki_z * z_integral;
  return a;
}

bool landing_monitor(bool following, double altitude, const ControllerConfig& cfg) {
  return following && altitude < cfg.landing_height;
}

std::vector<std::string> Scenario::validate() const {
  std::vector<std::string> errs;
  const auto check = [&errs](bool ok, const char* field, const char* why) {
    if (!ok) errs.push_back(fmt::format("{}: {}", field, why));
  };
  check(duration > 0.0 && std::isfinite(duration), "duration", "must be > 0");
  check(dynamics_hz > 0.0, "rates.dynamics_hz", "must be > 0");
  check(control_hz > 0.0, "rates.control_hz", "must be > 0");
  if (dynamics_hz > 0.0 && control_hz > 0.0) {
    const double ratio = dynamics_hz / control_hz;
    check(ratio >= 1.0 && std::abs(ratio - std::round(ratio)) < 1e-9,
          "rates", "dynamics_hz must be an integer multiple of control_hz");
  }
  check(vehicle.quad.mass > 0.0, "vehicle.mass", "must be > 0");
  check(vehicle.quad.g > 0.0, "vehicle.g", "must be > 0");
  check(finite(vehicle.quad.f_ext), "vehicle.f_ext", "must be finite");
  check(vehicle.max_thrust > 0.0, "vehicle.max_thrust", "must be > 0");
  check(vehicle.attitude_tau >= 0.0, "vehicle.attitude_tau", "must be >= 0");
  check(vehicle.linear_drag >= 0.0, "vehicle.linear_drag", "must be >= 0");
  check(tether.omega > 0.0, "tether.omega", "must be > 0");
  check(tether.s_total > 0.0, "tether.length", "must be > 0");
  check(anchor.r_i == 0.0, "anchor.r",
        "the simulator places the anchor on the world z axis; must be 0");
  check(std::isfinite(anchor.z_i), "anchor.z", "must be finite");
  check(noise.accel_sigma >= 0.0, "noise.accel_sigma", "must be >= 0");
  check(noise.thrust_sigma >= 0.0, "noise.thrust_sigma", "must be >= 0");
  check(noise.attitude_sigma >= 0.0, "noise.attitude_sigma_deg", "must be >= 0");
  check(filter.q_var > 0.0, "filter.q", "must be > 0");
  check(filter.r_var > 0.0, "filter.r", "must be > 0");
  check(filter.p0 > 0.0, "filter.p0", "must be > 0");
  check(controller.pull_threshold >= 0.0, "controller.pull_threshold", "must be >= 0");
  check(controller.landing_height >= 0.0, "controller.landing_height", "must be >= 0");
  check(controller.gains.max_tilt > 0.0 && controller.gains.max_tilt < std::numbers::pi / 2,
        "controller.tilt_limit_deg", "must be in (0, 90)");
  const auto& g = controller.gains;
  check(g.kp_xy >= 0.0 && g.kd_xy >= 0.0 && g.ki_xy >= 0.0 && g.kp_z >= 0.0 &&
            g.kd_z >= 0.0 && g.ki_z >= 0.0 && g.integral_limit >= 0.0,
        "controller.gains", "must be >= 0");
  check(controller.tension_gain >= 0.0 && controller.tension_damping >= 0.0,
        "controller.tension_gain", "gain and damping must be >= 0");
  check(finite(controller.goal_pos), "controller.goal", "must be finite");
  check(pulls.valid(), "pulls",
        "segments must be ordered, non-overlapping, with end > start and "
        "magnitude >= 0");
  check(finite(initial_pos) && initial_pos.z() >= 0.0, "initial.position",
        "must be finite with z >= 0");
  if (tether.s_total > 0.0 && finite(initial_pos)) {
    const double chord = std::hypot(std::hypot(initial_pos.x(), initial_pos.y()),
                                    initial_pos.z() - anchor.z_i);
    check(chord < tether.s_total, "initial.position",
          "farther from the anchor than the tether length");
  }
  return errs;
}

RunResult run_scenario(const Scenario& sc,
                       const std::function<void(const trace::TraceRow&)>& sink) {
  if (auto errs = sc.validate(); !errs.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw Error(ErrorCode::InvalidConfig, msg);
  }

  RunResult result;
  const auto ticks = static_cast<long>(std::llround(sc.duration * sc.control_hz));
  const int substeps = static_cast<int>(std::lround(sc.dynamics_hz / sc.control_hz));
  const double dt_ctrl = 1.0 / sc.control_hz;
  const double dt_dyn = dt_ctrl / substeps;
  result.rows.reserve(static_cast<std::size_t>(ticks));

  std::mt19937_64 rng(sc.noise.seed);
  const ControllerConfig& cc = sc.controller;

  QuadState state;
  state.pos = sc.initial_pos;
  state.grounded = state.pos.z() <= 0.0;
  tension::KalmanState kf = tension::kalman_init(sc.filter);

  Vec3 goal = cc.goal_pos;
  Vec3 integral = Vec3::Zero();
  bool following = false;
  AttitudeThrust cmd;

  catenary::HorizontalComponents goal_tension{};
  if (cc.mode == ControllerMode::TensionGoal) {
    if (cc.goal_tension) {
      goal_tension = *cc.goal_tension;
    } else {
      const auto t = tether_force(cc.goal_pos, sc.anchor, sc.tether);
      goal_tension = {t.tx, t.ty};
    }
  }

  const auto pull_at = [&](double t, const tension::TensionVec& tf) {
    const double n = tf.norm();
    return sc.pulls.at(t, n > 0.0 ? Vec3(tf.vec() / n) : Vec3::Zero());
  };

  try {
    for (long k = 0; k < ticks; ++k) {
      const double t = static_cast<double>(k) / sc.control_hz;
      const tension::TensionVec tf = tether_force(state.pos, sc.anchor, sc.tether);
      const Vec3 pull = pull_at(t, tf);

      const tension::ImuSample imu =
          sample_sensors(state, tf, pull, sc.noise, sc.vehicle, t, rng);
      const tension::TensionVec obs = tension::observe_tension(imu, sc.vehicle.quad);
      kf = tension::kalman_step(kf, sc.filter, obs);
      const tension::TensionVec est = tension::estimate(kf);

      const auto loc = localization::locate_from_tension(est, sc.tether, sc.anchor,
                                                         sc.beta_override);
      if (loc.clamped) ++result.clamp_events;
      const Vec3 pos_est = localization::polar_to_cartesian(loc.position);

      if (state.motors_on) {
        Vec3 accel_cmd;
        switch (cc.mode) {
          case ControllerMode::TensionFollowing: {
            const FollowUpdate fu =
                tension_following_update(goal, est, state.pos, following, cc);
            goal = fu.goal;
            following = fu.following;
            [[fallthrough]];
          }
          case ControllerMode::PositionHold: {
            integral += (goal - state.pos) * dt_ctrl;
            for (int i = 0; i < 3; ++i) {
              integral[i] = clamp_abs(integral[i], cc.gains.integral_limit);
            }
            cmd = cascade_controller(state, goal, cc.gains, sc.vehicle, integral);
            break;
          }
          case ControllerMode::TensionGoal: {
            integral.z() = clamp_abs(integral.z() + (goal.z() - state.pos.z()) * dt_ctrl,
                                     cc.gains.integral_limit);
            accel_cmd = tension_goal_controller(est, goal_tension, state.pos.z(),
                                                goal.z(), state.vel, integral.z(), cc);
            // Thrust that balances the goal tension once it is reached.
            accel_cmd.x() -= goal_tension.tx / sc.vehicle.quad.mass;
            accel_cmd.y() -= goal_tension.ty / sc.vehicle.quad.mass;
            cmd = attitude_for_acceleration(accel_cmd, state.att.psi, cc.gains,
                                            sc.vehicle);
            break;
          }
        }
        if (landing_monitor(following, state.pos.z(), cc)) {
          state.motors_on = false;
          cmd.fp = 0.0;
        }
      }

      trace::TraceRow row;
      row.t = t;
      row.x = state.pos.x(), row.y = state.pos.y(), row.z = state.pos.z();
      const Vec3 truth = tf.vec() + pull;
      row.tx_true = truth.x(), row.ty_true = truth.y(), row.tz_true = truth.z();
      row.tx_obs = obs.tx, row.ty_obs = obs.ty, row.tz_obs = obs.tz;
      row.tx_est = est.tx, row.ty_est = est.ty, row.tz_est = est.tz;
      row.r_est = loc.position.r, row.z_est = loc.position.z;
      row.beta_est = loc.position.beta;
      row.x_est = pos_est.x(), row.y_est = pos_est.y();
      row.goal_x = goal.x(), row.goal_y = goal.y(), row.goal_z = goal.z();
      row.following = following;
      row.motors_on = state.motors_on;
      result.rows.push_back(row);
      if (sink) sink(row);

      for (int j = 0; j < substeps; ++j) {
        const double ts = t + j * dt_dyn;
        const tension::TensionVec f =
            j == 0 ? tf : tether_force(state.pos, sc.anchor, sc.tether);
        const Vec3 p = j == 0 ? pull : pull_at(ts, f);
        state = apply_command(state, cmd, sc.vehicle, dt_dyn);
        state = step_dynamics(state, f, p, sc.vehicle, dt_dyn);
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TetherTaut) throw;
    result.aborted = true;
    result.abort_reason = e.what();
  }
  return result;
}

}  // namespace tetherfly::sim
