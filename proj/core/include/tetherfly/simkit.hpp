#pragma once

// Point-mass quadcopter tethered to a ground anchor: dynamics, sensor
// synthesis, position/tension controllers and the fixed-rate scenario loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tetherfly/catenary.hpp"
#include "tetherfly/kalman.hpp"
#include "tetherfly/localization.hpp"
#include "tetherfly/tension.hpp"
#include "tetherfly/trace.hpp"

namespace tetherfly::sim {

using Vec3 = Eigen::Vector3d;

struct VehicleParams {
  tension::QuadParams quad;
  double max_thrust = 0.6;     // N
  double attitude_tau = 0.05;  // first-order lag of attitude tracking, s
  double linear_drag = 0.0;    // N per m/s, 0 disables drag
};

struct QuadState {
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  tension::Attitude att;
  double fp = 0.0;
  bool motors_on = true;
  bool grounded = false;  // resting on the z = 0 floor
};

struct AttitudeThrust {
  tension::Attitude att;
  double fp = 0.0;
};

// Extra pull transmitted through the tether, active on [t_start, t_end).
// By default it acts along the tether force at the vehicle; `force` fixes
// the world vector instead.
struct PullSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double magnitude = 0.0;  // N
  std::optional<Vec3> force;
};

struct PullProfile {
  std::vector<PullSegment> segments;

  // `tether_dir` is the unit direction of the tether force (may be zero).
  Vec3 at(double t, const Vec3& tether_dir) const;
  // Segments must be time-ordered, non-overlapping and have t_end > t_start.
  bool valid() const;
};

enum class ControllerMode { PositionHold, TensionFollowing, TensionGoal };

struct PositionGains {
  double kp_xy = 4.0;
  double kd_xy = 3.0;
  double ki_xy = 0.5;
  double kp_z = 10.0;
  double kd_z = 5.0;
  double ki_z = 3.0;
  double max_tilt = 20.0 * 3.14159265358979323846 / 180.0;  // rad
  double integral_limit = 1.0;                                // m*s
};

struct ControllerConfig {
  ControllerMode mode = ControllerMode::PositionHold;
  double pull_threshold = 0.05;  // N
  double landing_height = 0.15;  // m
  PositionGains gains;
  double tension_gain = 20.0;    // m/s^2 per N of horizontal tension error
  double tension_damping = 1.5;  // 1/s, horizontal velocity damping
  Vec3 goal_pos = Vec3(0.0, 0.0, 1.0);
  // Tension-goal mode target; derived from goal_pos through the catenary
  // when unset.
  std::optional<catenary::HorizontalComponents> goal_tension;

  bool valid() const;
};

struct SensorNoise {
  double accel_sigma = 0.3;       // m/s^2 per axis
  double thrust_sigma = 0.003;    // N
  double attitude_sigma = 0.005;  // rad per angle
  std::uint64_t seed = 1;

  bool valid() const {
    return accel_sigma >= 0.0 && thrust_sigma >= 0.0 && attitude_sigma >= 0.0;
  }
};

// Force the tether exerts on the vehicle at uav_pos. The anchor sits on the
// world z axis (offset radially by r_i). Throws Error(TetherTaut) when the
// anchor-vehicle distance reaches the tether length.
tension::TensionVec tether_force(const Vec3& uav_pos,
                                 const localization::AnchorPose& anchor,
                                 const catenary::TetherProperties& tether);

// Actuators: thrust follows the command instantly, attitude through a
// first-order lag. Motors off forces zero thrust.
QuadState apply_command(const QuadState& state, const AttitudeThrust& cmd,
                        const VehicleParams& params, double dt);

// Net acceleration of the vehicle (world frame, gravity included).
Vec3 acceleration(const QuadState& state, const tension::TensionVec& tether_f,
                  const Vec3& pull, const VehicleParams& params);

// One translational step with forces held over dt. Velocity is advanced
// first and position with the mean of old and new velocity, which is exact
// for the held forces. The floor at z = 0 stops the vehicle.
QuadState step_dynamics(const QuadState& state,
                        const tension::TensionVec& tether_f, const Vec3& pull,
                        const VehicleParams& params, double dt);

tension::ImuSample sample_sensors(const QuadState& state,
                                  const tension::TensionVec& tether_f,
                                  const Vec3& pull, const SensorNoise& noise,
                                  const VehicleParams& params, double t,
                                  std::mt19937_64& rng);

// Maps a desired world acceleration to attitude and thrust at yaw psi, with
// tilt saturation and thrust limits.
AttitudeThrust attitude_for_acceleration(const Vec3& accel_cmd, double psi,
                                         const PositionGains& gains,
                                         const VehicleParams& params);

// Outer PID on position error; `integral` is the running integral of
// (goal - pos).
AttitudeThrust cascade_controller(const QuadState& state, const Vec3& goal,
                                  const PositionGains& gains,
                                  const VehicleParams& params,
                                  const Vec3& integral = Vec3::Zero());

struct FollowUpdate {
  Vec3 goal;
  bool following = false;
};

FollowUpdate tension_following_update(const Vec3& goal,
                                      const tension::TensionVec& est,
                                      const Vec3& current_pos, bool following,
                                      const ControllerConfig& cfg);

// Desired world acceleration. Horizontally the vehicle moves along the
// excess of estimated over goal tension (it gives way to the tether when
// pulled harder than the goal); the altitude loop uses altitude.
Vec3 tension_goal_controller(const tension::TensionVec& est,
                             const catenary::HorizontalComponents& goal_tension,
                             double altitude, double goal_altitude,
                             const Vec3& velocity, double z_integral,
                             const ControllerConfig& cfg);

bool landing_monitor(bool following, double altitude,
                     const ControllerConfig& cfg);

struct Scenario {
  std::string name = "scenario";
  VehicleParams vehicle;
  catenary::TetherProperties tether;
  localization::AnchorPose anchor;
  SensorNoise noise;
  tension::KalmanConfig filter;
  ControllerConfig controller;
  PullProfile pulls;
  Vec3 initial_pos = Vec3(0.0, 0.0, 1.0);
  double duration = 30.0;      // s
  double dynamics_hz = 1000.0;
  double control_hz = 100.0;
  std::optional<double> beta_override;  // rad

  // Every violated constraint as "field: reason".
  std::vector<std::string> validate() const;
};

struct RunResult {
  std::vector<trace::TraceRow> rows;
  bool aborted = false;
  std::string abort_reason;
  int clamp_events = 0;
};

// Fixed-rate loop: dynamics at dynamics_hz, sensing/filtering/control and
// one trace row per control tick. A taut tether stops the run with
// aborted = true and the rows produced so far. `sink` sees each row as it
// is produced.
RunResult run_scenario(const Scenario& scenario,
                       const std::function<void(const trace::TraceRow&)>& sink = {});

}  // namespace tetherfly::sim
