#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tetherfly/error.hpp"
#include "tetherfly/scenario.hpp"
#include "tetherfly/simkit.hpp"

using namespace tetherfly;
using namespace tetherfly::sim;

namespace {

const catenary::TetherProperties kTether{0.0478, 1.6};
const localization::AnchorPose kAnchor{0.0, 0.754};

Scenario bundled(const std::string& name) {
  return scenario::load_scenario(std::string(TETHERFLY_SCENARIO_DIR) + "/" + name + ".yaml");
}

// Attitude and thrust that cancel gravity and the given tether force.
QuadState balanced(const Vec3& pos, const tension::TensionVec& tf, const VehicleParams& vp) {
  QuadState s;
  s.pos = pos;
  const AttitudeThrust c =
      attitude_for_acceleration(-tf.vec() / vp.quad.mass, 0.0, PositionGains{}, vp);
  s.att = c.att;
  s.fp = c.fp;
  return s;
}

SensorNoise silent() {
  SensorNoise n;
  n.accel_sigma = n.thrust_sigma = n.attitude_sigma = 0.0;
  return n;
}

}  // namespace

TEST(TetherForce, VerticalTetherHangsBelowVehicle) {
  const auto t = tether_force({0, 0, 1.0}, kAnchor, kTether);
  const double c = 0.5 * (0.754 + 1.0 - 1.6);
  EXPECT_EQ(t.horizontal(), 0.0);
  EXPECT_NEAR(t.tz, -0.0478 * (1.0 - c), 1e-15);

  const auto near = tether_force({1e-7, 0, 1.0}, kAnchor, kTether);
  EXPECT_LT(near.horizontal(), 1e-6);
  EXPECT_NEAR(near.tz, t.tz, 1e-6);
}

TEST(TetherForce, MatchesSolvedCatenary) {
  const auto p = catenary::solve_from_endpoints({0.0, 0.754}, {1.0, 0.5}, kTether);
  const auto end = catenary::end_tensions(p, kTether, catenary::End::Uav);
  const auto t = tether_force({1.0, 0.0, 0.5}, kAnchor, kTether);
  EXPECT_NEAR(t.tx, -end.h, 1e-12);
  EXPECT_NEAR(t.ty, 0.0, 1e-15);
  EXPECT_NEAR(t.tz, -end.tv, 1e-12);
}

TEST(TetherForce, PointsBackTowardAnchorAzimuth) {
  const auto t = tether_force({0.0, 0.8, 1.0}, kAnchor, kTether);
  EXPECT_NEAR(t.tx, 0.0, 1e-15);
  EXPECT_LT(t.ty, 0.0);
  const auto d = tether_force({-0.5, -0.5, 1.0}, kAnchor, kTether);
  EXPECT_GT(d.tx, 0.0);
  EXPECT_NEAR(d.tx, d.ty, 1e-15);
}

TEST(TetherForce, TautThrows) {
  try {
    tether_force({1.6, 0.0, 0.754}, kAnchor, kTether);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TetherTaut);
  }
}

TEST(TetherForce, ContinuousInPosition) {
  const auto f = [](const Eigen::Vector3d& p) { return tether_force(p, kAnchor, kTether).vec(); };
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> r_d(0.05, 1.2), b_d(-3.0, 3.0), z_d(0.2, 1.4);
  for (int i = 0; i < 100; ++i) {
    const double r = r_d(rng), b = b_d(rng);
    const Vec3 p(r * std::cos(b), r * std::sin(b), z_d(rng));
    if (std::hypot(r, p.z() - 0.754) > 1.45) continue;
    for (int axis = 0; axis < 3; ++axis) {
      const Vec3 coarse = oracle::central_diff(f, p, axis, 1e-4);
      const Vec3 fine = oracle::central_diff(f, p, axis, 1e-5);
      EXPECT_LT((coarse - fine).cwiseAbs().maxCoeff(), 1e-4);
      EXPECT_LT((f(p + 1e-7 * Vec3::Unit(axis)) - f(p)).cwiseAbs().maxCoeff(), 1e-4);
    }
  }
}

TEST(StepDynamics, HoverEquilibriumIsStationary) {
  const VehicleParams vp;
  const Vec3 pos(0.8, 0.3, 1.1);
  const auto tf = tether_force(pos, kAnchor, kTether);
  const QuadState s = balanced(pos, tf, vp);
  const QuadState next = step_dynamics(s, tf, Vec3::Zero(), vp, 1e-3);
  EXPECT_LT((next.pos - s.pos).norm(), 1e-9);
  EXPECT_LT(next.vel.norm(), 1e-9);
}

TEST(StepDynamics, MotorsOffFreeFall) {
  const VehicleParams vp;
  QuadState s;
  s.pos = {0, 0, 2.0};
  s.fp = 0.5;
  s.motors_on = false;
  const QuadState next = step_dynamics(s, {}, Vec3::Zero(), vp, 1e-3);
  EXPECT_NEAR(next.vel.z(), -vp.quad.g * 1e-3, 1e-15);
  EXPECT_EQ(next.fp, 0.0);
}

TEST(StepDynamics, EnergyChangeEqualsWork) {
  const VehicleParams vp;
  const double m = vp.quad.mass, g = vp.quad.g, dt = 1e-3;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(-0.6, 0.6), vel(-2.0, 2.0), tilt(-0.3, 0.3),
      fp(0.0, 0.6);
  for (int i = 0; i < 500; ++i) {
    QuadState s;
    s.pos = {pos(rng), pos(rng), 1.0 + pos(rng)};
    s.vel = {vel(rng), vel(rng), vel(rng)};
    s.att = {tilt(rng), tilt(rng), tilt(rng)};
    s.fp = fp(rng);
    const auto tf = tether_force(s.pos, kAnchor, kTether);
    const QuadState n = step_dynamics(s, tf, Vec3::Zero(), vp, dt);
    const double de = 0.5 * m * (n.vel.squaredNorm() - s.vel.squaredNorm()) +
                      m * g * (n.pos.z() - s.pos.z());
    const Vec3 thrust = oracle::rotation(s.att.phi, s.att.theta, s.att.psi) * Vec3(0, 0, s.fp);
    const double work = (tf.vec() + thrust).dot(n.pos - s.pos);
    EXPECT_NEAR(de, work, 1e-6);
    EXPECT_NEAR(de, work, 1e-12);
  }
}

TEST(StepDynamics, FloorStopsTheVehicle) {
  const VehicleParams vp;
  QuadState s;
  s.pos = {0.3, 0, 0.0005};
  s.vel = {0.2, 0, -1.0};
  s.motors_on = false;
  s = step_dynamics(s, {}, Vec3::Zero(), vp, 1e-3);
  EXPECT_EQ(s.pos.z(), 0.0);
  EXPECT_TRUE(s.grounded);
  EXPECT_TRUE(s.vel.isZero());
  s = step_dynamics(s, {}, Vec3::Zero(), vp, 1e-3);
  EXPECT_EQ(s.pos.z(), 0.0);
  EXPECT_TRUE(s.grounded);
}

TEST(ApplyCommand, FirstOrderAttitudeLag) {
  VehicleParams vp;
  QuadState s;
  const AttitudeThrust cmd{{0.1, -0.2, 0.3}, 0.4};
  for (int i = 0; i < 50; ++i) s = apply_command(s, cmd, vp, 1e-3);
  EXPECT_NEAR(s.att.phi, 0.1 * (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(s.att.theta, -0.2 * (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_EQ(s.fp, 0.4);
  s.motors_on = false;
  EXPECT_EQ(apply_command(s, cmd, vp, 1e-3).fp, 0.0);
}

TEST(SampleSensors, ZeroNoiseIsTruthSpecificForce) {
  const VehicleParams vp;
  std::mt19937_64 rng(1);
  QuadState s;
  s.pos = {0, 0, 1};
  s.fp = vp.quad.mass * vp.quad.g;
  const auto imu = sample_sensors(s, {}, Vec3::Zero(), silent(), vp, 0.0, rng);
  EXPECT_NEAR(imu.accel_body.x(), 0.0, 1e-15);
  EXPECT_NEAR(imu.accel_body.y(), 0.0, 1e-15);
  EXPECT_NEAR(imu.accel_body.z(), vp.quad.g, 1e-12);
  EXPECT_EQ(imu.thrust, s.fp);
}

TEST(SampleSensors, SameSeedSameStream) {
  const VehicleParams vp;
  const SensorNoise noise;
  std::mt19937_64 a(77), b(77), c(78);
  QuadState s;
  s.fp = 0.3;
  for (int i = 0; i < 100; ++i) {
    const auto x = sample_sensors(s, {}, Vec3::Zero(), noise, vp, 0.0, a);
    const auto y = sample_sensors(s, {}, Vec3::Zero(), noise, vp, 0.0, b);
    const auto z = sample_sensors(s, {}, Vec3::Zero(), noise, vp, 0.0, c);
    EXPECT_EQ(x.accel_body, y.accel_body);
    EXPECT_EQ(x.thrust, y.thrust);
    EXPECT_EQ(x.attitude.psi, y.attitude.psi);
    EXPECT_NE(x.accel_body, z.accel_body);
  }
}

TEST(SampleSensors, NoiseFreeObservationEqualsTetherForce) {
  VehicleParams vp;
  vp.quad.f_ext = {0.002, -0.001, 0.003};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> r_d(0.0, 1.2), b_d(-3.0, 3.0), z_d(0.3, 1.5);
  int checked = 0;
  while (checked < 100) {
    const double r = r_d(rng), b = b_d(rng);
    const Vec3 pos(r * std::cos(b), r * std::sin(b), z_d(rng));
    if (std::hypot(r, pos.z() - 0.754) > 1.5) continue;
    const auto tf = tether_force(pos, kAnchor, kTether);
    QuadState s = balanced(pos, tf, vp);
    const auto imu = sample_sensors(s, tf, Vec3::Zero(), silent(), vp, 0.0, rng);
    const auto obs = tension::observe_tension(imu, vp.quad);
    EXPECT_LT((obs.vec() - tf.vec()).cwiseAbs().maxCoeff(), 1e-9);
    ++checked;
  }
}

TEST(Controller, GoalAtCurrentPositionCommandsHoverThrust) {
  const VehicleParams vp;
  QuadState s;
  s.pos = {0.2, 0.1, 1.0};
  const AttitudeThrust c = cascade_controller(s, s.pos, PositionGains{}, vp);
  EXPECT_EQ(c.att.phi, 0.0);
  EXPECT_EQ(c.att.theta, 0.0);
  EXPECT_NEAR(c.fp, vp.quad.mass * vp.quad.g, 1e-15);
}

TEST(Controller, ClimbCommandsExtraThrust) {
  const VehicleParams vp;
  QuadState s;
  s.pos = {0, 0, 1.0};
  const AttitudeThrust c = cascade_controller(s, {0, 0, 2.0}, PositionGains{}, vp);
  EXPECT_GT(c.fp, vp.quad.mass * vp.quad.g);
}

TEST(Controller, TiltIsSaturated) {
  const VehicleParams vp;
  const PositionGains g;
  QuadState s;
  const AttitudeThrust c = cascade_controller(s, {50.0, -50.0, 0.0}, g, vp);
  EXPECT_NEAR(std::abs(c.att.phi), g.max_tilt, 1e-15);
  EXPECT_NEAR(std::abs(c.att.theta), g.max_tilt, 1e-15);
  EXPECT_GT(c.att.phi, 0.0);   // toward +x
  EXPECT_GT(c.att.theta, 0.0);  // toward -y
}

TEST(Controller, AccelerationInversionReproducesCommand) {
  const VehicleParams vp;
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> a(-2.0, 2.0), yaw(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 cmd(a(rng), a(rng), a(rng));
    const double psi = yaw(rng);
    const AttitudeThrust c = attitude_for_acceleration(cmd, psi, PositionGains{}, vp);
    const Vec3 thrust = oracle::rotation(c.att.phi, c.att.theta, psi) * Vec3(0, 0, c.fp);
    const Vec3 got = thrust / vp.quad.mass - vp.quad.g * Vec3::UnitZ();
    EXPECT_LT((got - cmd).norm(), 1e-12);
  }
}

TEST(Controller, UntetheredClosedLoopReachesGoal) {
  VehicleParams vp;
  const PositionGains g;
  QuadState s;
  s.pos = {0.0, 0.0, 1.0};
  const Vec3 goal(0.5, -0.4, 1.5);
  Vec3 integral = Vec3::Zero();
  for (int k = 0; k < 1500; ++k) {
    integral += (goal - s.pos) * 0.01;
    const AttitudeThrust c = cascade_controller(s, goal, g, vp, integral);
    for (int j = 0; j < 10; ++j) {
      s = apply_command(s, c, vp, 1e-3);
      s = step_dynamics(s, {}, Vec3::Zero(), vp, 1e-3);
    }
  }
  EXPECT_LT((s.pos - goal).norm(), 0.02 * goal.norm());
}

TEST(TensionFollowing, ThresholdGate) {
  ControllerConfig cfg;
  cfg.pull_threshold = 0.05;
  const Vec3 goal(1, 0, 1), here(0.9, 0.1, 0.8);
  auto u = tension_following_update(goal, {0.0, 0.0, -0.04}, here, false, cfg);
  EXPECT_EQ(u.goal, goal);
  EXPECT_FALSE(u.following);
  u = tension_following_update(goal, {0.0, 0.0, -0.05}, here, true, cfg);
  EXPECT_EQ(u.goal, goal);
  EXPECT_TRUE(u.following);
  u = tension_following_update(goal, {0.03, 0.0, -0.05}, here, false, cfg);
  EXPECT_EQ(u.goal, here);
  EXPECT_TRUE(u.following);
}

TEST(TensionGoal, ZeroCommandAtGoal) {
  const ControllerConfig cfg;
  const Vec3 a = tension_goal_controller({-0.01, 0.002, -0.04}, {-0.01, 0.002}, 1.0, 1.0,
                                         Vec3::Zero(), 0.0, cfg);
  EXPECT_TRUE(a.isZero());
}

TEST(TensionGoal, MovesTowardAnchorWhenPulledHarder) {
  // Vehicle on +x beyond its goal: the tether pulls harder toward -x than
  // the goal tension, so it is commanded back toward the anchor.
  const ControllerConfig cfg;
  const Vec3 a = tension_goal_controller({-0.03, 0.0, -0.05}, {-0.01, 0.0}, 1.0, 1.0,
                                         Vec3::Zero(), 0.0, cfg);
  EXPECT_LT(a.x(), 0.0);
  const Vec3 b = tension_goal_controller({-0.005, 0.0, -0.05}, {-0.01, 0.0}, 1.0, 1.0,
                                         Vec3::Zero(), 0.0, cfg);
  EXPECT_GT(b.x(), 0.0);
  // Null goal: drift along the tension until it vanishes.
  const Vec3 c = tension_goal_controller({-0.01, 0.02, -0.05}, {0.0, 0.0}, 1.0, 1.0,
                                         Vec3::Zero(), 0.0, cfg);
  EXPECT_LT(c.x(), 0.0);
  EXPECT_GT(c.y(), 0.0);
}

TEST(LandingMonitor, Gate) {
  ControllerConfig cfg;
  cfg.landing_height = 0.15;
  EXPECT_FALSE(landing_monitor(false, 0.05, cfg));
  EXPECT_TRUE(landing_monitor(true, 0.1, cfg));
  EXPECT_FALSE(landing_monitor(true, 0.2, cfg));
}

TEST(PullProfile, AlongTetherOrFixedVector) {
  PullProfile p;
  p.segments.push_back({1.0, 2.0, 0.1, std::nullopt});
  p.segments.push_back({3.0, 4.0, 0.0, Vec3(0.0, 0.2, 0.0)});
  const Vec3 dir(0.6, 0.0, -0.8);
  EXPECT_TRUE(p.at(0.5, dir).isZero());
  EXPECT_TRUE(p.at(1.5, dir).isApprox(0.1 * dir));
  EXPECT_TRUE(p.at(2.0, dir).isZero());
  EXPECT_EQ(p.at(3.5, dir), Vec3(0.0, 0.2, 0.0));
  EXPECT_TRUE(p.valid());
  p.segments.push_back({3.5, 5.0, 0.1, std::nullopt});
  EXPECT_FALSE(p.valid());
}

TEST(RunScenario, RowsPerTickAndIncreasingTime) {
  Scenario sc = bundled("hover");
  sc.duration = 2.0;
  const RunResult r = run_scenario(sc);
  ASSERT_EQ(r.rows.size(), 200u);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_GT(r.rows[i].t, r.rows[i - 1].t);
  EXPECT_EQ(r.rows[10].t, 0.1);
}

TEST(RunScenario, Deterministic) {
  Scenario sc = bundled("hover_offset");
  sc.duration = 3.0;
  const RunResult a = run_scenario(sc), b = run_scenario(sc);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].values(), b.rows[i].values());
  sc.noise.seed += 1;
  const RunResult c = run_scenario(sc);
  EXPECT_NE(a.rows.back().tx_obs, c.rows.back().tx_obs);
}

TEST(RunScenario, InvariantsOverBundledScenarios) {
  for (const char* name : {"hover", "hover_offset", "pull_land", "pull_release", "tension_goal"}) {
    const Scenario sc = bundled(name);
    const RunResult r = run_scenario(sc);
    ASSERT_FALSE(r.aborted) << name;
    bool off = false;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const auto& row = r.rows[i];
      if (row.motors_on) {
        EXPECT_LE(row.z, sc.anchor.z_i + sc.tether.s_total + 1e-3) << name;
      }
      if (off) EXPECT_FALSE(row.motors_on) << name << " motors restarted";
      off = !row.motors_on;
      if (i > 0) {
        const auto& prev = r.rows[i - 1];
        const bool moved = row.goal_x != prev.goal_x || row.goal_y != prev.goal_y ||
                           row.goal_z != prev.goal_z;
        const double est = std::sqrt(row.tx_est * row.tx_est + row.ty_est * row.ty_est +
                                     row.tz_est * row.tz_est);
        if (moved) EXPECT_GT(est, sc.controller.pull_threshold) << name << " tick " << i;
      }
    }
  }
}

TEST(RunScenario, PullMovesGoalAlongPull) {
  const Scenario sc = bundled("pull_land");
  const RunResult r = run_scenario(sc);
  // While the pull is active and followed, the goal trails down and in
  // toward the anchor like the pull itself.
  double prev_z = 1e9, prev_x = 1e9;
  int updates = 0;
  for (const auto& row : r.rows) {
    if (!row.following || !row.motors_on) continue;
    if (row.goal_z != prev_z) {
      EXPECT_LE(row.goal_z, prev_z + 1e-3);
      EXPECT_LE(row.goal_x, prev_x + 1e-3);
      ++updates;
    }
    prev_z = row.goal_z;
    prev_x = row.goal_x;
  }
  EXPECT_GT(updates, 10);
  EXPECT_TRUE(r.rows.back().following);
  EXPECT_FALSE(r.rows.back().motors_on);
  EXPECT_LT(r.rows.back().z, sc.controller.landing_height);
}

TEST(RunScenario, ReleasedPullFreezesGoal) {
  const Scenario sc = bundled("pull_release");
  const RunResult r = run_scenario(sc);
  const double t_release = sc.pulls.segments.back().t_end;
  // Last goal update after the release.
  std::size_t last_update = 0;
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    if (r.rows[i].goal_z != r.rows[i - 1].goal_z) last_update = i;
  }
  ASSERT_GT(last_update, 0u);
  EXPECT_LT(r.rows[last_update].t, t_release + 0.5);
  const auto& last = r.rows.back();
  EXPECT_TRUE(last.following);
  EXPECT_TRUE(last.motors_on);
  EXPECT_EQ(last.goal_z, r.rows[last_update].goal_z);
  EXPECT_NEAR(last.z, last.goal_z, 0.05);
}

TEST(RunScenario, TensionGoalReachesGoalPosition) {
  const Scenario sc = bundled("tension_goal");
  const RunResult r = run_scenario(sc);
  const auto& last = r.rows.back();
  EXPECT_LT((Vec3(last.x, last.y, last.z) - sc.controller.goal_pos).norm(), 0.1);
}

TEST(RunScenario, TautTetherAbortsWithPartialTrace) {
  Scenario sc = bundled("hover_offset");
  sc.duration = 10.0;
  sc.controller.goal_pos = {3.0, 0.0, 1.0};
  const RunResult r = run_scenario(sc);
  EXPECT_TRUE(r.aborted);
  EXPECT_NE(r.abort_reason.find("taut"), std::string::npos);
  EXPECT_GT(r.rows.size(), 0u);
  EXPECT_LT(r.rows.size(), 1000u);
}

TEST(RunScenario, RejectsInvalidScenario) {
  Scenario sc;
  sc.duration = -1.0;
  sc.tether.omega = 0.0;
  try {
    run_scenario(sc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("duration"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("tether.omega"), std::string::npos);
  }
}
