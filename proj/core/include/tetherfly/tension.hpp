#pragma once

#include <cmath>

#include <Eigen/Core>

#include "tetherfly/catenary.hpp"

namespace tetherfly::tension {

// Euler angles of the body frame. The world-from-body rotation is
// Rz(psi) * Ry(phi) * Rx(theta): phi tilts body z toward world x, theta
// toward world -y. This ordering is the one under which the attitude terms
// of the vertical/horizontal tension formulas are columns/rows of R.
struct Attitude {
  double phi = 0.0;    // roll, rad
  double theta = 0.0;  // pitch, rad
  double psi = 0.0;    // yaw, rad
};

// One inertial/thrust reading. accel_body is specific force (what an
// accelerometer measures): a level vehicle at rest reads (0, 0, +g).
struct ImuSample {
  double t = 0.0;
  Eigen::Vector3d accel_body = Eigen::Vector3d::Zero();
  Attitude attitude;
  double thrust = 0.0;  // total propeller force Fp, N
};

// Force the tether applies to the vehicle, world frame, N.
struct TensionVec {
  double tx = 0.0;
  double ty = 0.0;
  double tz = 0.0;

  Eigen::Vector3d vec() const { return {tx, ty, tz}; }
  static TensionVec from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
  double norm() const { return vec().norm(); }
  double horizontal() const { return std::hypot(tx, ty); }
};

struct QuadParams {
  double mass = 0.033;  // kg
  double g = 9.81;      // m/s^2
  // Added to the observation. Equals minus any known external force acting
  // on the vehicle besides thrust, gravity and the tether.
  Eigen::Vector3d f_ext = Eigen::Vector3d::Zero();

  bool valid() const { return mass > 0.0 && g > 0.0; }
};

Eigen::Matrix3d rotation_world_from_body(const Attitude& att);

// Gravity-inclusive world-z acceleration from body specific force:
// -sin(phi) aI_x + cos(phi) sin(theta) aI_y + cos(phi) cos(theta) aI_z.
double accel_world_z(const Attitude& att, const Eigen::Vector3d& accel_body);

// T = m (a + g e3) - R(eta) Fp e3 + F_ext, with a the kinematic world
// acceleration recovered from the specific force reading.
TensionVec observe_tension(const ImuSample& sample, const QuadParams& params);

// Signed; negative when the tether pulls the vehicle down.
double vertical_tension(const Attitude& att, double a_z, double fp,
                        const QuadParams& params);

catenary::HorizontalComponents horizontal_tension_components(
    const Attitude& att, double fp);

// Ground truth for the hanging-mass bench: cos(atan((zq - za)/rq)) * weight.
double bench_horizontal_gt(double weight, double zq, double za, double rq);

// Ground truth for a vertical takeoff: omega * z.
double bench_vertical_gt(const catenary::TetherProperties& tether, double z);

}  // namespace tetherfly::tension
