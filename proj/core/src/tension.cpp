#include "tetherfly/tension.hpp"

#include <cmath>

#include "tetherfly/error.hpp"

namespace tetherfly::tension {

Eigen::Matrix3d rotation_world_from_body(const Attitude& att) {
  const double sf = std::sin(att.phi), cf = std::cos(att.phi);
  const double st = std::sin(att.theta), ct = std::cos(att.theta);
  const double sp = std::sin(att.psi), cp = std::cos(att.psi);

  Eigen::Matrix3d r;
  r << cp * cf, -sp * ct + cp * sf * st, sp * st + cp * sf * ct,
       sp * cf,  cp * ct + sp * sf * st, sp * sf * ct - cp * st,
       -sf,      cf * st,                cf * ct;
  return r;
}

double accel_world_z(const Attitude& att, const Eigen::Vector3d& accel_body) {
  return -std::sin(att.phi) * accel_body.x() +
         std::cos(att.phi) * std::sin(att.theta) * accel_body.y() +
         std::cos(att.phi) * std::cos(att.theta) * accel_body.z();
}

TensionVec observe_tension(const ImuSample& sample, const QuadParams& params) {
  const Eigen::Matrix3d r = rotation_world_from_body(sample.attitude);
  const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d specific_world = r * sample.accel_body;
  const Eigen::Vector3d accel = specific_world - params.g * e3;
  const Eigen::Vector3d t = params.mass * (accel + params.g * e3) -
                            r * (sample.thrust * e3) + params.f_ext;
  return TensionVec::from(t);
}

double vertical_tension(const Attitude& att, double a_z, double fp,
                        const QuadParams& params) {
  return params.mass * a_z - std::cos(att.theta) * std::cos(att.phi) * fp;
}

catenary::HorizontalComponents horizontal_tension_components(
    const Attitude& att, double fp) {
  const double sf = std::sin(att.phi);
  const double st = std::sin(att.theta), ct = std::cos(att.theta);
  const double sp = std::sin(att.psi), cp = std::cos(att.psi);
  return {-(sp * st + cp * sf * ct) * fp, (cp * st - sp * sf * ct) * fp};
}

double bench_horizontal_gt(double weight, double zq, double za, double rq) {
  if (!(rq > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "bench: radial distance must be > 0");
  }
  const double gamma = std::atan((zq - za) / rq);
  return std::cos(gamma) * weight;
}

double bench_vertical_gt(const catenary::TetherProperties& tether, double z) {
  if (!(z >= 0.0)) {
    throw Error(ErrorCode::InvalidInput, "bench: height must be >= 0");
  }
  return tether.omega * z;
}

}  // namespace tetherfly::tension
