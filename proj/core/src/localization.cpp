#include "tetherfly/localization.hpp"

#include <algorithm>
#include <cmath>

#include "tetherfly/error.hpp"

namespace tetherfly::localization {

CurveFromTension params_from_tension(double h, double tv,
                                     const catenary::TetherProperties& tether) {
  if (!(tether.omega > 0.0) || !(h >= 0.0)) {
    throw Error(ErrorCode::InvalidInput,
                "localization: need omega > 0 and H >= 0");
  }
  CurveFromTension out;
  out.a = h / tether.omega;
  const double s2 = std::abs(tv) / tether.omega;
  out.s2 = std::clamp(s2, 0.0, tether.s_total);
  out.clamped = out.s2 != s2;
  return out;
}

PolarPosition locate(double a, double s2,
                     const catenary::TetherProperties& tether,
                     const AnchorPose& anchor) {
  if (!(s2 >= 0.0) || !(s2 <= tether.s_total)) {
    throw Error(ErrorCode::InvalidArc, "localization: s2 outside [0, s_total]",
                s2);
  }
  if (!(a >= 0.0)) {
    throw Error(ErrorCode::InvalidInput, "localization: a must be >= 0");
  }
  const double s1 = tether.s_total - s2;
  PolarPosition p;
  if (a <= kMinShapeParameter) {
    p.r = anchor.r_i;
    p.z = anchor.z_i + s2 - s1;
    return p;
  }
  const double r0 = anchor.r_i + a * std::asinh(s1 / a);
  p.r = r0 + a * std::asinh(s2 / a);
  // (r_i - r0)/a = -asinh(s1/a) and (r - r0)/a = asinh(s2/a) exactly; use
  // them directly instead of the rounded differences.
  const double c = anchor.z_i - a * std::cosh(-std::asinh(s1 / a));
  p.z = a * std::cosh(std::asinh(s2 / a)) + c;
  return p;
}

LocateResult locate_from_tension(const tension::TensionVec& t,
                                 const catenary::TetherProperties& tether,
                                 const AnchorPose& anchor,
                                 std::optional<double> beta_override) {
  const catenary::HorizontalPolar horiz =
      catenary::compose_horizontal(-t.tx, -t.ty);
  const CurveFromTension curve = params_from_tension(horiz.h, t.tz, tether);
  LocateResult out;
  out.position = locate(curve.a, curve.s2, tether, anchor);
  out.position.beta = beta_override.value_or(horiz.beta);
  out.clamped = curve.clamped;
  return out;
}

Eigen::Vector3d polar_to_cartesian(const PolarPosition& p) {
  return {p.r * std::cos(p.beta), p.r * std::sin(p.beta), p.z};
}

}  // namespace tetherfly::localization
