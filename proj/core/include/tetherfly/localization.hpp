#pragma once

#include <optional>

#include <Eigen/Core>

#include "tetherfly/catenary.hpp"
#include "tetherfly/tension.hpp"

namespace tetherfly::localization {

// Ground attachment point in the vertical plane through the vehicle.
struct AnchorPose {
  double r_i = 0.0;    // m, usually 0
  double z_i = 0.754;  // m
};

struct PolarPosition {
  double r = 0.0;     // radial distance, m
  double z = 0.0;     // altitude, m
  double beta = 0.0;  // azimuth, rad
};

struct CurveFromTension {
  double a = 0.0;
  double s2 = 0.0;
  bool clamped = false;  // |Tv|/omega fell outside [0, s_total]
};

// Below this `a` the a -> 0 limit formulas are used.
inline constexpr double kMinShapeParameter = 1e-6;

// a = H/omega, s2 = |Tv|/omega clamped to [0, s_total].
CurveFromTension params_from_tension(double h, double tv,
                                     const catenary::TetherProperties& tether);

// (r, z) of the tether's free end given the curve parameters measured at
// that end. beta is left at zero. Throws Error(InvalidArc) if s2 is outside
// [0, s_total].
PolarPosition locate(double a, double s2,
                     const catenary::TetherProperties& tether,
                     const AnchorPose& anchor);

struct LocateResult {
  PolarPosition position;
  bool clamped = false;
};

// The tension acts on the vehicle and points back along the tether, so the
// vehicle azimuth is the direction of (-Tx, -Ty). `beta_override` replaces
// that azimuth with an externally measured one.
LocateResult locate_from_tension(const tension::TensionVec& t,
                                 const catenary::TetherProperties& tether,
                                 const AnchorPose& anchor,
                                 std::optional<double> beta_override = {});

Eigen::Vector3d polar_to_cartesian(const PolarPosition& p);

}  // namespace tetherfly::localization
