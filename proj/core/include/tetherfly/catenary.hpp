#pragma once

// Catenary tether geometry and the two-endpoint inverse solver.
//
// The curve is y = a*cosh((x - x0)/a) + C in a vertical plane. Points are
// (abscissa, ordinate); 3D callers pass (r, z) with r the horizontal radial
// distance.

namespace tetherfly::catenary {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct TetherProperties {
  double omega = 0.0478;  // weight per unit length, N/m
  double s_total = 1.6;   // total length, m

  bool valid() const { return omega > 0.0 && s_total > 0.0; }
};

struct CatenaryParams {
  double a = 0.0;   // shape parameter, m (H = omega * a)
  double x0 = 0.0;  // abscissa of the lowest point, m
  double c = 0.0;   // vertical offset, lowest ordinate is a + c
  double s1 = 0.0;  // arc length lowest point -> origin end, m
  double s2 = 0.0;  // arc length lowest point -> UAV end, m
};

struct TensionPolar {
  double h = 0.0;    // horizontal magnitude, N
  double tv = 0.0;   // vertical magnitude, N
  double mag = 0.0;  // |T|, N
};

struct HorizontalComponents {
  double tx = 0.0;
  double ty = 0.0;
};

struct HorizontalPolar {
  double h = 0.0;
  double beta = 0.0;  // azimuth, rad
};

struct SolverSettings {
  double tol = 1e-9;          // residual tolerance on the solved equations, m
  int max_iter = 100;         // Newton iteration cap
  double dy_epsilon = -1.0;   // |dY| below this takes the symmetric branch;
                              // negative means 1e-6 * s_total

  static SolverSettings defaults_for(const TetherProperties& tether);
  double effective_dy_epsilon(double s_total) const {
    return dy_epsilon > 0.0 ? dy_epsilon : 1e-6 * s_total;
  }
};

enum class End { Origin, Uav };

double eval_height(const CatenaryParams& params, double x);

// a*sinh(|x - x0|/a), the arc length between the lowest point and x.
double arc_length_from_lowest(const CatenaryParams& params, double x);

TensionPolar end_tensions(const CatenaryParams& params,
                          const TetherProperties& tether, End side);

HorizontalComponents decompose_horizontal(double h, double beta);

// beta is 0 when both components vanish.
HorizontalPolar compose_horizontal(double tx, double ty);

// Closed-form starting value for `a` from the fifth-order Taylor expansion of
// sinh in the sag equation, solved as a quadratic in a^2. `dx` is the
// half-span (x2 - x1)/2 and `dy` = y2 - y1. Throws Error(NoPhysicalRoot)
// when no positive real root exists.
double initial_guess_a(double dx, double dy, double s_total);

// Shape of the curve through two points, without assuming the lowest point
// lies between them. Used where only local end quantities matter.
struct ShapeSolution {
  double a = 0.0;
  double x0 = 0.0;
  double c = 0.0;
  double a0 = 0.0;           // initial guess fed to Newton
  int newton_iterations = 0;
  bool bisection = false;    // Newton was abandoned for bracketing
  bool symmetric = false;    // |dY| < dy_epsilon branch
  bool vertical = false;     // endpoints share an abscissa; a == 0
  double residual = 0.0;     // |2a sinh(dx/a) - sqrt(s^2 - dY^2)|, m
};

ShapeSolution solve_shape(Point2 p1, Point2 p2, double s_total,
                          const SolverSettings& settings = {});

// Full parameter set through p1 (origin) and p2 (UAV) for a tether of length
// tether.s_total. Throws Error with TooShort, NoConvergence or OutsideSpan.
CatenaryParams solve_from_endpoints(Point2 p1, Point2 p2,
                                    const TetherProperties& tether,
                                    const SolverSettings& settings = {});

// Largest absolute violation among: height at both ends, s1 + s2 = s_total,
// and the two arc-length definitions. Meters.
double max_residual(const CatenaryParams& params, Point2 p1, Point2 p2,
                    double s_total);

}  // namespace tetherfly::catenary
