#include "tetherfly/catenary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tetherfly/error.hpp"

namespace tetherfly {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoPhysicalRoot: return "NoPhysicalRoot";
    case ErrorCode::OutsideSpan: return "OutsideSpan";
    case ErrorCode::InvalidArc: return "InvalidArc";
    case ErrorCode::TetherTaut: return "TetherTaut";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Schema: return "Schema";
  }
  return "Unknown";
}

}  // namespace tetherfly

namespace tetherfly::catenary {
namespace {

bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Abscissas closer than this (relative to the tether length) are treated as
// a vertical tether: the limit a -> 0 of the curve.
constexpr double kVerticalSpan = 1e-12;

// Newton on a scalar function of `a`. `eval` returns {value, derivative,
// normalized residual in meters}.
struct NewtonSample {
  double value;
  double derivative;
  double residual;
};

template <typename Eval>
bool newton(Eval&& eval, double a0, double residual_tol, int max_iter,
            double& a_out, int& iterations) {
  double a = a0;
  iterations = 0;
  for (int i = 0; i < max_iter; ++i) {
    const NewtonSample s = eval(a);
    if (!std::isfinite(s.value) || !std::isfinite(s.derivative) ||
        s.derivative == 0.0) {
      return false;
    }
    if (s.residual == 0.0) break;
    const double step = s.value / s.derivative;
    const double next = a - step;
    ++iterations;
    if (!(next > 0.0) || !std::isfinite(next) || next > 1e8 * a0) return false;
    a = next;
    if (std::abs(step) <= 1e-14 * a) break;
  }
  a_out = a;
  const double r = eval(a).residual;
  return std::isfinite(r) && std::abs(r) <= residual_tol;
}

// Bisection in log-space on a residual that decreases in `a`. The starting
// bracket [a0/100, 100 a0] is widened until it straddles the root.
double bisect(const auto& residual, double a0) {
  double lo = a0 / 100.0;
  double hi = a0 * 100.0;
  for (int i = 0; i < 60 && !(residual(lo) > 0.0); ++i) lo /= 100.0;
  for (int i = 0; i < 60 && !(residual(hi) < 0.0); ++i) hi *= 100.0;
  for (int i = 0; i < 400 && hi / lo - 1.0 > 4e-16; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (residual(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

}  // namespace

SolverSettings SolverSettings::defaults_for(const TetherProperties& tether) {
  SolverSettings s;
  s.dy_epsilon = 1e-6 * tether.s_total;
  return s;
}

double eval_height(const CatenaryParams& params, double x) {
  return params.a * std::cosh((x - params.x0) / params.a) + params.c;
}

double arc_length_from_lowest(const CatenaryParams& params, double x) {
  return params.a * std::sinh(std::abs(x - params.x0) / params.a);
}

TensionPolar end_tensions(const CatenaryParams& params,
                          const TetherProperties& tether, End side) {
  TensionPolar t;
  t.h = tether.omega * params.a;
  t.tv = tether.omega * (side == End::Origin ? params.s1 : params.s2);
  t.mag = std::hypot(t.h, t.tv);
  return t;
}

HorizontalComponents decompose_horizontal(double h, double beta) {
  return {std::cos(beta) * h, std::sin(beta) * h};
}

HorizontalPolar compose_horizontal(double tx, double ty) {
  const double h = std::hypot(tx, ty);
  if (h == 0.0) return {0.0, 0.0};
  return {h, std::atan2(ty, tx)};
}

double initial_guess_a(double dx, double dy, double s_total) {
  dx = std::abs(dx);
  if (!(s_total > 0.0) || !std::isfinite(dx) || !std::isfinite(dy) ||
      std::abs(dy) >= s_total) {
    throw Error(ErrorCode::NoPhysicalRoot,
                "initial guess: inputs outside the catenary model");
  }
  // Quadratic in alpha = a^2:
  //   (dY / (2 sinh(atanh(dY/s))) - dx) alpha^2 - dx^3/3! alpha - dx^5/5! = 0
  // dY/(2 sinh(atanh(dY/s))) tends to s/2 as dY -> 0.
  const double half_projected =
      dy == 0.0 ? 0.5 * s_total
                : dy / (2.0 * std::sinh(std::atanh(dy / s_total)));
  const double qa = half_projected - dx;
  const double qb = -std::pow(dx, 3) / 6.0;
  const double qc = -std::pow(dx, 5) / 120.0;

  const double disc = qb * qb - 4.0 * qa * qc;
  if (!(qa > 0.0) || !(disc >= 0.0)) {
    throw Error(ErrorCode::NoPhysicalRoot,
                "initial guess: no positive real root (length does not "
                "exceed the chord)");
  }
  // Stable form; both roots are checked and the positive one is kept.
  const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
  double alpha = -1.0;
  for (double root : {q / qa, q != 0.0 ? qc / q : -1.0}) {
    if (root > 0.0 && std::isfinite(root)) alpha = std::max(alpha, root);
  }
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::NoPhysicalRoot,
                "initial guess: no positive real root");
  }
  return std::sqrt(alpha);
}

ShapeSolution solve_shape(Point2 p1, Point2 p2, double s_total,
                          const SolverSettings& settings) {
  if (!finite(p1) || !finite(p2) || !std::isfinite(s_total)) {
    throw Error(ErrorCode::InvalidInput, "catenary: non-finite input");
  }
  if (!(settings.tol > 0.0) || settings.max_iter < 1) {
    throw Error(ErrorCode::InvalidInput, "catenary: invalid solver settings");
  }
  const double chord = std::hypot(p2.x - p1.x, p2.y - p1.y);
  if (!(s_total > chord)) {
    throw Error(ErrorCode::TooShort, "tether shorter than chord", chord);
  }

  // Work with x1 <= x2 and mirror back at the end.
  const bool mirrored = p2.x < p1.x;
  if (mirrored) {
    p1.x = -p1.x;
    p2.x = -p2.x;
  }

  ShapeSolution out;
  const double dx = 0.5 * (p2.x - p1.x);
  const double x_avg = 0.5 * (p1.x + p2.x);
  const double dy = p2.y - p1.y;

  if (2.0 * dx <= kVerticalSpan * s_total) {
    // Both ends on one vertical: two hanging strands meeting at
    // y0 = (y1 + y2 - s)/2.
    out.vertical = true;
    out.a = 0.0;
    out.x0 = mirrored ? -p1.x : p1.x;
    out.c = 0.5 * (p1.y + p2.y - s_total);
    return out;
  }

  const double projected = std::sqrt(s_total * s_total - dy * dy);
  out.symmetric = std::abs(dy) < settings.effective_dy_epsilon(s_total);
  // Stop once the equations hold well inside `tol`; the residual of the
  // endpoint/length equations is this residual scaled by s/L.
  const double residual_tol = 0.5 * settings.tol * projected / s_total;

  out.a0 = initial_guess_a(dx, out.symmetric ? 0.0 : dy, s_total);

  const auto sag = [dx](double a) { return 2.0 * a * std::sinh(dx / a); };
  const auto sag_slope = [dx](double a) {
    const double u = dx / a;
    return 2.0 * (std::sinh(u) - u * std::cosh(u));
  };

  bool converged = false;
  double a = out.a0;
  if (out.symmetric) {
    // x0 = x_avg, length equation 2 a sinh(dx/a) cosh(0) = s.
    const auto eval = [&](double v) {
      const double g = sag(v) - s_total;
      return NewtonSample{g, sag_slope(v), g};
    };
    converged = newton(eval, out.a0, 0.5 * settings.tol, settings.max_iter, a,
                       out.newton_iterations);
    if (!converged) {
      out.bisection = true;
      a = bisect([&](double v) { return sag(v) - s_total; }, out.a0);
    }
    out.residual = std::abs(sag(a) - s_total);
  } else {
    // dY - 2 a sinh(dx/a) sinh(atanh(dY/s)) = 0, normalized by its dY
    // factor for the tolerance test.
    const double k = std::sinh(std::atanh(dy / s_total));
    const auto eval = [&](double v) {
      const double f = dy - sag(v) * k;
      return NewtonSample{f, -k * sag_slope(v), sag(v) - projected};
    };
    converged = newton(eval, out.a0, residual_tol, settings.max_iter, a,
                       out.newton_iterations);
    if (!converged) {
      out.bisection = true;
      a = bisect([&](double v) { return sag(v) - projected; }, out.a0);
    }
    out.residual = std::abs(sag(a) - projected);
  }

  out.a = a;
  const double x0 =
      out.symmetric ? x_avg : x_avg - a * std::atanh(dy / s_total);
  out.c = p1.y - a * std::cosh((p1.x - x0) / a);
  out.x0 = mirrored ? -x0 : x0;
  return out;
}

CatenaryParams solve_from_endpoints(Point2 p1, Point2 p2,
                                    const TetherProperties& tether,
                                    const SolverSettings& settings) {
  if (!tether.valid()) {
    throw Error(ErrorCode::InvalidInput,
                "catenary: tether properties must be positive");
  }
  const double s_total = tether.s_total;
  const ShapeSolution shape = solve_shape(p1, p2, s_total, settings);

  CatenaryParams params;
  params.a = shape.a;
  params.x0 = shape.x0;
  params.c = shape.c;
  if (shape.vertical) {
    params.s1 = p1.y - shape.c;
    params.s2 = p2.y - shape.c;
    return params;
  }

  const double lo = std::min(p1.x, p2.x);
  const double hi = std::max(p1.x, p2.x);
  const double slack = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
  if (shape.x0 < lo - slack || shape.x0 > hi + slack) {
    throw Error(ErrorCode::OutsideSpan,
                "lowest point outside the span; s1 + s2 = s_total does not "
                "hold for this configuration",
                shape.x0);
  }
  params.s1 = arc_length_from_lowest(params, p1.x);
  params.s2 = arc_length_from_lowest(params, p2.x);

  const double residual = max_residual(params, p1, p2, s_total);
  // The symmetric branch pins x0 to mid-span, which leaves |dY| unresolved.
  const double allowed =
      settings.tol + (shape.symmetric ? std::abs(p2.y - p1.y) : 0.0);
  if (!(residual <= allowed)) {
    throw Error(ErrorCode::NoConvergence,
                "catenary solver did not reach tolerance (residual " +
                    std::to_string(residual) + ")",
                residual);
  }
  return params;
}

double max_residual(const CatenaryParams& params, Point2 p1, Point2 p2,
                    double s_total) {
  double r = std::abs(params.s1 + params.s2 - s_total);
  if (params.a == 0.0) {
    r = std::max({r, std::abs(params.c + params.s1 - p1.y),
                  std::abs(params.c + params.s2 - p2.y),
                  std::abs(p1.x - params.x0), std::abs(p2.x - params.x0)});
    return r;
  }
  r = std::max({r, std::abs(eval_height(params, p1.x) - p1.y),
                std::abs(eval_height(params, p2.x) - p2.y),
                std::abs(arc_length_from_lowest(params, p1.x) - params.s1),
                std::abs(arc_length_from_lowest(params, p2.x) - params.s2)});
  return r;
}

}  // namespace tetherfly::catenary
