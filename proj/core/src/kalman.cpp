#include "tetherfly/kalman.hpp"

#include <cmath>

#include "tetherfly/error.hpp"

namespace tetherfly::tension {

KalmanConfig KalmanConfig::constant_model() { return KalmanConfig{}; }

KalmanConfig KalmanConfig::derivative_model() {
  KalmanConfig cfg;
  cfg.model = KalmanModel::Derivative;
  cfg.q_var = 1e-8;
  return cfg;
}

LinearModel<3, 3> constant_model_matrices(const KalmanConfig& cfg) {
  LinearModel<3, 3> m;
  m.a.setIdentity();
  m.c.setIdentity();
  m.q = cfg.q_var * Eigen::Matrix3d::Identity();
  m.r = cfg.r_var * Eigen::Matrix3d::Identity();
  return m;
}

LinearModel<3, 1> derivative_model_matrices(const KalmanConfig& cfg) {
  const double a = cfg.deriv_a;
  const double b = cfg.deriv_b;
  LinearModel<3, 1> m;
  m.a << 0.0, 1.0, 0.0,
         0.0, 0.0, 1.0,
         b, -(a + 2.0 * b), 1.0 + a + b;
  m.c << 0.0, 0.0, 1.0;
  // Only the newest entry is uncertain; the others are shifted history.
  m.q.setZero();
  m.q(2, 2) = cfg.q_var;
  m.r(0, 0) = cfg.r_var;
  return m;
}

KalmanState kalman_init(const KalmanConfig& cfg) {
  if (!cfg.valid()) {
    throw Error(ErrorCode::InvalidInput,
                "kalman: q_var, r_var and p0 must be positive");
  }
  if (cfg.model == KalmanModel::Constant) {
    ConstantFilter f;
    f.xhat = cfg.x0;
    f.p = cfg.p0 * Eigen::Matrix3d::Identity();
    f.gain.setZero();
    return KalmanState{f};
  }
  DerivativeFilter axes;
  for (int i = 0; i < 3; ++i) {
    axes[i].xhat.setConstant(cfg.x0[i]);
    axes[i].p = cfg.p0 * Eigen::Matrix3d::Identity();
    axes[i].gain.setZero();
  }
  return KalmanState{axes};
}

KalmanState kalman_step(const KalmanState& state, const KalmanConfig& cfg,
                        const TensionVec& y) {
  if (!std::isfinite(y.tx) || !std::isfinite(y.ty) || !std::isfinite(y.tz)) {
    throw Error(ErrorCode::InvalidInput, "kalman: non-finite observation");
  }
  if (const auto* f = std::get_if<ConstantFilter>(&state.filter)) {
    return KalmanState{predict_update(*f, constant_model_matrices(cfg), y.vec())};
  }
  const auto& axes = std::get<DerivativeFilter>(state.filter);
  const LinearModel<3, 1> model = derivative_model_matrices(cfg);
  const Eigen::Vector3d obs = y.vec();
  DerivativeFilter next;
  for (int i = 0; i < 3; ++i) {
    next[i] = predict_update(axes[i], model, Eigen::Matrix<double, 1, 1>(obs[i]));
  }
  return KalmanState{next};
}

TensionVec estimate(const KalmanState& state) {
  if (const auto* f = std::get_if<ConstantFilter>(&state.filter)) {
    return TensionVec::from(f->xhat);
  }
  const auto& axes = std::get<DerivativeFilter>(state.filter);
  return {axes[0].xhat[2], axes[1].xhat[2], axes[2].xhat[2]};
}

}  // namespace tetherfly::tension
