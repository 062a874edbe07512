#pragma once

#include <array>
#include <variant>

#include <Eigen/Dense>

#include "tetherfly/tension.hpp"

namespace tetherfly::tension {

enum class KalmanModel {
  Constant,    // T_{k+1} = T_k, one 3-state filter over (Tx, Ty, Tz)
  Derivative,  // T_{k+1} = T_k + a dT_k + b d2T_k, one 3-state filter per axis
};

struct KalmanConfig {
  KalmanModel model = KalmanModel::Constant;
  double q_var = 1e-5;    // process noise variance, N^2
  double r_var = 1e-2;    // observation noise variance per channel, N^2
  double deriv_a = 0.978;  // weight of the first difference
  double deriv_b = -0.97;  // weight of the second difference
  Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
  double p0 = 1.0;        // initial covariance diagonal, N^2

  static KalmanConfig constant_model();
  static KalmanConfig derivative_model();
  bool valid() const { return q_var > 0.0 && r_var > 0.0 && p0 > 0.0; }
};

template <int N, int M>
struct LinearFilter {
  Eigen::Matrix<double, N, 1> xhat;
  Eigen::Matrix<double, N, N> p;
  Eigen::Matrix<double, N, M> gain;
};

template <int N, int M>
struct LinearModel {
  Eigen::Matrix<double, N, N> a;
  Eigen::Matrix<double, M, N> c;
  Eigen::Matrix<double, N, N> q;
  Eigen::Matrix<double, M, M> r;
};

// Predict with the process model, then correct with y (Joseph-form
// covariance update, symmetrized).
template <int N, int M>
LinearFilter<N, M> predict_update(const LinearFilter<N, M>& prior,
                                  const LinearModel<N, M>& model,
                                  const Eigen::Matrix<double, M, 1>& y) {
  using MatN = Eigen::Matrix<double, N, N>;
  LinearFilter<N, M> next;
  const Eigen::Matrix<double, N, 1> x_pred = model.a * prior.xhat;
  const MatN p_pred = model.a * prior.p * model.a.transpose() + model.q;
  const Eigen::Matrix<double, M, M> s =
      model.c * p_pred * model.c.transpose() + model.r;
  next.gain = p_pred * model.c.transpose() * s.inverse();
  next.xhat = x_pred + next.gain * (y - model.c * x_pred);
  const MatN i_kc = MatN::Identity() - next.gain * model.c;
  const MatN p = i_kc * p_pred * i_kc.transpose() +
                 next.gain * model.r * next.gain.transpose();
  next.p = 0.5 * (p + p.transpose());
  return next;
}

using ConstantFilter = LinearFilter<3, 3>;
// Per axis, states are (T_{k-2}, T_{k-1}, T_k).
using DerivativeFilter = std::array<LinearFilter<3, 1>, 3>;

struct KalmanState {
  std::variant<ConstantFilter, DerivativeFilter> filter;

  KalmanModel model() const {
    return filter.index() == 0 ? KalmanModel::Constant
                               : KalmanModel::Derivative;
  }
};

LinearModel<3, 3> constant_model_matrices(const KalmanConfig& cfg);
LinearModel<3, 1> derivative_model_matrices(const KalmanConfig& cfg);

KalmanState kalman_init(const KalmanConfig& cfg);
KalmanState kalman_step(const KalmanState& state, const KalmanConfig& cfg,
                        const TensionVec& y);

// Current tension estimate: the state for the constant model, the newest
// history entry per axis for the derivative model.
TensionVec estimate(const KalmanState& state);

}  // namespace tetherfly::tension
