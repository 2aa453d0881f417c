#pragma once

#include "dia/market.hpp"

#include <Eigen/Dense>

namespace dia {

/// Three-point discretization of  diffusion * J_ww + drift * J_w  at an
/// interior node of a non-uniform axis, written as
///   lower * (J_{k-1} - J_k) + upper * (J_{k+1} - J_k).
/// Central differencing is used when it leaves both coefficients
/// non-negative. Otherwise just enough artificial diffusion is added to
/// bring the negative coefficient to zero, which keeps the coefficients
/// continuous in the drift (a hard switch to upwinding makes the lagged
/// allocation control chatter between neighbouring nodes).
struct OperatorCoeffs {
    double lower{};
    double upper{};
    bool central{};
};

OperatorCoeffs positive_coefficients(double diffusion, double drift, double h_minus, double h_plus);

/// Finite-difference derivatives of a column sampled on `w` (central in the
/// interior, one-sided at the ends).
double first_derivative(const Eigen::Ref<const Eigen::VectorXd>& values, const Eigen::VectorXd& w, Eigen::Index k);
double second_derivative(const Eigen::Ref<const Eigen::VectorXd>& values, const Eigen::VectorXd& w, Eigen::Index k);

/// First-order optimal risky fraction -(J_w / J_ww) (mu - r) / (w sigma^2),
/// clamped to [0, 1]. A non-concave node (J_ww >= 0) or w = 0 maps to 1.
double optimal_alpha(double jw, double jww, double w, const MarketModel<double>& market);

/// Consumption c* = J_w^{-1/gamma} taken from the derivative the stencil
/// actually uses: central where `diffusion` alone keeps the stencil
/// monotone, otherwise the one-sided difference in the drift direction.
/// If neither one-sided choice is consistent with its own drift sign, wealth
/// is held still (c = drift_before_consumption). `drift_before_consumption`
/// is the drift with c = 0. Interior nodes only.
double upwind_consumption(const Eigen::Ref<const Eigen::VectorXd>& values, const Eigen::VectorXd& w, Eigen::Index k,
                          double diffusion, double drift_before_consumption, const Preferences<double>& pref);

/// Lagrange weights for interpolating at x from the 4 equally spaced nodes
/// x0 + i h (i = 0..3).
Eigen::Vector4d cubic_weights(double x, double x0, double h);

}  // namespace dia
