#pragma once

#include "dia/grid.hpp"
#include "dia/model.hpp"

#include <Eigen/Dense>

namespace dia {

/// Coefficients of the large-wealth expansion of the post-retirement value
///   J ~ w_m^{1-gamma} [ h(t) u(W) + delta k(t) u'(W) ],  W = w / w_m,
///   delta = (1 + I) / w_m,
/// tabulated on the post-retirement time axis (index n <-> axis.at(n)).
struct AsymptoticCoeffs {
    Eigen::VectorXd h;
    Eigen::VectorXd k;
    TimeAxis axis;
    double w_m{};
    double gamma{};

    double delta(double income) const { return (1.0 + income) / w_m; }

    /// Expansion evaluated at time index n.
    double value(Eigen::Index n, double w, double income) const;
};

/// Integrates the h and k equations backward from h(T) = k(T) = 1 with
/// classical RK4 on `axis` (years since retirement). The portfolio holds
/// fraction `alpha` in the risky asset. Throws NumericalError if either
/// coefficient leaves (0, inf).
AsymptoticCoeffs integrate_hk(const ModelParams& params, const TimeAxis& axis, double w_m, double alpha = 1.0);

/// Right-hand sides dh/dt and dk/dt at time t (years since retirement).
Eigen::Vector2d hk_rhs(const ModelParams& params, double alpha, double t, const Eigen::Vector2d& hk);

}  // namespace dia
