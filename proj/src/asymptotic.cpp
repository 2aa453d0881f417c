#include "dia/asymptotic.hpp"

#include "dia/errors.hpp"

#include <cmath>

namespace dia {

Eigen::Vector2d hk_rhs(const ModelParams& params, double alpha, double t, const Eigen::Vector2d& hk) {
    const double g = params.preferences.gamma;
    const double mu = params.market.drift(alpha);
    const double sigma = params.market.volatility(alpha);
    const double rho = params.market.rho;
    const double lam = hazard(params.mortality, params.retirement_age() + t);
    const double h = hk(0);
    const double k = hk(1);
    Eigen::Vector2d out;
    out(0) = ((g - 1) * mu + rho + lam + g * (1 - g) * sigma * sigma / 2) * h - g * std::pow(h, (g - 1) / g) - lam;
    out(1) = (g * mu - g * std::pow(h, -1 / g) + rho + lam - sigma * sigma / 2 * g * (1 + g)) * k - lam - h;
    return out;
}

double AsymptoticCoeffs::value(Eigen::Index n, double w, double income) const {
    const double W = w / w_m;
    const double u = std::pow(W, 1 - gamma) / (1 - gamma);
    const double du = std::pow(W, -gamma);
    return std::pow(w_m, 1 - gamma) * (h(n) * u + delta(income) * k(n) * du);
}

AsymptoticCoeffs integrate_hk(const ModelParams& params, const TimeAxis& axis, double w_m, double alpha) {
    if (params.preferences.gamma == 1.0) throw std::invalid_argument("integrate_hk: gamma = 1 not supported");
    if (!(axis.end > axis.start)) throw std::invalid_argument("integrate_hk: empty horizon");

    AsymptoticCoeffs out;
    out.axis = axis;
    out.w_m = w_m;
    out.gamma = params.preferences.gamma;
    out.h.resize(axis.steps + 1);
    out.k.resize(axis.steps + 1);

    Eigen::Vector2d y(1.0, 1.0);
    out.h(axis.steps) = 1.0;
    out.k(axis.steps) = 1.0;
    const double dt = axis.dt();
    for (int n = axis.steps; n > 0; --n) {
        const double t = axis.at(n);
        const Eigen::Vector2d k1 = hk_rhs(params, alpha, t, y);
        const Eigen::Vector2d k2 = hk_rhs(params, alpha, t - dt / 2, y - dt / 2 * k1);
        const Eigen::Vector2d k3 = hk_rhs(params, alpha, t - dt / 2, y - dt / 2 * k2);
        const Eigen::Vector2d k4 = hk_rhs(params, alpha, t - dt, y - dt * k3);
        y -= dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!(y(0) > 0) || !(y(1) > 0) || !y.allFinite())
            throw NumericalError("integrate_hk: coefficient left the positive range at t = " + std::to_string(t - dt));
        out.h(n - 1) = y(0);
        out.k(n - 1) = y(1);
    }
    return out;
}

}  // namespace dia
