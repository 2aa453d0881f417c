#pragma once

#include <cmath>
#include <stdexcept>

namespace dia {

/// Capital-market and cash-flow assumptions. Wealth is measured in units of
/// the pension rate pi.
template <typename Scalar>
struct MarketModel {
    Scalar mu{0.08};      ///< risky drift
    Scalar sigma{0.16};   ///< risky volatility
    Scalar r{0.0325};     ///< risk-free rate
    Scalar rho{0.0325};   ///< subjective discount rate
    Scalar nu{1};         ///< pre-retirement savings rate
    Scalar pi{1};         ///< exogenous pension rate

    void validate() const {
        if (!(sigma > Scalar(0))) throw std::invalid_argument("market: sigma must be positive");
        if (!(pi > Scalar(0))) throw std::invalid_argument("market: pi must be positive");
        if (nu < Scalar(0)) throw std::invalid_argument("market: nu must be non-negative");
    }

    /// Portfolio drift with fraction `alpha` in the risky asset.
    Scalar drift(const Scalar& alpha) const { return alpha * mu + (Scalar(1) - alpha) * r; }
    Scalar volatility(const Scalar& alpha) const { return alpha * sigma; }
};

/// CRRA preferences U(c) = c^{1-gamma} / (1-gamma); gamma = 1 is excluded.
template <typename Scalar>
struct Preferences {
    Scalar gamma{3};

    void validate() const {
        if (!(gamma > Scalar(0))) throw std::invalid_argument("preferences: gamma must be positive");
        if (gamma == Scalar(1)) throw std::invalid_argument("preferences: gamma = 1 (log utility) is not supported");
    }
};

template <typename Scalar>
Scalar utility(const Preferences<Scalar>& pref, const Scalar& c) {
    using std::pow;
    if (!(c > Scalar(0))) throw std::domain_error("utility: consumption must be positive");
    return pow(c, Scalar(1) - pref.gamma) / (Scalar(1) - pref.gamma);
}

template <typename Scalar>
Scalar marginal_utility(const Preferences<Scalar>& pref, const Scalar& c) {
    using std::pow;
    if (!(c > Scalar(0))) throw std::domain_error("marginal_utility: consumption must be positive");
    return pow(c, -pref.gamma);
}

/// Optimal consumption c* solving U'(c) = jw.
template <typename Scalar>
Scalar inverse_marginal_utility(const Preferences<Scalar>& pref, const Scalar& jw) {
    using std::pow;
    if (!(jw > Scalar(0))) throw std::domain_error("inverse_marginal_utility: non-positive marginal value");
    return pow(jw, Scalar(-1) / pref.gamma);
}

/// Unconstrained Merton fraction (mu - r) / (gamma sigma^2).
template <typename Scalar>
Scalar merton_fraction(const MarketModel<Scalar>& market, const Preferences<Scalar>& pref) {
    return (market.mu - market.r) / (pref.gamma * market.sigma * market.sigma);
}

}  // namespace dia
