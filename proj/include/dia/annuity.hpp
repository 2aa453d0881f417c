#pragma once

#include "dia/market.hpp"
#include "dia/mortality.hpp"
#include "dia/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dia {

/// Deferred income annuity bought at age x + t, paying from age x + tau.
/// Q blends the no-refund (Q = 0) and full-refund (Q = 1) contracts.
template <typename Scalar>
struct DIAContract {
    Scalar Q{1};
    Scalar tau{10};
    Scalar x{55};

    void validate() const {
        if (!(Q >= Scalar(0) && Q <= Scalar(1))) throw std::invalid_argument("contract: Q must lie in [0, 1]");
        if (!(tau >= Scalar(0))) throw std::invalid_argument("contract: tau must be non-negative");
    }

    Scalar retirement_age() const { return x + tau; }
};

/// Survival probability below which the annuity integrand is truncated.
inline constexpr double kSurvivalCutoff = 1e-12;

/// Immediate pension annuity factor: integral of e^{-rs} survival(x, s) ds.
template <typename Scalar>
Scalar immediate_annuity_factor(const MortalityModel<Scalar>& model, const MarketModel<Scalar>& market,
                                const Scalar& x) {
    using std::exp;
    using std::log;
    Scalar horizon = survival_quantile(model, x, Scalar(kSurvivalCutoff));
    if (market.r > Scalar(0)) horizon = std::min(horizon, -log(Scalar(kSurvivalCutoff)) / market.r);
    if (!std::isfinite(static_cast<double>(horizon)))
        throw std::domain_error("immediate_annuity_factor: integrand does not decay");
    auto integrand = [&](Scalar s) { return exp(-market.r * s) * survival(model, x, s); };
    // unit panels keep the adaptive rule local to the decay scale
    const int panels = std::max(1, static_cast<int>(std::ceil(static_cast<double>(horizon))));
    const Scalar width = horizon / Scalar(panels);
    Scalar total{0};
    for (int i = 0; i < panels; ++i)
        total += adaptive_simpson<Scalar>(integrand, width * Scalar(i), width * Scalar(i + 1), Scalar(1e-13));
    return total;
}

/// Prices a DIA contract over its deferral period. The retirement-age
/// annuity factor is computed once at construction.
template <typename Scalar>
class DIAPricer {
public:
    DIAPricer(const DIAContract<Scalar>& contract, const MortalityModel<Scalar>& model,
              const MarketModel<Scalar>& market)
        : contract_(contract),
          model_(model),
          market_(market),
          annuity_at_retirement_(immediate_annuity_factor(model, market, contract.retirement_age())) {
        contract_.validate();
    }

    const DIAContract<Scalar>& contract() const { return contract_; }
    Scalar annuity_at_retirement() const { return annuity_at_retirement_; }

    /// Price per $1/year of income bought t years after the start age.
    Scalar price(const Scalar& t) const {
        using std::exp;
        check(t);
        const Scalar remaining = std::max(Scalar(0), contract_.tau - t);
        const Scalar p = survival(model_, contract_.x + t, remaining);
        return annuity_at_retirement_ * exp(-market_.r * remaining) *
               (p * (Scalar(1) - contract_.Q) + contract_.Q);
    }

    /// Estate refund per unit of DIA income on death at time t.
    Scalar refund(const Scalar& t) const {
        using std::exp;
        check(t);
        return annuity_at_retirement_ * exp(-market_.r * std::max(Scalar(0), contract_.tau - t)) * contract_.Q;
    }

private:
    void check(const Scalar& t) const {
        // small slack absorbs round-off from accumulated time steps
        const Scalar slack = Scalar(1e-9) * (Scalar(1) + contract_.tau);
        if (!(t >= -slack && t <= contract_.tau + slack))
            throw std::domain_error("DIA: time outside the deferral period [0, tau]");
    }

    DIAContract<Scalar> contract_;
    MortalityModel<Scalar> model_;
    MarketModel<Scalar> market_;
    Scalar annuity_at_retirement_;
};

template <typename Scalar>
Scalar dia_factor(const DIAContract<Scalar>& contract, const MortalityModel<Scalar>& model,
                  const MarketModel<Scalar>& market, const Scalar& t) {
    return DIAPricer<Scalar>(contract, model, market).price(t);
}

template <typename Scalar>
Scalar refund_per_unit(const DIAContract<Scalar>& contract, const MortalityModel<Scalar>& model,
                       const MarketModel<Scalar>& market, const Scalar& t) {
    return DIAPricer<Scalar>(contract, model, market).refund(t);
}

}  // namespace dia
