#pragma once

#include <cmath>
#include <stdexcept>

namespace dia {

/// Gompertz-Makeham force of mortality
///   lambda(x) = lambda0 + exp((x - m) / b) / b
/// with accidental hazard lambda0, modal age m and dispersion b.
template <typename Scalar>
struct MortalityModel {
    Scalar lambda0{0};
    Scalar m{89.335};
    Scalar b{9.5};

    void validate() const {
        if (!(b > Scalar(0))) throw std::invalid_argument("mortality: dispersion b must be positive");
        if (lambda0 < Scalar(0)) throw std::invalid_argument("mortality: lambda0 must be non-negative");
    }

    template <typename Other>
    MortalityModel<Other> cast() const {
        return {Other(lambda0), Other(m), Other(b)};
    }
};

template <typename Scalar>
Scalar hazard(const MortalityModel<Scalar>& model, const Scalar& age) {
    using std::exp;
    return model.lambda0 + exp((age - model.m) / model.b) / model.b;
}

/// Probability that a life aged x survives t more years.
template <typename Scalar>
Scalar survival(const MortalityModel<Scalar>& model, const Scalar& x, const Scalar& t) {
    using std::exp;
    if (t < Scalar(0)) throw std::domain_error("survival: negative horizon");
    return exp(-model.lambda0 * t + (Scalar(1) - exp(t / model.b)) * exp((x - model.m) / model.b));
}

/// Inverse of the survival curve: the horizon t with survival(x, t) = p.
/// Closed form when lambda0 = 0, Newton on log-survival otherwise.
template <typename Scalar>
Scalar survival_quantile(const MortalityModel<Scalar>& model, const Scalar& x, const Scalar& p) {
    using std::exp;
    using std::log;
    if (!(p > Scalar(0) && p <= Scalar(1))) throw std::domain_error("survival_quantile: p outside (0, 1]");
    const Scalar target = -log(p);  // cumulative hazard to reach
    const Scalar scale = exp((x - model.m) / model.b);
    if (model.lambda0 == Scalar(0)) return model.b * log(Scalar(1) + target / scale);
    // cumulative hazard H(t) = lambda0 t + (e^{t/b} - 1) scale is convex increasing
    Scalar t = std::min(target / model.lambda0, model.b * log(Scalar(1) + target / scale));
    for (int it = 0; it < 100; ++it) {
        const Scalar e = exp(t / model.b);
        const Scalar f = model.lambda0 * t + (e - Scalar(1)) * scale - target;
        const Scalar df = model.lambda0 + e * scale / model.b;
        const Scalar step = f / df;
        t -= step;
        if (std::abs(step) <= Scalar(1e-14) * (Scalar(1) + std::abs(t))) break;
    }
    return t;
}

}  // namespace dia
