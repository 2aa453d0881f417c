#include "dia/stencil.hpp"

#include "dia/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dia {

OperatorCoeffs positive_coefficients(double diffusion, double drift, double h_minus, double h_plus) {
    // smallest extra diffusion that keeps both central coefficients non-negative
    const double extra = std::max({0.0, drift * h_plus / 2 - diffusion, -drift * h_minus / 2 - diffusion});
    const double d = diffusion + extra;
    const double span = h_minus + h_plus;
    // clamp the round-off left on the coefficient the extra diffusion zeroes
    return {std::max(0.0, (2 * d - drift * h_plus) / (h_minus * span)),
            std::max(0.0, (2 * d + drift * h_minus) / (h_plus * span)), extra == 0};
}

double first_derivative(const Eigen::Ref<const Eigen::VectorXd>& v, const Eigen::VectorXd& w, Eigen::Index k) {
    const Eigen::Index n = w.size();
    if (k == 0) return (v(1) - v(0)) / (w(1) - w(0));
    if (k == n - 1) return (v(n - 1) - v(n - 2)) / (w(n - 1) - w(n - 2));
    const double hm = w(k) - w(k - 1);
    const double hp = w(k + 1) - w(k);
    return (hm * hm * v(k + 1) - hp * hp * v(k - 1) + (hp * hp - hm * hm) * v(k)) / (hm * hp * (hm + hp));
}

double second_derivative(const Eigen::Ref<const Eigen::VectorXd>& v, const Eigen::VectorXd& w, Eigen::Index k) {
    const Eigen::Index n = w.size();
    k = std::clamp<Eigen::Index>(k, 1, n - 2);
    const double hm = w(k) - w(k - 1);
    const double hp = w(k + 1) - w(k);
    return 2 * ((v(k + 1) - v(k)) / hp - (v(k) - v(k - 1)) / hm) / (hm + hp);
}

double upwind_consumption(const Eigen::Ref<const Eigen::VectorXd>& v, const Eigen::VectorXd& w, Eigen::Index k,
                          double diffusion, double drift_before_consumption, const Preferences<double>& pref) {
    if (k <= 0 || k + 1 >= w.size()) throw std::invalid_argument("upwind_consumption: interior nodes only");
    const double hm = w(k) - w(k - 1);
    const double hp = w(k + 1) - w(k);
    auto consume = [&](double jw) {
        if (!(jw > 0)) throw NumericalError("non-increasing value function at w = " + std::to_string(w(k)));
        return inverse_marginal_utility(pref, jw);
    };
    const double central = consume(first_derivative(v, w, k));
    if (positive_coefficients(diffusion, drift_before_consumption - central, hm, hp).central) return central;
    const double forward = consume((v(k + 1) - v(k)) / hp);
    if (drift_before_consumption - forward > 0) return forward;
    const double backward = consume((v(k) - v(k - 1)) / hm);
    if (drift_before_consumption - backward < 0) return backward;
    return drift_before_consumption > 0 ? drift_before_consumption : backward;
}

double optimal_alpha(double jw, double jww, double w, const MarketModel<double>& market) {
    if (!(jww < 0) || !(w > 0)) return 1.0;
    const double alpha = -(jw / jww) * (market.mu - market.r) / (w * market.sigma * market.sigma);
    if (!std::isfinite(alpha)) return 1.0;
    return std::clamp(alpha, 0.0, 1.0);
}

Eigen::Vector4d cubic_weights(double x, double x0, double h) {
    const double s = (x - x0) / h;
    return {-(s - 1) * (s - 2) * (s - 3) / 6, s * (s - 2) * (s - 3) / 2, -s * (s - 1) * (s - 3) / 2,
            s * (s - 1) * (s - 2) / 6};
}

}  // namespace dia
