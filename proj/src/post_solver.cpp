#include "dia/post_solver.hpp"

#include "dia/errors.hpp"
#include "dia/interpolation.hpp"
#include "dia/stencil.hpp"
#include "dia/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dia {

namespace {

/// c* at one node, read from the same derivative the stencil uses.
double node_consumption(const ModelParams& params, const Grid2D& grid, const Eigen::Ref<const Eigen::VectorXd>& col,
                        Eigen::Index k, double income, double alpha) {
    const auto& market = params.market;
    const Eigen::Index nw = grid.nw();
    if (k == 0 || k + 1 == nw) {
        const double jw = first_derivative(col, grid.w, k);
        if (!(jw > 0))
            throw NumericalError("post solver: non-increasing value function at w = " + std::to_string(grid.w(k)));
        const double c = inverse_marginal_utility(params.preferences, jw);
        // no borrowing at zero wealth
        return k == 0 ? std::min(c, income + market.pi) : c;
    }
    const double w = grid.w(k);
    const double vol = market.volatility(alpha) * w;
    return upwind_consumption(col, grid.w, k, 0.5 * vol * vol, market.drift(alpha) * w + income + market.pi,
                              params.preferences);
}

}  // namespace

std::size_t ValueSurface::nearest_slice(double age) const {
    const double lo = age_of(0);
    const double hi = age_of(steps.size() - 1);
    const double tol = 1e-9;
    if (age < lo - tol || age > hi + tol) throw std::out_of_range("value surface: age outside the solved span");
    std::size_t best = 0;
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (std::abs(age_of(i) - age) < std::abs(age_of(best) - age)) best = i;
    return best;
}

void controls_from_values(const ModelParams& params, const Grid2D& grid, AllocationMode mode,
                          const Eigen::MatrixXd& values, Eigen::MatrixXd& consumption, Eigen::MatrixXd& alpha) {
    const Eigen::Index nw = grid.nw();
    const Eigen::Index nI = grid.nI();
    consumption.resize(nw, nI);
    if (mode == AllocationMode::Dynamic) alpha.resize(nw, nI);
    const double merton = std::clamp(merton_fraction(params.market, params.preferences), 0.0, 1.0);
    for (Eigen::Index q = 0; q < nI; ++q) {
        const auto col = values.col(q);
        for (Eigen::Index k = 0; k < nw; ++k) {
            const double jw = first_derivative(col, grid.w, k);
            if (!(jw > 0))
                throw NumericalError("post solver: non-increasing value function at w = " + std::to_string(grid.w(k)));
            double a = 1.0;
            if (mode == AllocationMode::Dynamic)
                a = (k + 2 >= nw) ? merton
                                  : optimal_alpha(jw, second_derivative(col, grid.w, k), grid.w(k), params.market);
            if (mode == AllocationMode::Dynamic) alpha(k, q) = a;
            consumption(k, q) = node_consumption(params, grid, col, k, grid.I(q), a);
        }
    }
}

void check_value_shape(const Grid2D& grid, const Eigen::MatrixXd& J, double tolerance, const char* where) {
    const Eigen::Index nw = grid.nw();
    const Eigen::Index nI = grid.nI();
    for (Eigen::Index q = 0; q < nI; ++q) {
        for (Eigen::Index k = 0; k + 1 < nw; ++k) {
            if (!(J(k + 1, q) > J(k, q)))
                throw NumericalError(std::string(where) + ": value not increasing in w at w = " +
                                     std::to_string(grid.w(k)) + ", I = " + std::to_string(grid.I(q)));
            // the cell next to the pinned row straddles the boundary closure
            if (k > 0 && k + 2 < nw) {
                const double up = (J(k + 1, q) - J(k, q)) / (grid.w(k + 1) - grid.w(k));
                const double down = (J(k, q) - J(k - 1, q)) / (grid.w(k) - grid.w(k - 1));
                if (up - down > tolerance * (std::abs(up) + std::abs(down)))
                    throw NumericalError(std::string(where) + ": value not concave in w at w = " +
                                         std::to_string(grid.w(k)) + ", I = " + std::to_string(grid.I(q)));
            }
        }
    }
    for (Eigen::Index q = 0; q + 1 < nI; ++q)
        for (Eigen::Index k = 0; k < nw; ++k)
            if (!(J(k, q + 1) > J(k, q)))
                throw NumericalError(std::string(where) + ": value not increasing in I at w = " +
                                     std::to_string(grid.w(k)) + ", I = " + std::to_string(grid.I(q)));
}

ValueSurface solve_post(const ModelParams& params, const Grid2D& grid, const PostSolverOptions& options) {
    params.validate();
    if (options.store_stride <= 0) throw std::invalid_argument("post solver: store stride must be positive");

    const auto& market = params.market;
    const auto& pref = params.preferences;
    const Eigen::Index nw = grid.nw();
    const Eigen::Index nI = grid.nI();
    const bool dynamic = options.mode == AllocationMode::Dynamic;

    ValueSurface surface;
    surface.grid = grid;
    surface.axis = build_time_axis(0.0, params.terminal_age - params.retirement_age(), options.steps_per_year);
    surface.origin_age = params.retirement_age();
    surface.mode = options.mode;
    const double boundary_alpha = dynamic ? std::clamp(merton_fraction(market, pref), 0.0, 1.0) : 1.0;
    surface.asymptotic = integrate_hk(params, surface.axis, grid.w_max(), boundary_alpha);

    const TimeAxis& axis = surface.axis;
    const double dt = axis.dt();
    const int N = axis.steps;

    // bequest utility U(w + pi) is time-independent
    Eigen::VectorXd bequest(nw);
    for (Eigen::Index k = 0; k < nw; ++k) bequest(k) = utility(pref, grid.w(k) + market.pi);

    Eigen::MatrixXd J(nw, nI);
    for (Eigen::Index q = 0; q < nI; ++q) J.col(q) = bequest;

    std::vector<std::pair<int, Eigen::MatrixXd>> kept;
    auto keep = [&](int n) {
        if (n == 0 || n == N || n % options.store_stride == 0) kept.emplace_back(n, J);
    };
    keep(N);

    TridiagonalSystem<double> sys(nw);
    Eigen::VectorXd scratch(nw);
    Eigen::VectorXd x(nw);
    Eigen::MatrixXd next(nw, nI);

    for (int n = N - 1; n >= 0; --n) {
        const double lam = hazard(params.mortality, params.retirement_age() + axis.at(n));
        const double base = 1.0 / dt + market.rho + lam;
        for (Eigen::Index q = 0; q < nI; ++q) {
            const auto col = J.col(q);
            const double income = grid.I(q);
            for (Eigen::Index k = 0; k + 1 < nw; ++k) {
                const double jw = first_derivative(col, grid.w, k);
                if (!(jw > 0))
                    throw NumericalError("post solver: non-increasing value function at w = " +
                                         std::to_string(grid.w(k)) + ", age " +
                                         std::to_string(params.retirement_age() + axis.at(n + 1)));
                double a = 1.0;
                if (dynamic)
                    a = k + 2 == nw ? boundary_alpha
                                    : optimal_alpha(jw, second_derivative(col, grid.w, k), grid.w(k), market);
                const double c = node_consumption(params, grid, col, k, income, a);
                const double w = grid.w(k);
                const double drift = market.drift(a) * w + income + market.pi - c;
                const double rhs = col(k) / dt + lam * bequest(k) + utility(pref, c);
                if (k == 0) {
                    const double upper = std::max(drift, 0.0) / (grid.w(1) - grid.w(0));
                    sys.sub(0) = 0;
                    sys.diag(0) = base + upper;
                    sys.super(0) = -upper;
                } else {
                    const double vol = market.volatility(a) * w;
                    const OperatorCoeffs co =
                        positive_coefficients(0.5 * vol * vol, drift, w - grid.w(k - 1), grid.w(k + 1) - w);
                    sys.sub(k) = -co.lower;
                    sys.diag(k) = base + co.lower + co.upper;
                    sys.super(k) = -co.upper;
                }
                sys.rhs(k) = rhs;
            }
            sys.sub(nw - 1) = 0;
            sys.diag(nw - 1) = 1;
            sys.super(nw - 1) = 0;
            sys.rhs(nw - 1) = surface.asymptotic.value(n, grid.w_max(), income);
            thomas_solve_into<double>(sys.sub, sys.diag, sys.super, sys.rhs, x, scratch);
            next.col(q) = x;
        }
        J.swap(next);
        if (!J.allFinite()) throw NumericalError("post solver: non-finite values");
        if (options.check_invariants) check_value_shape(grid, J, options.concavity_tolerance, "post solver");
        keep(n);
    }

    std::reverse(kept.begin(), kept.end());
    for (auto& [n, values] : kept) {
        surface.steps.push_back(n);
        Eigen::MatrixXd c, a;
        controls_from_values(params, grid, options.mode, values, c, a);
        surface.values.push_back(std::move(values));
        surface.consumption.push_back(std::move(c));
        if (dynamic) surface.alpha.push_back(std::move(a));
    }
    return surface;
}

double consumption_policy(const ValueSurface& surface, double age, double w, double income) {
    return bilinear(surface.grid, surface.consumption[surface.nearest_slice(age)], w, income);
}

double value_at(const ValueSurface& surface, double age, double w, double income) {
    return bilinear(surface.grid, surface.values[surface.nearest_slice(age)], w, income);
}

double alpha_policy(const ValueSurface& surface, double age, double w, double income) {
    if (surface.mode == AllocationMode::Fixed) return 1.0;
    return bilinear(surface.grid, surface.alpha[surface.nearest_slice(age)], w, income);
}

}  // namespace dia
