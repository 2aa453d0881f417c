#include "dia/pre_solver.hpp"

#include "dia/annuity.hpp"
#include "dia/errors.hpp"
#include "dia/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dia {

namespace {

constexpr double kNoPurchase = -std::numeric_limits<double>::infinity();

bool same_grid(const Grid2D& a, const Grid2D& b) {
    return a.w.size() == b.w.size() && a.I.size() == b.I.size() && a.w == b.w && a.I == b.I;
}

BoolMatrix flags_of(const Eigen::MatrixXd& j1, const Eigen::MatrixXd& j2) {
    return j2.array() >= j1.array();
}

Eigen::MatrixXd alpha_field(const Grid2D& grid, const Eigen::MatrixXd& J, const MarketModel<double>& market,
                            double boundary_alpha) {
    Eigen::MatrixXd alpha(grid.nw(), grid.nI());
    for (Eigen::Index q = 0; q < grid.nI(); ++q) {
        const auto col = J.col(q);
        for (Eigen::Index k = 0; k < grid.nw(); ++k) {
            if (k + 1 == grid.nw()) {
                alpha(k, q) = boundary_alpha;
                continue;
            }
            alpha(k, q) = optimal_alpha(first_derivative(col, grid.w, k), second_derivative(col, grid.w, k),
                                        grid.w(k), market);
        }
    }
    return alpha;
}

// Start of the four-node income stencil for a point in [I_q, I_{q+1}]:
// of the centred and the forward stencil, the one with the smaller third
// difference, so that it does not straddle the kink at the purchase boundary.
Eigen::Index smoother_stencil(const Eigen::Ref<const Eigen::RowVectorXd>& f, Eigen::Index q, Eigen::Index n) {
    auto third = [&](Eigen::Index s) { return std::abs(f(s + 3) - 3 * f(s + 2) + 3 * f(s + 1) - f(s)); };
    const Eigen::Index centred = std::clamp<Eigen::Index>(q - 1, 0, n - 4);
    const Eigen::Index forward = std::clamp<Eigen::Index>(q, 0, n - 4);
    return third(forward) < third(centred) ? forward : centred;
}

}  // namespace

std::size_t PreSolution::nearest_index(double age) const {
    const double tol = 1e-9;
    if (slices.empty() || age < slices.front().age - tol || age > slices.back().age + tol)
        throw std::out_of_range("pre-retirement solution: age outside the solved span");
    std::size_t best = 0;
    for (std::size_t i = 1; i < slices.size(); ++i)
        if (std::abs(slices[i].age - age) < std::abs(slices[best].age - age)) best = i;
    return best;
}

const PreSolveSlice& PreSolution::at_age(double age) const {
    const PreSolveSlice& s = nearest(age);
    if (std::abs(s.age - age) > 1e-9)
        throw std::out_of_range("pre-retirement solution: no stored slice at age " + std::to_string(age));
    return s;
}

void purchase_sweep(const Grid2D& grid, const Eigen::MatrixXd& j1, double a_tilde, double gamma, Eigen::MatrixXd& j2,
                    Eigen::MatrixXd& value) {
    if (!(a_tilde > 0)) throw std::invalid_argument("purchase_sweep: price must be positive");
    if (!(gamma > 0) || gamma == 1.0) throw std::invalid_argument("purchase_sweep: gamma must be positive and not 1");
    const Eigen::Index nw = grid.nw();
    const Eigen::Index nI = grid.nI();
    if (j1.rows() != nw || j1.cols() != nI) throw std::invalid_argument("purchase_sweep: field does not match grid");
    const double dI = grid.dI;

    // certainty equivalents are close to affine in (w, I), so interpolating
    // them instead of J keeps the coarse income axis from biasing the comparison
    auto to_ce = [gamma](double j) { return std::pow((1 - gamma) * j, 1 / (1 - gamma)); };
    auto from_ce = [gamma](double f) { return std::pow(f, 1 - gamma) / (1 - gamma); };

    j2.setConstant(nw, nI, kNoPurchase);
    value = j1;
    Eigen::MatrixXd ce(nw, nI);
    for (Eigen::Index q = 0; q < nI; ++q) ce(0, q) = to_ce(value(0, q));
    for (Eigen::Index k = 1; k < nw; ++k) {
        const double cell = grid.w(k) - grid.w(k - 1);
        const double units = cell / a_tilde;
        if (units <= dI) {
            for (Eigen::Index q = 0; q + 1 < nI; ++q) {
                const Eigen::Index start = smoother_stencil(ce.row(k - 1), q, nI);
                const Eigen::Vector4d wt = cubic_weights(grid.I(q) + units, grid.I(start), dI);
                const double cand = from_ce(wt.dot(ce.row(k - 1).segment<4>(start).transpose()));
                j2(k, q) = cand;
                value(k, q) = std::max(j1(k, q), cand);
            }
        } else {
            const double x = grid.w(k) - a_tilde * dI;
            const Eigen::Index j = grid.locate_w(x);
            const double f = std::clamp((x - grid.w(j)) / (grid.w(j + 1) - grid.w(j)), 0.0, 1.0);
            for (Eigen::Index q = nI - 2; q >= 0; --q) {
                // row k itself is still being written, so read it directly
                const double upper = j + 1 == k ? to_ce(value(k, q + 1)) : ce(j + 1, q + 1);
                const double cand = from_ce((1 - f) * ce(j, q + 1) + f * upper);
                j2(k, q) = cand;
                value(k, q) = std::max(j1(k, q), cand);
            }
        }
        for (Eigen::Index q = 0; q < nI; ++q) ce(k, q) = to_ce(value(k, q));
    }
    if (!value.allFinite()) throw NumericalError("purchase_sweep: non-finite values");
}

PreSolution solve_pre(const ModelParams& params, const Grid2D& grid, const ValueSurface& seed,
                      const PreSolverOptions& options) {
    params.validate();
    if (options.store_stride <= 0) throw std::invalid_argument("pre solver: store stride must be positive");
    if (!(options.cfl_safety > 0 && options.cfl_safety <= 1))
        throw std::invalid_argument("pre solver: CFL safety factor must lie in (0, 1]");
    if (!same_grid(seed.grid, grid)) throw std::invalid_argument("pre solver: seed surface is on a different grid");
    if (std::abs(seed.origin_age - params.retirement_age()) > 1e-9 || seed.steps.empty() || seed.steps.front() != 0)
        throw std::invalid_argument("pre solver: seed surface does not start at retirement");

    const auto& market = params.market;
    const auto& pref = params.preferences;
    const double gamma = pref.gamma;
    const Eigen::Index nw = grid.nw();
    const Eigen::Index nI = grid.nI();
    const bool dynamic = options.mode == AllocationMode::Dynamic;
    const double boundary_alpha = dynamic ? std::clamp(merton_fraction(market, pref), 0.0, 1.0) : 1.0;
    const double u_top = utility(pref, grid.w_max());

    const DIAPricer<double> pricer(params.contract, params.mortality, market);

    PreSolution out;
    out.grid = grid;
    out.axis = build_time_axis(0.0, params.contract.tau, options.steps_per_year);
    out.origin_age = params.contract.x;
    out.mode = options.mode;
    const TimeAxis& axis = out.axis;
    const int N = axis.steps;
    const double dt = axis.dt();

    auto store = [&](int n, const Eigen::MatrixXd& j1, const Eigen::MatrixXd& j2, const Eigen::MatrixXd& value) {
        if (!(n == 0 || n == N || n % options.store_stride == 0)) return;
        PreSolveSlice s;
        s.step = n;
        s.age = params.contract.x + axis.at(n);
        s.a_tilde = pricer.price(axis.at(n));
        s.refund = pricer.refund(axis.at(n));
        s.j1 = j1;
        s.j2 = j2;
        s.annuitize = flags_of(j1, j2);
        if (dynamic) s.alpha = alpha_field(grid, value, market, boundary_alpha);
        out.slices.push_back(std::move(s));
    };

    // retirement slice: continuation is the post-retirement value itself
    Eigen::MatrixXd j1 = seed.retirement_values();
    Eigen::MatrixXd j2, J;
    purchase_sweep(grid, j1, pricer.price(axis.at(N)), gamma, j2, J);
    store(N, j1, j2, J);

    // separable far-field value J = U(w_max) V(I)
    Eigen::VectorXd V = J.row(nw - 1).transpose() / u_top;
    const double mu_b = market.drift(boundary_alpha);
    const double sig_b = market.volatility(boundary_alpha);

    Eigen::MatrixXd lower(nw, nI), upper(nw, nI), source(nw, nI), next(nw, nI);
    for (int n = N - 1; n >= 0; --n) {
        const double t_hi = axis.at(n + 1);
        const double refund = pricer.refund(t_hi);

        // controls and coefficients are frozen over the macro step
        Eigen::MatrixXd alpha;
        if (dynamic) alpha = alpha_field(grid, J, market, boundary_alpha);
        double max_rate = 0;
        for (Eigen::Index q = 0; q < nI; ++q) {
            for (Eigen::Index k = 0; k < nw; ++k) {
                const double w = grid.w(k);
                source(k, q) = utility(pref, w + refund * grid.I(q) + market.nu);
                if (k == 0) {
                    lower(0, q) = 0;
                    upper(0, q) = std::max(market.nu, 0.0) / (grid.w(1) - grid.w(0));
                } else if (k + 1 == nw) {
                    lower(k, q) = upper(k, q) = 0;
                } else {
                    const double a = dynamic ? alpha(k, q) : 1.0;
                    const double vol = market.volatility(a) * w;
                    const OperatorCoeffs co = positive_coefficients(0.5 * vol * vol, market.drift(a) * w + market.nu,
                                                                    w - grid.w(k - 1), grid.w(k + 1) - w);
                    lower(k, q) = co.lower;
                    upper(k, q) = co.upper;
                }
                max_rate = std::max(max_rate, lower(k, q) + upper(k, q));
            }
        }
        // hazard increases with age, so the top of the step bounds it
        const double lam_max = hazard(params.mortality, params.contract.x + t_hi);
        max_rate += market.rho + lam_max;
        const double steps_needed = std::ceil(dt * max_rate / options.cfl_safety);
        if (!std::isfinite(steps_needed) || steps_needed > 1e7)
            throw NumericalError("pre solver: explicit step count out of range");
        const int substeps = std::max(1, static_cast<int>(steps_needed));
        const double ds = dt / substeps;
        out.substeps = substeps;

        for (int s = 0; s < substeps; ++s) {
            const double t = t_hi - s * ds;
            const double lam = hazard(params.mortality, params.contract.x + t);
            const double decay = market.rho + lam;
            if (ds * (max_rate - lam_max + lam) > options.cfl_safety * (1 + 1e-12))
                throw NumericalError("pre solver: CFL condition violated");
            for (Eigen::Index q = 0; q < nI; ++q) {
                for (Eigen::Index k = 0; k + 1 < nw; ++k) {
                    const double jk = J(k, q);
                    double flux = upper(k, q) * (J(k + 1, q) - jk);
                    if (k > 0) flux += lower(k, q) * (J(k - 1, q) - jk);
                    next(k, q) = jk + ds * (flux + lam * source(k, q) - decay * jk);
                }
            }
            const double growth = mu_b * (1 - gamma) - 0.5 * gamma * (1 - gamma) * sig_b * sig_b - decay;
            V = V + ds * (growth * V + Eigen::VectorXd::Constant(nI, lam));
            next.row(nw - 1) = u_top * V.transpose();
            J.swap(next);
        }
        if (!J.allFinite()) throw NumericalError("pre solver: non-finite values at age " +
                                                 std::to_string(params.contract.x + axis.at(n)));

        j1 = J;
        purchase_sweep(grid, j1, pricer.price(axis.at(n)), gamma, j2, J);
        V = J.row(nw - 1).transpose() / u_top;
        store(n, j1, j2, J);
    }
    std::reverse(out.slices.begin(), out.slices.end());
    return out;
}

bool annuitization_indicator(const PreSolveSlice& slice, const Grid2D& grid, double w, double income) {
    const double eps = 1e-12;
    if (!(w >= -eps && w <= grid.w_max() + eps && income >= -eps && income <= grid.I(grid.nI() - 1) + eps))
        throw std::out_of_range("annuitization_indicator: point outside the grid hull");
    Eigen::Index k = grid.locate_w(w);
    if (w - grid.w(k) > grid.w(k + 1) - w) ++k;
    Eigen::Index q = grid.locate_I(income);
    if (income - grid.I(q) > grid.I(q + 1) - income) ++q;
    return slice.annuitize(k, q);
}

}  // namespace dia
