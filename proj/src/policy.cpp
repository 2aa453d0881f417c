#include "dia/policy.hpp"

#include "dia/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dia {

std::optional<double> PolicyFrontier::boundary_at(double income) const {
    const Eigen::Index n = I.size();
    const double eps = 1e-12;
    if (!(income >= I(0) - eps && income <= I(n - 1) + eps))
        throw std::out_of_range("frontier: income outside the grid");
    Eigen::Index q = 0;
    while (q + 2 < n && income > I(q + 1)) ++q;
    const double f = std::clamp((income - I(q)) / (I(q + 1) - I(q)), 0.0, 1.0);
    if (f == 0.0) return present(q) ? std::optional<double>(w_star(q)) : std::nullopt;
    if (f == 1.0) return present(q + 1) ? std::optional<double>(w_star(q + 1)) : std::nullopt;
    if (!present(q) || !present(q + 1)) return std::nullopt;
    return (1 - f) * w_star(q) + f * w_star(q + 1);
}

PolicyFrontier extract_frontier(const PreSolveSlice& slice, const Grid2D& grid) {
    const Eigen::Index nw = grid.nw();
    const Eigen::Index nI = grid.nI();
    if (slice.j1.rows() != nw || slice.j1.cols() != nI)
        throw std::invalid_argument("extract_frontier: slice does not match grid");
    PolicyFrontier f;
    f.age = slice.age;
    f.a_tilde = slice.a_tilde;
    f.I = grid.I;
    f.w_star.setConstant(nI, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index q = 0; q < nI; ++q) {
        for (Eigen::Index k = 0; k < nw; ++k) {
            if (!slice.annuitize(k, q)) continue;
            const double d1 = slice.j2(k, q) - slice.j1(k, q);
            const double d0 = k > 0 ? slice.j2(k - 1, q) - slice.j1(k - 1, q) : -1.0;
            if (k > 0 && std::isfinite(d0) && d0 < 0 && d1 > d0)
                f.w_star(q) = grid.w(k - 1) + (grid.w(k) - grid.w(k - 1)) * (-d0) / (d1 - d0);
            else
                f.w_star(q) = grid.w(k);
            break;
        }
    }
    return f;
}

PolicyFrontier extract_frontier(const PreSolution& solution, double age) {
    return extract_frontier(solution.nearest(age), solution.grid);
}

Recommendation recommend(const PolicyFrontier& frontier, double w, double income) {
    if (!(w >= 0) || !(income >= 0)) throw std::invalid_argument("recommend: wealth and income must be non-negative");
    const double a = frontier.a_tilde;
    if (!(a > 0)) throw std::invalid_argument("recommend: frontier has no positive price");
    Recommendation rec{0.0, w, income, a, false};

    const auto start = frontier.boundary_at(income);
    if (!start || w <= *start) return rec;
    rec.annuitize = true;

    // walk the purchase line (income + s, w - a s) across the income cells
    const Eigen::Index n = frontier.I.size();
    double s_star = std::numeric_limits<double>::quiet_NaN();
    Eigen::Index q = 0;
    while (q + 2 < n && income >= frontier.I(q + 1)) ++q;
    double lo = income;
    for (; q + 1 < n; ++q) {
        const double hi = frontier.I(q + 1);
        const auto b_lo = frontier.boundary_at(lo);
        const auto b_hi = frontier.boundary_at(hi);
        if (!b_lo) {
            s_star = lo - income;
            break;
        }
        if (!b_hi) {
            // the boundary ends inside this cell: stop at its last defined point
            s_star = lo - income;
            break;
        }
        // g(s) = w - a s - boundary(income + s) is linear on the cell
        const double g_lo = w - a * (lo - income) - *b_lo;
        const double g_hi = w - a * (hi - income) - *b_hi;
        if (g_hi <= 0) {
            s_star = (lo - income) + (hi - lo) * g_lo / (g_lo - g_hi);
            break;
        }
        lo = hi;
    }
    if (std::isnan(s_star)) s_star = frontier.I(n - 1) - income;

    rec.delta_I = std::max(0.0, s_star);
    rec.I_after = income + rec.delta_I;
    rec.w_after = w - a * rec.delta_I;
    if (rec.w_after < -1e-9 * std::max(1.0, w))
        throw NumericalError("recommend: purchase line leaves positive wealth before reaching the frontier");
    rec.w_after = std::max(rec.w_after, 0.0);
    return rec;
}

}  // namespace dia
