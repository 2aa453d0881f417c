#include "dia/annuity.hpp"
#include "dia/errors.hpp"
#include "dia/policy.hpp"
#include "dia/pre_solver.hpp"

#include <doctest.h>

#include <limits>

using namespace dia;

namespace {

constexpr double kGamma = 3;

double from_ce(double f) { return std::pow(f, 1 - kGamma) / (1 - kGamma); }

// field whose certainty equivalent is affine: w + slope I + 1
Eigen::MatrixXd affine_field(const Grid2D& g, double slope) {
    Eigen::MatrixXd j(g.nw(), g.nI());
    for (Eigen::Index k = 0; k < g.nw(); ++k)
        for (Eigen::Index q = 0; q < g.nI(); ++q) j(k, q) = from_ce(g.w(k) + slope * g.I(q) + 1);
    return j;
}

Grid2D small_grid(double tail) {
    GridConfig c;
    c.w_max = 10;
    c.w_nodes = 101;
    c.w_tail_max = tail;
    c.I_max = 3;
    c.I_nodes = 31;
    return build_grid(c);
}

struct Baseline {
    Grid2D grid = build_grid({});
    ValueSurface post;
    PreSolution pre;
    Baseline() {
        post = solve_post(ModelParams{}, grid);
        PreSolverOptions o;
        o.store_stride = 1;
        pre = solve_pre(ModelParams{}, grid, post, o);
    }
};

const Baseline& baseline() {
    static const Baseline b;
    return b;
}

int core_count(const PreSolveSlice& s, const Grid2D& g) {
    int n = 0;
    for (Eigen::Index k = 0; k < g.core_size; ++k)
        for (Eigen::Index q = 0; q < g.nI(); ++q) n += s.annuitize(k, q);
    return n;
}

}  // namespace

TEST_CASE("purchase sweep on synthetic fields") {
    for (double tail : {0.0, 400.0}) {
        const Grid2D g = small_grid(tail);
        const double a = 12.5;
        Eigen::MatrixXd j2, value;

        SUBCASE("fairly priced income is a level curve") {
            const Eigen::MatrixXd j1 = affine_field(g, a);
            purchase_sweep(g, j1, a, kGamma, j2, value);
            for (Eigen::Index k = 1; k < g.nw(); ++k)
                for (Eigen::Index q = 0; q + 1 < g.nI(); ++q)
                    CHECK(std::abs(j2(k, q) - j1(k, q)) <= 1e-10 * std::abs(j1(k, q)));
        }
        SUBCASE("overpriced income is never bought") {
            const Eigen::MatrixXd j1 = affine_field(g, 0.8 * a);
            purchase_sweep(g, j1, a, kGamma, j2, value);
            CHECK((j2.array() < j1.array()).all());
            CHECK(value == j1);
        }
        SUBCASE("underpriced income is bought wherever possible") {
            const Eigen::MatrixXd j1 = affine_field(g, 1.2 * a);
            purchase_sweep(g, j1, a, kGamma, j2, value);
            for (Eigen::Index k = 1; k < g.nw(); ++k)
                for (Eigen::Index q = 0; q + 1 < g.nI(); ++q) CHECK(j2(k, q) > j1(k, q));
            CHECK((value.array() >= j1.array()).all());
        }
        SUBCASE("no purchase at zero wealth or at the income cap") {
            const Eigen::MatrixXd j1 = affine_field(g, 1.2 * a);
            purchase_sweep(g, j1, a, kGamma, j2, value);
            for (Eigen::Index q = 0; q < g.nI(); ++q) CHECK(j2(0, q) == -std::numeric_limits<double>::infinity());
            for (Eigen::Index k = 0; k < g.nw(); ++k)
                CHECK(j2(k, g.nI() - 1) == -std::numeric_limits<double>::infinity());
        }
        SUBCASE("idempotent") {
            const Eigen::MatrixXd j1 = affine_field(g, 1.1 * a);
            purchase_sweep(g, j1, a, kGamma, j2, value);
            Eigen::MatrixXd j2b, again;
            purchase_sweep(g, value, a, kGamma, j2b, again);
            CHECK((again - value).cwiseAbs().maxCoeff() == 0);
        }
    }
    const Grid2D g = small_grid(0);
    Eigen::MatrixXd j2, value;
    CHECK_THROWS_AS(purchase_sweep(g, affine_field(g, 1), 0.0, kGamma, j2, value), std::invalid_argument);
    CHECK_THROWS_AS(purchase_sweep(g, affine_field(g, 1), 1.0, 1.0, j2, value), std::invalid_argument);
    CHECK_THROWS_AS(purchase_sweep(g, Eigen::MatrixXd::Ones(3, 3), 1.0, kGamma, j2, value), std::invalid_argument);
}

TEST_CASE("baseline pre-retirement solution") {
    const Baseline& b = baseline();
    const Grid2D& g = b.grid;
    const ModelParams p;
    const DIAPricer<double> pricer(p.contract, p.mortality, p.market);
    REQUIRE(b.pre.slices.size() == 241);
    CHECK(b.pre.slices.front().age == doctest::Approx(55));
    CHECK(b.pre.slices.back().age == doctest::Approx(65));
    CHECK(b.pre.substeps > 1);

    SUBCASE("retirement slice continues with the seed") {
        CHECK(b.pre.slices.back().j1 == b.post.retirement_values());
    }
    SUBCASE("slice invariants") {
        for (std::size_t i = 0; i < b.pre.slices.size(); i += 12) {
            const PreSolveSlice& s = b.pre.slices[i];
            CHECK(s.a_tilde == doctest::Approx(pricer.price(s.age - 55)).epsilon(1e-12));
            CHECK(s.refund == doctest::Approx(pricer.refund(s.age - 55)).epsilon(1e-12));
            const Eigen::MatrixXd v = s.value();
            CHECK((s.annuitize == (s.j2.array() >= s.j1.array())).all());
            CHECK((v.array() == s.j1.array().max(s.j2.array())).all());
            CHECK(v.allFinite());
            CHECK(s.alpha.size() == 0);
            for (Eigen::Index q = 0; q < g.nI(); ++q) CHECK_FALSE(s.annuitize(0, q));
            for (Eigen::Index k = 0; k + 1 < g.nw(); ++k)
                for (Eigen::Index q = 0; q < g.nI(); q += 6) CHECK(v(k + 1, q) > v(k, q));
            for (Eigen::Index k = 0; k < g.nw(); k += 25)
                for (Eigen::Index q = 0; q + 1 < g.nI(); ++q) CHECK(v(k, q + 1) > v(k, q));
        }
    }
    SUBCASE("region is upward-closed in w on the plotted range") {
        for (const PreSolveSlice& s : b.pre.slices)
            for (Eigen::Index q = 0; q < g.nI(); ++q)
                for (Eigen::Index k = 0; k + 1 < g.core_size; ++k)
                    if (s.annuitize(k, q)) CHECK(s.annuitize(k + 1, q));
    }
    SUBCASE("age nesting 63 within 65") {
        const PreSolveSlice& a = b.pre.at_age(63);
        const PreSolveSlice& c = b.pre.at_age(65);
        for (Eigen::Index k = 0; k < g.core_size; ++k)
            for (Eigen::Index q = 0; q < g.nI(); ++q)
                if (a.annuitize(k, q)) CHECK(c.annuitize(k, q));
    }
    SUBCASE("abrupt enlargement at retirement") {
        const auto n = b.pre.slices.size();
        const int last = core_count(b.pre.slices[n - 1], g);
        const int prior = core_count(b.pre.slices[n - 2], g);
        CHECK(last > 1.2 * prior);
    }
    SUBCASE("smooth pasting on the boundary") {
        for (double age : {62.0, 63.0, 64.0, 65.0}) {
            const PreSolveSlice& s = b.pre.at_age(age);
            const Eigen::MatrixXd v = s.value();
            int checked = 0;
            for (Eigen::Index q = 0; q + 1 < g.nI(); ++q) {
                Eigen::Index k = 1;
                while (k + 1 < g.core_size && !s.annuitize(k, q)) ++k;
                if (!s.annuitize(k, q) || k + 1 >= g.core_size) continue;
                const double jw = (v(k + 1, q) - v(k - 1, q)) / (g.w(k + 1) - g.w(k - 1));
                // second-order one-sided at the I = 0 edge
                const double ji = q > 0 ? (v(k, q + 1) - v(k, q - 1)) / (2 * g.dI)
                                        : (-3 * v(k, 0) + 4 * v(k, 1) - v(k, 2)) / (2 * g.dI);
                CHECK(std::abs(ji - s.a_tilde * jw) / (std::abs(ji) + std::abs(s.a_tilde * jw)) < 0.02);
                ++checked;
            }
            CHECK(checked > 0);
        }
    }
    SUBCASE("indicator") {
        const PreSolveSlice& s = b.pre.at_age(65);
        CHECK_FALSE(annuitization_indicator(s, g, 0.0, 1.0));
        CHECK_FALSE(annuitization_indicator(s, g, 0.5, 5.5));  // low wealth, high income
        const PolicyFrontier f = extract_frontier(s, g);
        CHECK(annuitization_indicator(s, g, f.w_star(10) + 0.2, f.I(10)));
        CHECK_THROWS_AS(annuitization_indicator(s, g, -1.0, 0.0), std::out_of_range);
    }
}

TEST_CASE("pre solver input validation") {
    const Baseline& b = baseline();
    const Grid2D other = small_grid(0);
    CHECK_THROWS_AS(solve_pre(ModelParams{}, other, b.post), std::invalid_argument);
    ModelParams shifted;
    shifted.contract.tau = 9;
    CHECK_THROWS_AS(solve_pre(shifted, b.grid, b.post), std::invalid_argument);
    PreSolverOptions o;
    o.cfl_safety = 1.5;
    CHECK_THROWS_AS(solve_pre(ModelParams{}, b.grid, b.post, o), std::invalid_argument);
    CHECK_THROWS_AS(b.pre.at_age(60.01), std::out_of_range);
    CHECK_THROWS_AS(b.pre.nearest(66), std::out_of_range);
}
