// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "dia/annuity.hpp"
#include "dia/interpolation.hpp"
#include "dia/policy.hpp"
#include "dia/pre_solver.hpp"
#include "dia/simulation.hpp"
#include "dia/tridiagonal.hpp"

#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>

using namespace dia;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass{};
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// One solved configuration: post surface plus pre solution.
struct Solved {
    Grid2D grid;
    ValueSurface post;
    PreSolution pre;
    double seconds{};
};

struct Variant {
    double mu{0.08};
    double gamma{3};
    double Q{1};
    AllocationMode pre_mode{AllocationMode::Fixed};
    bool operator<(const Variant& o) const {
        return std::tie(mu, gamma, Q, pre_mode) < std::tie(o.mu, o.gamma, o.Q, o.pre_mode);
    }
};

ModelParams params_for(const Variant& v) {
    ModelParams p;
    p.market.mu = v.mu;
    p.preferences.gamma = v.gamma;
    p.contract.Q = v.Q;
    return p;
}

// Solves are shared between criteria; post surfaces do not depend on Q or the pre mode.
class Lab {
public:
    const Grid2D& grid() const { return grid_; }

    const ValueSurface& post(double mu, double gamma, double* seconds = nullptr) {
        const auto key = std::make_pair(mu, gamma);
        auto it = posts_.find(key);
        if (it == posts_.end()) {
            const auto t0 = Clock::now();
            Variant v;
            v.mu = mu;
            v.gamma = gamma;
            auto s = std::make_unique<ValueSurface>(solve_post(params_for(v), grid_));
            post_seconds_[key] = seconds_since(t0);
            it = posts_.emplace(key, std::move(s)).first;
        }
        if (seconds) *seconds = post_seconds_[key];
        return *it->second;
    }

    const Solved& solved(const Variant& v) {
        auto it = solved_.find(v);
        if (it != solved_.end()) return *it->second;
        double post_s = 0;
        const ValueSurface& post = this->post(v.mu, v.gamma, &post_s);
        const auto t0 = Clock::now();
        PreSolverOptions o;
        o.mode = v.pre_mode;
        auto s = std::make_unique<Solved>();
        s->grid = grid_;
        s->pre = solve_pre(params_for(v), grid_, post, o);
        s->post = post;
        s->seconds = post_s + seconds_since(t0);
        return *solved_.emplace(v, std::move(s)).first->second;
    }

private:
    Grid2D grid_ = build_grid({});
    std::map<std::pair<double, double>, std::unique_ptr<ValueSurface>> posts_;
    std::map<std::pair<double, double>, double> post_seconds_;
    std::map<Variant, std::unique_ptr<Solved>> solved_;
};

struct Inclusion {
    long violations{};
    long inner{};  // flags in the smaller region
    long outer{};  // flags in the larger region
};

// node-wise inner => outer, optionally limited to w <= w_limit
Inclusion inclusion(const PreSolveSlice& inner, const PreSolveSlice& outer, const Grid2D& g, double w_limit) {
    Inclusion r;
    for (Eigen::Index k = 0; k < g.nw(); ++k) {
        if (g.w(k) > w_limit + 1e-9) break;
        for (Eigen::Index q = 0; q < g.nI(); ++q) {
            r.inner += inner.annuitize(k, q);
            r.outer += outer.annuitize(k, q);
            if (inner.annuitize(k, q) && !outer.annuitize(k, q)) ++r.violations;
        }
    }
    return r;
}

// width of the grid cell containing w
double cell_width(const Grid2D& g, double w) {
    Eigen::Index k = 1;
    while (k + 1 < g.nw() && g.w(k) < w) ++k;
    return g.w(k) - g.w(k - 1);
}

Outcome refund_ordering(Lab& lab) {
    const Solved& full = lab.solved({0.08, 3, 1.0});
    const Solved& part = lab.solved({0.08, 3, 0.7});
    // both share one post solve; count it once
    double post_s = 0;
    lab.post(0.08, 3, &post_s);
    const double runtime = full.seconds + part.seconds - post_s;
    const PolicyFrontier f1 = extract_frontier(full.pre, 62);
    const PolicyFrontier f7 = extract_frontier(part.pre, 62);
    int violations = 0, both = 0, strict = 0;
    for (Eigen::Index q = 0; q < f1.I.size(); ++q) {
        if (f1.present(q) && !f7.present(q)) ++violations;
        if (!f1.present(q) || !f7.present(q)) continue;
        ++both;
        if (f7.w_star(q) > f1.w_star(q)) ++violations;
        if (f7.w_star(q) < f1.w_star(q)) ++strict;
    }
    std::ostringstream d;
    d << "violations " << violations << ", strict " << strict << "/" << both << ", runtime " << fmt("%.1f", runtime)
      << " s";
    return {violations == 0 && both > 0 && 2 * strict >= both && runtime < 120, d.str()};
}

Outcome age_expansion(Lab& lab) {
    const Solved& s = lab.solved({0.08, 3, 1.0});
    const Inclusion a = inclusion(s.pre.at_age(62), s.pre.at_age(63), s.grid, 30);
    const Inclusion b = inclusion(s.pre.at_age(63), s.pre.at_age(65), s.grid, 30);
    std::ostringstream d;
    d << "flags 62/63/65 = " << a.inner << "/" << a.outer << "/" << b.outer << ", violations " << a.violations + b.violations;
    return {a.violations + b.violations == 0 && a.inner > 0, d.str()};
}

Outcome drift_sensitivity(Lab& lab) {
    long violations = 0, tail_violations = 0;
    std::ostringstream d;
    for (double Q : {0.7, 1.0}) {
        const Solved& lo = lab.solved({0.08, 3, Q});
        const Solved& hi = lab.solved({0.10, 3, Q});
        for (double age : {62.0, 63.0, 65.0}) {
            const Inclusion core = inclusion(hi.pre.at_age(age), lo.pre.at_age(age), lab.grid(), 30);
            const Inclusion all = inclusion(hi.pre.at_age(age), lo.pre.at_age(age), lab.grid(), 1e300);
            violations += core.violations;
            tail_violations += all.violations - core.violations;
            d << "Q" << Q << "@" << age << " " << core.inner << "<=" << core.outer << "; ";
        }
    }
    d << "violations w<=30 " << violations << ", beyond " << tail_violations;
    return {violations == 0 && tail_violations == 0, d.str()};
}

Outcome risk_aversion(Lab& lab) {
    const Solved& g3 = lab.solved({0.08, 3, 1.0});
    const Solved& g35 = lab.solved({0.08, 3.5, 1.0});
    long violations = 0;
    std::ostringstream d;
    for (double age : {55.0, 61.0}) {
        const Inclusion r = inclusion(g3.pre.at_age(age), g35.pre.at_age(age), lab.grid(), 1e300);
        violations += r.violations;
        d << "@" << age << " gamma3 " << r.inner << " <= gamma3.5 " << r.outer << "; ";
    }
    d << "violations " << violations;
    return {violations == 0, d.str()};
}

Outcome dynamic_no_early(Lab& lab) {
    const Solved& s = lab.solved({0.08, 3, 1.0, AllocationMode::Dynamic});
    const PreSolveSlice& slice = s.pre.at_age(64);
    long flags = 0;
    for (Eigen::Index k = 0; k < s.grid.core_size; ++k)
        for (Eigen::Index q = 0; q < s.grid.nI(); ++q) flags += slice.annuitize(k, q);
    return {flags == 0, "flags on w<=30 at 64: " + std::to_string(flags)};
}

Outcome retirement_agreement(Lab& lab) {
    const Solved& fixed = lab.solved({0.08, 3, 1.0});
    const Solved& dyn = lab.solved({0.08, 3, 1.0, AllocationMode::Dynamic});
    const PolicyFrontier a = extract_frontier(fixed.pre, 65);
    const PolicyFrontier b = extract_frontier(dyn.pre, 65);
    double worst = 0;
    int mismatched = 0;
    for (Eigen::Index q = 0; q < a.I.size(); ++q) {
        if (a.present(q) != b.present(q)) {
            ++mismatched;
            continue;
        }
        if (!a.present(q)) continue;
        worst = std::max(worst, std::abs(a.w_star(q) - b.w_star(q)) / cell_width(lab.grid(), a.w_star(q)));
    }
    std::ostringstream d;
    d << "max shift " << fmt("%.3g", worst) << " cells, presence mismatches " << mismatched;
    return {worst < 1 && mismatched == 0, d.str()};
}

Outcome level_curve(Lab& lab) {
    const Solved& s = lab.solved({0.08, 3, 1.0});
    const Grid2D& g = s.grid;
    struct Node {
        std::size_t slice;
        Eigen::Index k, q;
    };
    std::vector<Node> early, last;
    for (std::size_t i = 0; i < s.pre.slices.size(); ++i) {
        const auto& sl = s.pre.slices[i];
        for (Eigen::Index k = 0; k < g.core_size; ++k)
            for (Eigen::Index q = 0; q < g.nI(); ++q)
                if (sl.annuitize(k, q)) (i + 1 == s.pre.slices.size() ? last : early).push_back({i, k, q});
    }
    std::mt19937_64 rng(12345);
    std::shuffle(early.begin(), early.end(), rng);
    std::shuffle(last.begin(), last.end(), rng);
    std::vector<Node> sample(early.begin(), early.begin() + std::min<std::size_t>(50, early.size()));
    sample.insert(sample.end(), last.begin(), last.begin() + std::min<std::size_t>(100 - sample.size(), last.size()));

    double worst = 0;
    std::map<std::size_t, PolicyFrontier> frontiers;
    for (const Node& n : sample) {
        const PreSolveSlice& sl = s.pre.slices[n.slice];
        auto it = frontiers.find(n.slice);
        if (it == frontiers.end()) it = frontiers.emplace(n.slice, extract_frontier(sl, g)).first;
        const Recommendation r = recommend(it->second, g.w(n.k), g.I(n.q));
        const Eigen::MatrixXd v = sl.value();
        const double ja = v(n.k, n.q);
        const double jb = bilinear(g, v, r.w_after, r.I_after);
        worst = std::max(worst, std::abs(ja - jb) / std::abs(ja));
    }
    std::ostringstream d;
    d << sample.size() << " states (" << std::min<std::size_t>(50, early.size()) << " before 65), worst "
      << fmt("%.3g", 100 * worst) << "%";
    return {sample.size() == 100 && worst < 0.005, d.str()};
}

double boole_residual(const ModelParams& p, const AsymptoticCoeffs& c, double alpha) {
    const TimeAxis& ax = c.axis;
    const double dt = ax.dt();
    const double weights[5] = {7, 32, 12, 32, 7};
    double worst = 0;
    for (int n = 0; n + 4 <= ax.steps; ++n) {
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int j = 0; j < 5; ++j) acc += weights[j] * hk_rhs(p, alpha, ax.at(n + j), {c.h(n + j), c.k(n + j)});
        const Eigen::Vector2d lhs(c.h(n + 4) - c.h(n), c.k(n + 4) - c.k(n));
        worst = std::max(worst, (lhs - 2 * dt / 45 * acc).cwiseAbs().maxCoeff() / (4 * dt));
    }
    return worst;
}

Outcome asymptotic_consistency(Lab& lab) {
    const ValueSurface& s = lab.post(0.08, 3);
    const Grid2D& g = s.grid;
    double worst = 0;
    for (std::size_t i = 0; i < s.steps.size(); ++i)
        for (Eigen::Index k = 0; k < g.nw(); ++k) {
            if (g.w(k) < 0.9 * g.w_max()) continue;
            for (Eigen::Index q = 0; q < g.nI(); ++q) {
                const double a = s.asymptotic.value(s.steps[i], g.w(k), g.I(q));
                worst = std::max(worst, std::abs(s.values[i](k, q) - a) / std::abs(a));
            }
        }
    const ModelParams p;
    const double residual = boole_residual(p, s.asymptotic, 1.0);
    std::ostringstream d;
    d << "outer-10% error " << fmt("%.3g", 100 * worst) << "%, h/k residual " << fmt("%.3g", residual);
    return {worst < 0.01 && residual < 1e-6, d.str()};
}

Outcome monte_carlo(Lab& lab) {
    const auto t0 = Clock::now();
    const Solved& s = lab.solved({0.08, 3, 1.0});
    const ModelParams p;
    const PolicyModel model(p, s.post, &s.pre);
    struct State {
        double age, w, I;
    };
    const State states[] = {{55, 10, 0}, {60, 20, 0.5}, {62, 29.5, 0}, {64, 28, 0}, {65, 15, 1}};
    bool pass = true;
    std::ostringstream d;
    for (const State& st : states) {
        SimConfig cfg;
        cfg.paths = 100000;
        cfg.age = st.age;
        cfg.w = st.w;
        cfg.I = st.I;
        const SimResult opt = simulate(model, Strategy::Optimal, cfg);
        const double solver = model.solver_value(st.age, st.w, st.I);
        const bool inside = annuitization_indicator(s.pre.nearest(st.age), s.grid, st.w, st.I);
        const bool within = std::abs(opt.mean_utility - solver) <= opt.ci_halfwidth;
        pass = pass && within;
        d << "(" << st.age << "," << st.w << "," << st.I << ") dev " << fmt("%.2f", std::abs(opt.mean_utility - solver) / opt.ci_halfwidth)
          << "ci";
        if (inside) {
            const SimResult never = simulate(model, Strategy::NeverAnnuitize, cfg);
            const bool lower = never.mean_utility < opt.mean_utility;
            pass = pass && lower;
            d << (lower ? " never<opt" : " never>=opt");
        }
        d << "; ";
    }
    const double runtime = seconds_since(t0);
    d << "runtime " << fmt("%.0f", runtime) << " s";
    return {pass && runtime < 300, d.str()};
}

Outcome grid_convergence(Lab& lab) {
    const Solved& coarse = lab.solved({0.08, 3, 1.0});
    GridConfig fc;
    fc.w_nodes = 2 * (fc.w_nodes - 1) + 1;
    fc.I_nodes = 2 * (fc.I_nodes - 1) + 1;
    fc.tail_max_ratio /= 2;
    fc.tail_growth = std::sqrt(fc.tail_growth);
    const Grid2D fine = build_grid(fc);
    const ModelParams p;
    PostSolverOptions po;
    po.steps_per_year = 48;
    po.store_stride = 48;
    const ValueSurface post = solve_post(p, fine, po);
    PreSolverOptions pr;
    pr.steps_per_year = 48;
    pr.store_stride = 24;
    const PreSolution pre = solve_pre(p, fine, post, pr);

    double worst_shift = 0;
    int mismatched = 0;
    for (double age : {62.0, 63.0, 64.0, 65.0}) {
        const PolicyFrontier a = extract_frontier(coarse.pre, age);
        const PolicyFrontier b = extract_frontier(pre, age);
        for (Eigen::Index q = 0; q < a.I.size(); ++q) {
            const Eigen::Index fq = 2 * q;
            if (a.present(q) != b.present(fq)) {
                ++mismatched;
                continue;
            }
            if (!a.present(q)) continue;
            worst_shift = std::max(worst_shift,
                                   std::abs(a.w_star(q) - b.w_star(fq)) / cell_width(coarse.grid, a.w_star(q)));
        }
    }
    double worst_j = 0;
    for (double age : {55.0, 60.0, 64.0, 65.0})
        for (double w : {2.0, 5.0, 10.0, 20.0})
            for (double I : {0.0, 1.0, 3.0}) {
                const double jc = bilinear(coarse.grid, coarse.pre.at_age(age).value(), w, I);
                const double jf = bilinear(fine, pre.at_age(age).value(), w, I);
                worst_j = std::max(worst_j, std::abs(jc - jf) / std::abs(jf));
            }
    std::ostringstream d;
    d << "frontier shift " << fmt("%.3g", worst_shift) << " cells, presence mismatches " << mismatched
      << ", J probes " << fmt("%.3g", 100 * worst_j) << "%";
    return {worst_shift < 1 && mismatched == 0 && worst_j < 0.005, d.str()};
}

Outcome oracles() {
    const double horizon = 5;
    const int steps = 96;
    const ModelParams zp = oracle::zero_volatility_params(horizon);
    const Grid2D g = build_grid(oracle::zero_volatility_grid());
    PostSolverOptions o;
    o.steps_per_year = steps;
    o.store_stride = 1000000;
    const ValueSurface s = solve_post(zp, g, o);
    const Eigen::MatrixXd dp = oracle::zero_volatility_dp(zp, g, steps);
    double dp_err = 0;
    for (Eigen::Index k = 0; k < g.core_size; ++k)
        for (Eigen::Index q = 0; q < g.nI(); ++q)
            dp_err = std::max(dp_err, std::abs(s.values[0](k, q) - dp(k, q)) / std::abs(dp(k, q)));

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1, 1);
    double solve_err = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 200;
        TridiagonalSystem<double> sys(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            sys.sub(i) = i > 0 ? u(rng) : 0.0;
            sys.super(i) = i + 1 < n ? u(rng) : 0.0;
            sys.diag(i) = std::abs(sys.sub(i)) + std::abs(sys.super(i)) + 0.1 + std::abs(u(rng));
            sys.rhs(i) = 10 * u(rng);
        }
        const Eigen::VectorXd dense = sys.dense().partialPivLu().solve(sys.rhs);
        solve_err = std::max(solve_err, (thomas_solve(sys) - dense).cwiseAbs().maxCoeff());
    }

    const MortalityModel<double> m;
    double surv_err = 0;
    for (double x : {55.0, 65.0, 80.0, 100.0})
        for (double t : {1.0, 5.0, 10.0, 30.0}) {
            const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double s) { return hazard(m, x + s); }, 0.0, t, 15, 1e-14);
            surv_err = std::max(surv_err, std::abs(survival(m, x, t) - std::exp(-integral)));
        }
    std::ostringstream d;
    d << "DP " << fmt("%.3g", dp_err) << ", Thomas " << fmt("%.3g", solve_err) << ", survival " << fmt("%.3g", surv_err);
    return {dp_err < 1e-4 && solve_err < 1e-10 && surv_err < 1e-8, d.str()};
}

Outcome merton_limit() {
    const ModelParams p;
    PostSolverOptions o;
    o.mode = AllocationMode::Dynamic;
    const ValueSurface s = solve_post(p, build_grid({}), o);
    const double merton = merton_fraction(p.market, p.preferences);
    double worst = 0;
    for (double w : {1000.0, 2000.0, 5000.0, 10000.0}) worst = std::max(worst, std::abs(alpha_policy(s, 65, w, 0) - merton));
    std::ostringstream d;
    d << "Merton " << fmt("%.4f", merton) << ", max deviation " << fmt("%.4f", worst) << " over w in [1e3, 1e4]";
    return {worst < 0.02, d.str()};
}

}  // namespace

int main() {
    Lab lab;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"refund-weight ordering", [&] { return refund_ordering(lab); }},
        {"age expansion", [&] { return age_expansion(lab); }},
        {"drift sensitivity", [&] { return drift_sensitivity(lab); }},
        {"risk-aversion sensitivity", [&] { return risk_aversion(lab); }},
        {"dynamic allocation, no early purchase", [&] { return dynamic_no_early(lab); }},
        {"retirement-slice agreement", [&] { return retirement_agreement(lab); }},
        {"level curve", [&] { return level_curve(lab); }},
        {"asymptotic boundary consistency", [&] { return asymptotic_consistency(lab); }},
        {"Monte Carlo consistency", [&] { return monte_carlo(lab); }},
        {"grid convergence", [&] { return grid_convergence(lab); }},
        {"oracle equivalence", [] { return oracles(); }},
        {"Merton limit", [] { return merton_limit(); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += !r.pass;
        std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    r.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
