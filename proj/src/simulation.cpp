#include "dia/simulation.hpp"

#include "dia/annuity.hpp"
#include "dia/errors.hpp"
#include "dia/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

namespace dia {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Optimal: return "optimal";
        case Strategy::NeverAnnuitize: return "never-annuitize";
        case Strategy::AnnuitizeAllAtStart: return "annuitize-all";
        case Strategy::FixedConsumption: return "fixed-consumption";
    }
    return "unknown";
}

Strategy parse_strategy(const std::string& name) {
    for (Strategy s : {Strategy::Optimal, Strategy::NeverAnnuitize, Strategy::AnnuitizeAllAtStart,
                       Strategy::FixedConsumption})
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

void SimConfig::validate() const {
    if (paths < 1) throw std::invalid_argument("simulation: need at least one path");
    if (!(dt_sim > 0)) throw std::invalid_argument("simulation: dt_sim must be positive");
    if (!(w >= 0) || !(I >= 0)) throw std::invalid_argument("simulation: start wealth and income must be non-negative");
    if (!(fixed_consumption > 0)) throw std::invalid_argument("simulation: fixed consumption must be positive");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double pairwise_sum(const double* values, std::size_t n) {
    if (n <= 8) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += values[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

PolicyModel::PolicyModel(const ModelParams& params, const ValueSurface& post, const PreSolution* pre)
    : params_(params), post_(post), pre_(pre) {
    params_.validate();
    if (std::abs(post.origin_age - params.retirement_age()) > 1e-9)
        throw std::invalid_argument("policy model: post-retirement surface does not start at retirement");
    if (pre) {
        if (pre->grid.w != post.grid.w || pre->grid.I != post.grid.I)
            throw std::invalid_argument("policy model: pre- and post-retirement grids differ");
        frontiers_.reserve(pre->slices.size());
        for (const auto& s : pre->slices) frontiers_.push_back(extract_frontier(s, pre->grid));
    }
}

double PolicyModel::solver_value(double age, double w, double income) const {
    const double ret = params_.retirement_age();
    if (age < ret - 1e-9 || (pre_ && age <= ret + 1e-9)) {
        if (!pre_) throw std::invalid_argument("policy model: no pre-retirement solution for age " + std::to_string(age));
        return bilinear(pre_->grid, pre_->nearest(age).value(), w, income);
    }
    return value_at(post_, age, w, income);
}

namespace {

struct Schedule {
    // pre-retirement steps, then post-retirement steps
    std::vector<double> start;  ///< age at the start of each step
    std::vector<double> length;
    std::vector<int> slice;     ///< nearest stored slice of the relevant phase
    std::size_t pre_steps{};
};

Schedule build_schedule(const PolicyModel& model, const SimConfig& cfg) {
    const double ret = model.params().retirement_age();
    const double end = model.params().terminal_age;
    Schedule s;
    auto add_phase = [&](double a, double b, bool pre) {
        if (!(b > a + 1e-12)) return;
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / cfg.dt_sim - 1e-9)));
        const double h = (b - a) / n;
        for (int i = 0; i < n; ++i) {
            const double t = a + h * i;
            s.start.push_back(t);
            s.length.push_back(h);
            if (pre)
                s.slice.push_back(static_cast<int>(model.pre()->nearest_index(t)));
            else
                s.slice.push_back(static_cast<int>(model.post().nearest_slice(t)));
        }
    };
    if (cfg.age < ret) add_phase(cfg.age, ret, true);
    s.pre_steps = s.start.size();
    add_phase(std::max(cfg.age, ret), end, false);
    return s;
}

struct PathState {
    double W{};
    double I{};
    double total{};
    bool bought{};
};

bool needs_pricer(const ModelParams& p, Strategy strategy, const SimConfig& cfg) {
    return cfg.age < p.retirement_age() || strategy == Strategy::AnnuitizeAllAtStart;
}

class Simulator {
public:
    Simulator(const PolicyModel& model, Strategy strategy, const SimConfig& cfg)
        : model_(model),
          p_(model.params()),
          strategy_(strategy),
          cfg_(cfg),
          schedule_(build_schedule(model, cfg)),
          pricer_(needs_pricer(p_, strategy, cfg) ? std::optional<DIAPricer<double>>(std::in_place, p_.contract,
                                                                                      p_.mortality, p_.market)
                                                 : std::nullopt),
          grid_(model.post().grid),
          dynamic_pre_(model.pre() && model.pre()->mode == AllocationMode::Dynamic),
          dynamic_post_(model.post().mode == AllocationMode::Dynamic) {
        const int years = static_cast<int>(std::ceil(p_.terminal_age - cfg.age)) + 1;
        purchases_.assign(years, 0.0);
        alive_.assign(years, 0.0);
    }

    /// Simulates an antithetic pair (or a single path) and returns the per-path utilities.
    void run_pair(std::uint64_t index, double& first, double& second, bool antithetic) {
        std::mt19937_64 rng(splitmix64(cfg_.seed + index));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);

        double u = unif(rng);
        while (u <= 0.0) u = unif(rng);
        const double lifetime = survival_quantile(p_.mortality, cfg_.age, u);
        const double death_age = cfg_.age + lifetime;

        PathState paths[2];
        const int count = antithetic ? 2 : 1;
        for (int i = 0; i < count; ++i) paths[i] = {cfg_.w, cfg_.I, 0.0, false};

        const double ret = p_.retirement_age();
        if (cfg_.age <= ret + 1e-12 && strategy_ == Strategy::AnnuitizeAllAtStart) {
            const double price = pricer_->price(std::min(cfg_.age - p_.contract.x, p_.contract.tau));
            for (int i = 0; i < count; ++i) {
                const double units = std::min(paths[i].W / price, grid_.I(grid_.nI() - 1) - paths[i].I);
                if (units > 0) {
                    paths[i].I += units;
                    paths[i].W = std::max(0.0, paths[i].W - price * units);
                    paths[i].bought = true;
                }
            }
        }

        const std::size_t n_steps = schedule_.start.size();
        // a start on the retirement slice still gets its purchase decision
        bool retired_checked = cfg_.age > ret + 1e-9 || !model_.pre();
        for (std::size_t n = 0; n < n_steps; ++n) {
            const double t = schedule_.start[n];
            const double h = schedule_.length[n];
            const bool pre = n < schedule_.pre_steps;
            if (!pre && !retired_checked) {
                // purchase decision on the retirement slice itself
                retired_checked = true;
                if (death_age > t)
                    for (int i = 0; i < count; ++i) project(paths[i], model_.frontiers().back(), t);
                for (int i = 0; i < count; ++i) income_at_retirement_ += paths[i].I;
                retired_paths_ += count;
            }
            if (death_age <= t) break;
            if (pre) {
                for (int i = 0; i < count; ++i) project(paths[i], model_.frontiers()[schedule_.slice[n]], t);
            }
            const double z = normal(rng);
            const bool dies = death_age < t + h;
            const double step = dies ? death_age - t : h;
            for (int i = 0; i < count; ++i) {
                advance(paths[i], n, t, step, i == 0 ? z : -z, pre);
                if (dies) bequest(paths[i], death_age, pre);
            }
            if (dies) break;
        }
        if (death_age >= p_.terminal_age) {
            const double disc = discount(p_.terminal_age);
            for (int i = 0; i < count; ++i) paths[i].total += disc * utility(p_.preferences, paths[i].W + p_.market.pi);
        }
        for (int i = 0; i < count; ++i) {
            if (!std::isfinite(paths[i].total))
                throw NumericalError("simulation: non-finite utility on path " + std::to_string(index));
            if (paths[i].bought) bought_paths_ += 1;
        }
        death_age_sum_ += count * std::min(death_age, p_.terminal_age);
        first = paths[0].total;
        second = antithetic ? paths[1].total : 0.0;
    }

    const std::vector<double>& purchases() const { return purchases_; }
    const std::vector<double>& alive() const { return alive_; }
    double bought_paths() const { return bought_paths_; }
    double income_at_retirement() const { return retired_paths_ > 0 ? income_at_retirement_ / retired_paths_ : 0.0; }
    double death_age_sum() const { return death_age_sum_; }

private:
    double discount(double age) const { return std::exp(-p_.market.rho * (age - cfg_.age)); }

    void project(PathState& s, const PolicyFrontier& frontier, double age) {
        const auto year = static_cast<std::size_t>(std::max(0.0, age - cfg_.age));
        if (year < alive_.size() && std::abs(age - cfg_.age - std::floor(age - cfg_.age)) < 1e-9) alive_[year] += 1;
        if (strategy_ != Strategy::Optimal) return;
        const double w = std::min(s.W, grid_.w_max());
        const Recommendation rec = recommend(frontier, w, std::min(s.I, grid_.I(grid_.nI() - 1)));
        if (rec.delta_I <= 0) return;
        s.I += rec.delta_I;
        s.W = std::max(0.0, s.W - frontier.a_tilde * rec.delta_I);
        s.bought = true;
        if (year < purchases_.size()) purchases_[year] += 1;
    }

    double lookup(const Eigen::MatrixXd& field, double w, double income) const {
        return bilinear(grid_, field, std::clamp(w, 0.0, grid_.w_max()),
                        std::clamp(income, 0.0, grid_.I(grid_.nI() - 1)));
    }

    void advance(PathState& s, std::size_t n, double t, double h, double z, bool pre) {
        const auto& m = p_.market;
        double alpha = 1.0;
        if (strategy_ != Strategy::FixedConsumption) {
            if (pre && dynamic_pre_)
                alpha = lookup(model_.pre()->slices[schedule_.slice[n]].alpha, s.W, s.I);
            else if (!pre && dynamic_post_)
                alpha = lookup(model_.post().alpha[schedule_.slice[n]], s.W, s.I);
        }
        const double mu = m.drift(alpha);
        const double sig = m.volatility(alpha);
        const double growth = std::exp((mu - 0.5 * sig * sig) * h + sig * std::sqrt(h) * z);
        if (pre) {
            s.W = s.W * growth + m.nu * h;
            return;
        }
        double c = strategy_ == Strategy::FixedConsumption ? cfg_.fixed_consumption
                                                           : lookup(model_.post().consumption[schedule_.slice[n]], s.W, s.I);
        // no borrowing: consumption is capped by what the step can fund
        c = std::min(c, s.W / h + s.I + m.pi);
        const double weight = m.rho > 0 ? (1 - std::exp(-m.rho * h)) / m.rho : h;
        s.total += discount(t) * weight * utility(p_.preferences, c);
        s.W = std::max(0.0, s.W * growth + (s.I + m.pi - c) * h);
    }

    void bequest(PathState& s, double age, bool pre) {
        const auto& m = p_.market;
        double estate = s.W + m.pi;
        if (pre) estate = s.W + pricer_->refund(age - p_.contract.x) * s.I + m.nu;
        s.total += discount(age) * utility(p_.preferences, estate);
    }

    const PolicyModel& model_;
    const ModelParams& p_;
    Strategy strategy_;
    SimConfig cfg_;
    Schedule schedule_;
    std::optional<DIAPricer<double>> pricer_;  ///< only built when a price or refund is needed
    const Grid2D& grid_;
    bool dynamic_pre_;
    bool dynamic_post_;
    std::vector<double> purchases_;
    std::vector<double> alive_;
    double bought_paths_{};
    double income_at_retirement_{};
    double retired_paths_{};
    double death_age_sum_{};
};

void check_start(const PolicyModel& model, const SimConfig& cfg) {
    cfg.validate();
    const auto& p = model.params();
    if (cfg.age < p.contract.x - 1e-9 || cfg.age >= p.terminal_age)
        throw std::invalid_argument("simulation: start age outside the modelled span");
    if (cfg.age < p.retirement_age() && !model.pre())
        throw std::invalid_argument("simulation: pre-retirement start needs a pre-retirement solution");
    if (model.pre() && cfg.age < model.pre()->slices.front().age - 1e-9)
        throw std::invalid_argument("simulation: start age precedes the pre-retirement solution");
    const Grid2D& g = model.post().grid;
    if (cfg.w > g.w_max() || cfg.I > g.I(g.nI() - 1))
        throw std::invalid_argument("simulation: start state outside the solved grid");
    const double grid_dt = model.post().axis.dt();
    if (cfg.dt_sim > grid_dt * (1 + 1e-9))
        throw std::invalid_argument("simulation: dt_sim exceeds the solver time step");
}

}  // namespace

SimResult simulate(const PolicyModel& model, Strategy strategy, const SimConfig& config) {
    check_start(model, config);
    Simulator sim(model, strategy, config);

    const bool antithetic = config.antithetic && config.paths >= 2;
    const std::size_t units = antithetic ? (config.paths + 1) / 2 : config.paths;
    std::vector<double> first(units), second(antithetic ? units : 0);
    for (std::size_t i = 0; i < units; ++i) {
        double a = 0, b = 0;
        sim.run_pair(i, a, b, antithetic);
        first[i] = a;
        if (antithetic) second[i] = b;
    }
    const std::size_t paths = antithetic ? 2 * units : units;

    // the estimator's sampling units are pair averages under antithetics
    std::vector<double> sample(units);
    for (std::size_t i = 0; i < units; ++i) sample[i] = antithetic ? 0.5 * (first[i] + second[i]) : first[i];
    const double mean = pairwise_sum(sample.data(), units) / units;

    double variance = 0;
    if (units >= 2) {
        std::vector<double> dev(units);
        for (std::size_t i = 0; i < units; ++i) dev[i] = (sample[i] - mean) * (sample[i] - mean);
        variance = pairwise_sum(dev.data(), units) / (units - 1) / units;
    } else if (antithetic) {
        const double d = first[0] - second[0];
        variance = d * d / 4;
    }

    SimResult r;
    r.strategy = strategy;
    r.mean_utility = mean;
    r.std_error = std::sqrt(variance);
    r.ci_halfwidth = 1.959963984540054 * r.std_error;
    r.paths = paths;
    r.seed = config.seed;
    r.fraction_annuitizing = sim.bought_paths() / paths;
    r.purchase_rate_by_age.resize(sim.purchases().size());
    for (std::size_t i = 0; i < r.purchase_rate_by_age.size(); ++i)
        r.purchase_rate_by_age[i] = sim.alive()[i] > 0 ? sim.purchases()[i] / sim.alive()[i] : 0.0;
    r.mean_income_at_retirement = sim.income_at_retirement();
    r.mean_death_age = sim.death_age_sum() / paths;
    return r;
}

std::vector<SimResult> compare_strategies(const PolicyModel& model, const std::vector<Strategy>& strategies,
                                          const SimConfig& config) {
    std::vector<SimResult> out;
    out.reserve(strategies.size());
    for (Strategy s : strategies) out.push_back(simulate(model, s, config));
    std::stable_sort(out.begin(), out.end(),
                     [](const SimResult& a, const SimResult& b) { return a.mean_utility > b.mean_utility; });
    return out;
}

}  // namespace dia
