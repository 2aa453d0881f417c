#pragma once

#include "dia/model.hpp"
#include "dia/policy.hpp"
#include "dia/post_solver.hpp"
#include "dia/pre_solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dia {

enum class Strategy {
    Optimal,             ///< project onto the frontier before retirement, solved c* and alpha* after
    NeverAnnuitize,      ///< same consumption and allocation rule, no purchases
    AnnuitizeAllAtStart, ///< convert all wealth (up to the income grid) at the start, then never again
    FixedConsumption,    ///< no purchases, all-risky, constant consumption after retirement
};

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct SimConfig {
    std::size_t paths{100000};
    double dt_sim{1.0 / 48};
    std::uint64_t seed{20240601};
    double age{55};
    double w{10};
    double I{0};
    bool antithetic{true};
    double fixed_consumption{1.0};

    void validate() const;
};

struct SimResult {
    Strategy strategy{Strategy::Optimal};
    double mean_utility{};
    double ci_halfwidth{};  ///< 95% normal interval
    double std_error{};
    std::size_t paths{};
    std::uint64_t seed{};
    double fraction_annuitizing{};  ///< share of paths that bought at least once
    std::vector<double> purchase_rate_by_age;  ///< purchases per living path, by whole year from the start age
    double mean_income_at_retirement{};  ///< over paths alive at retirement
    double mean_death_age{};             ///< terminal age for survivors
};

/// Solved surfaces packaged for forward simulation. The pre-retirement
/// solution is optional when every simulated start is at or after retirement.
class PolicyModel {
public:
    PolicyModel(const ModelParams& params, const ValueSurface& post, const PreSolution* pre = nullptr);

    const ModelParams& params() const { return params_; }
    const ValueSurface& post() const { return post_; }
    const PreSolution* pre() const { return pre_; }
    const std::vector<PolicyFrontier>& frontiers() const { return frontiers_; }

    /// Solver value at a start state: the pre-retirement value before
    /// retirement (including the retirement slice when one is attached), the post-retirement value after.
    double solver_value(double age, double w, double income) const;

private:
    ModelParams params_;
    const ValueSurface& post_;
    const PreSolution* pre_;
    std::vector<PolicyFrontier> frontiers_;
};

SimResult simulate(const PolicyModel& model, Strategy strategy, const SimConfig& config);

/// Runs every strategy on the same random numbers and returns the results
/// sorted by decreasing mean utility.
std::vector<SimResult> compare_strategies(const PolicyModel& model, const std::vector<Strategy>& strategies,
                                          const SimConfig& config);

/// splitmix64 finaliser used to fan a root seed out to per-pair generators.
std::uint64_t splitmix64(std::uint64_t x);

/// Pairwise (cascade) summation, independent of how the values were produced.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace dia
