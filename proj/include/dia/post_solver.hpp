#pragma once

#include "dia/asymptotic.hpp"
#include "dia/grid.hpp"
#include "dia/model.hpp"

#include <Eigen/Dense>
#include <vector>

namespace dia {

/// Post-retirement value function J(t, w, I) with optimal controls, kept on
/// a subset of the time steps. Each field is (w-nodes x I-nodes).
struct ValueSurface {
    Grid2D grid;
    TimeAxis axis;          ///< years since retirement
    double origin_age{};    ///< age at axis time 0
    AllocationMode mode{AllocationMode::Fixed};
    AsymptoticCoeffs asymptotic;

    std::vector<int> steps;  ///< stored step indices, ascending
    std::vector<Eigen::MatrixXd> values;
    std::vector<Eigen::MatrixXd> consumption;
    std::vector<Eigen::MatrixXd> alpha;  ///< empty in fixed mode

    double age_of(std::size_t slice) const { return origin_age + axis.at(steps[slice]); }
    std::size_t nearest_slice(double age) const;

    /// J at retirement (the seed of the pre-retirement problem).
    const Eigen::MatrixXd& retirement_values() const { return values.front(); }
};

struct PostSolverOptions {
    AllocationMode mode{AllocationMode::Fixed};
    int steps_per_year{24};
    int store_stride{12};          ///< keep every n-th step (first and last always kept)
    bool check_invariants{true};
    double concavity_tolerance{1e-6};
};

/// Backward implicit solve from the terminal age to retirement with lagged
/// consumption (and allocation, in dynamic mode).
ValueSurface solve_post(const ModelParams& params, const Grid2D& grid, const PostSolverOptions& options = {});

/// Optimal controls recomputed from a value slice (consumption from J_w,
/// allocation from J_w / J_ww). `alpha` is left untouched in fixed mode.
void controls_from_values(const ModelParams& params, const Grid2D& grid, AllocationMode mode,
                          const Eigen::MatrixXd& values, Eigen::MatrixXd& consumption, Eigen::MatrixXd& alpha);

/// Bilinear consumption c*(age, w, I) on the stored slice nearest `age`.
double consumption_policy(const ValueSurface& surface, double age, double w, double income);
double value_at(const ValueSurface& surface, double age, double w, double income);
double alpha_policy(const ValueSurface& surface, double age, double w, double income);

/// Throws NumericalError if a slice is not increasing in w and I or not
/// concave in w beyond `tolerance`.
void check_value_shape(const Grid2D& grid, const Eigen::MatrixXd& values, double tolerance, const char* where);

}  // namespace dia
