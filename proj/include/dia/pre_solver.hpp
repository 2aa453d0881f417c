#pragma once

#include "dia/grid.hpp"
#include "dia/model.hpp"
#include "dia/post_solver.hpp"

#include <Eigen/Dense>
#include <vector>

namespace dia {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// One pre-retirement time slice. j1 is the value of continuing without a
/// purchase, j2 the value of buying along the characteristic line (-inf where
/// no purchase is possible: w = 0 and the top income row).
struct PreSolveSlice {
    int step{};
    double age{};
    double a_tilde{};  ///< DIA price per unit of income at this age
    double refund{};   ///< death benefit per unit of income at this age
    Eigen::MatrixXd j1;
    Eigen::MatrixXd j2;
    BoolMatrix annuitize;  ///< j2 >= j1
    Eigen::MatrixXd alpha; ///< empty in fixed mode

    Eigen::MatrixXd value() const { return j1.cwiseMax(j2); }
};

struct PreSolution {
    Grid2D grid;
    TimeAxis axis;  ///< years since the start age
    double origin_age{};
    AllocationMode mode{AllocationMode::Fixed};
    int substeps{};  ///< explicit sub-steps used on the last macro step
    std::vector<PreSolveSlice> slices;  ///< ascending in age; the last is the retirement slice

    std::size_t nearest_index(double age) const;
    const PreSolveSlice& nearest(double age) const { return slices[nearest_index(age)]; }
    /// Exact slice at `age`; throws std::out_of_range if no stored slice is within 1e-9.
    const PreSolveSlice& at_age(double age) const;
};

struct PreSolverOptions {
    AllocationMode mode{AllocationMode::Fixed};
    int steps_per_year{24};
    int store_stride{2};
    double cfl_safety{0.9};
};

/// Annuitization comparison on one slice. `j1` is the continuation value;
/// on return `j2` holds the purchase alternative and `value` = max(j1, j2).
///
/// Buying ds units of income costs a_tilde * ds of wealth, so J2 at node
/// (w_k, I_q) is the final value one wealth cell lower at I_q + dw_k / a_tilde
/// (cubic in I, on the smoother of the centred and forward stencils). Where a
/// wealth cell costs more than one income step (the stretched tail) the
/// comparison point is (w_k - a_tilde dI, I_{q+1}) instead,
/// linear in w. Rows are swept upward in w and downward in I so that every
/// point read is already final. Interpolation acts on the certainty
/// equivalent ((1 - gamma) J)^{1 / (1 - gamma)}.
void purchase_sweep(const Grid2D& grid, const Eigen::MatrixXd& j1, double a_tilde, double gamma, Eigen::MatrixXd& j2,
                    Eigen::MatrixXd& value);

/// Backward solve from retirement to the start age. The seed must be a
/// post-retirement surface on the same grid.
PreSolution solve_pre(const ModelParams& params, const Grid2D& grid, const ValueSurface& seed,
                      const PreSolverOptions& options = {});

/// Nearest-node annuitization flag. Throws std::out_of_range outside the hull.
bool annuitization_indicator(const PreSolveSlice& slice, const Grid2D& grid, double w, double income);

}  // namespace dia
