#pragma once

#include "dia/pre_solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <optional>

namespace dia {

/// Annuitization boundary w*(I) at one age. Entries are NaN where no purchase
/// is ever optimal at that income level.
struct PolicyFrontier {
    double age{};
    double a_tilde{};
    Eigen::VectorXd I;
    Eigen::VectorXd w_star;

    bool present(Eigen::Index q) const { return !std::isnan(w_star(q)); }
    /// Piecewise-linear boundary at `income`; empty if either bracketing node is absent.
    std::optional<double> boundary_at(double income) const;
};

/// Per income column: the first wealth node flagged for purchase, refined
/// linearly against the node below it by the sign change of j2 - j1.
PolicyFrontier extract_frontier(const PreSolveSlice& slice, const Grid2D& grid);
/// Frontier on the stored slice nearest `age`; rejects ages outside the solved span.
PolicyFrontier extract_frontier(const PreSolution& solution, double age);

struct Recommendation {
    double delta_I{};
    double w_after{};
    double I_after{};
    double a_tilde{};
    bool annuitize{};  ///< state was strictly inside the purchase region
};

/// Minimum purchase that moves (w, I) along the line of slope -a_tilde onto
/// the frontier. States outside the region get delta_I = 0. An absent frontier
/// entry ends the region, so the walk stops at the last income level where
/// the boundary exists.
Recommendation recommend(const PolicyFrontier& frontier, double w, double income);

}  // namespace dia
