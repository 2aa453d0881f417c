#pragma once

#include <Eigen/Dense>

namespace dia {

/// Wealth axis: uniform core [0, w_max] with spacing w_max / (w_nodes - 1),
/// optionally followed by a geometrically stretched tail out to w_tail_max.
/// The tail carries the far-field boundary condition; results are reported
/// on the core.
struct GridConfig {
    double w_max{30};
    int w_nodes{301};
    double w_tail_max{2e4};      ///< <= w_max disables the tail
    double tail_growth{1.05};    ///< spacing ratio between successive tail cells
    double tail_max_ratio{0.02}; ///< cap on tail spacing relative to w
    double I_max{6};
    int I_nodes{61};
};

struct Grid2D {
    Eigen::VectorXd w;
    Eigen::VectorXd I;
    double dw{};
    double dI{};
    Eigen::Index core_size{};  ///< number of w-nodes on the uniform core

    Eigen::Index nw() const { return w.size(); }
    Eigen::Index nI() const { return I.size(); }
    double w_max() const { return w(w.size() - 1); }
    double w_core_max() const { return w(core_size - 1); }

    /// Index of the cell [w_k, w_{k+1}] containing `value` (clamped to the axis).
    Eigen::Index locate_w(double value) const;
    Eigen::Index locate_I(double value) const;
};

Grid2D build_grid(const GridConfig& config);

/// Uniform time axis over [start, end] (years from the phase origin).
struct TimeAxis {
    double start{};
    double end{};
    int steps{};

    double dt() const { return (end - start) / steps; }
    double at(int n) const { return start + (end - start) * n / steps; }
};

TimeAxis build_time_axis(double start, double end, int steps_per_year);

}  // namespace dia
