#include "dia/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dia {

namespace {

Eigen::Index locate(const Eigen::VectorXd& axis, double value) {
    const Eigen::Index n = axis.size();
    if (value <= axis(0)) return 0;
    if (value >= axis(n - 1)) return n - 2;
    const double* begin = axis.data();
    const double* it = std::upper_bound(begin, begin + n, value);
    return static_cast<Eigen::Index>(it - begin) - 1;
}

}  // namespace

Eigen::Index Grid2D::locate_w(double value) const { return locate(w, value); }
Eigen::Index Grid2D::locate_I(double value) const { return locate(I, value); }

Grid2D build_grid(const GridConfig& config) {
    if (!(config.w_max > 0) || !(config.I_max > 0)) throw std::invalid_argument("grid: extents must be positive");
    if (config.w_nodes < 3 || config.I_nodes < 3) throw std::invalid_argument("grid: need at least 3 nodes per axis");
    if (!(config.tail_growth >= 1) || !(config.tail_max_ratio > 0))
        throw std::invalid_argument("grid: tail growth must be >= 1 and tail ratio positive");

    Grid2D grid;
    grid.dw = config.w_max / (config.w_nodes - 1);
    grid.dI = config.I_max / (config.I_nodes - 1);
    grid.core_size = config.w_nodes;

    std::vector<double> w(config.w_nodes);
    for (int k = 0; k < config.w_nodes; ++k) w[k] = config.w_max * k / (config.w_nodes - 1);
    double h = grid.dw;
    while (w.back() < config.w_tail_max) {
        h = std::max(grid.dw, std::min(h * config.tail_growth, config.tail_max_ratio * w.back()));
        w.push_back(w.back() + h);
    }
    grid.w = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    grid.I = Eigen::VectorXd::LinSpaced(config.I_nodes, 0.0, config.I_max);
    return grid;
}

TimeAxis build_time_axis(double start, double end, int steps_per_year) {
    if (!(end > start)) throw std::invalid_argument("time axis: end must exceed start");
    if (steps_per_year <= 0) throw std::invalid_argument("time axis: steps per year must be positive");
    const int steps = std::max(1, static_cast<int>(std::lround((end - start) * steps_per_year)));
    return {start, end, steps};
}

}  // namespace dia
