#pragma once

#include "dia/grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace dia {

/// Bilinear interpolation of a (w x I) field. Rejects points outside the hull.
inline double bilinear(const Grid2D& grid, const Eigen::MatrixXd& field, double w, double income) {
    const double eps = 1e-12;
    if (!(w >= grid.w(0) - eps && w <= grid.w_max() + eps && income >= grid.I(0) - eps &&
          income <= grid.I(grid.nI() - 1) + eps))
        throw std::out_of_range("bilinear: point outside the grid hull");
    const Eigen::Index k = grid.locate_w(w);
    const Eigen::Index q = grid.locate_I(income);
    const double fw = std::clamp((w - grid.w(k)) / (grid.w(k + 1) - grid.w(k)), 0.0, 1.0);
    const double fi = std::clamp((income - grid.I(q)) / (grid.I(q + 1) - grid.I(q)), 0.0, 1.0);
    return (1 - fw) * (1 - fi) * field(k, q) + fw * (1 - fi) * field(k + 1, q) + (1 - fw) * fi * field(k, q + 1) +
           fw * fi * field(k + 1, q + 1);
}

}  // namespace dia
