#pragma once

#include <cmath>
#include <stdexcept>

namespace dia {

namespace detail {

template <typename Scalar, typename F>
Scalar simpson_recurse(const F& f, Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb, Scalar whole, Scalar tol,
                       int depth) {
    const Scalar m = (a + b) / 2;
    const Scalar lm = (a + m) / 2;
    const Scalar rm = (m + b) / 2;
    const Scalar flm = f(lm);
    const Scalar frm = f(rm);
    const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
    const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
    const Scalar delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    return simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive composite Simpson rule on [a, b] with Richardson correction.
template <typename Scalar, typename F>
Scalar adaptive_simpson(const F& f, Scalar a, Scalar b, Scalar tol = Scalar(1e-12), int max_depth = 40) {
    if (!(b >= a)) throw std::domain_error("adaptive_simpson: reversed interval");
    if (a == b) return Scalar(0);
    const Scalar fa = f(a);
    const Scalar fb = f(b);
    const Scalar fm = f((a + b) / 2);
    const Scalar whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace dia
