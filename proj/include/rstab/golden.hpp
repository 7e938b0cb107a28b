#pragma once

#include <cmath>
#include <utility>

namespace rstab {

template <typename Real>
struct LineMinimum {
    Real x;
    Real fx;
    int evaluations;
};

/// Golden-section search for a minimizer of a unimodal f on [lo, hi].
/// Stops once the bracket is shorter than tol; returns the best interior
/// point probed. Endpoints are never evaluated.
template <typename Real, typename F>
LineMinimum<Real> golden_section_minimize(F&& f, Real lo, Real hi, Real tol)
{
    const Real inv_phi = (std::sqrt(Real(5)) - Real(1)) / Real(2);
    Real a = lo;
    Real b = hi;
    Real c = b - inv_phi * (b - a);
    Real d = a + inv_phi * (b - a);
    Real fc = f(c);
    Real fd = f(d);
    int evals = 2;
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    return fc <= fd ? LineMinimum<Real>{c, fc, evals} : LineMinimum<Real>{d, fd, evals};
}

/// Maximization counterpart of golden_section_minimize.
template <typename Real, typename F>
LineMinimum<Real> golden_section_maximize(F&& f, Real lo, Real hi, Real tol)
{
    auto r = golden_section_minimize([&](Real x) { return -f(x); }, lo, hi, tol);
    r.fx = -r.fx;
    return r;
}

} // namespace rstab
