#pragma once

#include <functional>

namespace helium {

struct RootOptions {
    double x_tol_rel = 1e-14; // relative width of the final bracket
    double f_tol = 0.0;       // stop early once |f| falls below this
    int max_iter = 200;
};

/// Root of a continuous monotone function on a bracketing interval
/// [lo, hi] with f(lo) and f(hi) of opposite sign (either may be zero).
/// Bisection guarantees convergence; secant steps are taken whenever they
/// stay inside the current bracket, which restores superlinear behaviour
/// on smooth problems.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootOptions& opts = {});

} // namespace helium
