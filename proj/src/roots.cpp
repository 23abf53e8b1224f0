#include "helium/roots.hpp"
#include "helium/errors.hpp"

#include <cmath>

namespace helium {

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootOptions& opts) {
    double flo = f(lo);
    if (flo == 0.0)
        return lo;
    double fhi = f(hi);
    if (fhi == 0.0)
        return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw DomainError("find_root: endpoints do not bracket a root");

    double a = lo, b = hi, fa = flo, fb = fhi;
    double x = b, fx = fb;
    for (int it = 0; it < opts.max_iter; ++it) {
        // Secant candidate from the bracket endpoints.
        double s = b - fb * (b - a) / (fb - fa);
        const double mid = 0.5 * (a + b);
        if (!std::isfinite(s) || s <= a || s >= b)
            s = mid;
        // Avoid stalling against one endpoint.
        const double width = b - a;
        if (std::min(s - a, b - s) < 0.01 * width)
            s = mid;

        x = s;
        fx = f(x);
        if (fx == 0.0 || std::fabs(fx) <= opts.f_tol)
            return x;
        if ((fx > 0.0) == (fa > 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a <= opts.x_tol_rel * (std::fabs(a) + std::fabs(b)) ||
            b - a <= 1e-300)
            break;
    }
    return std::fabs(fa) < std::fabs(fb) ? a : b;
}

} // namespace helium
