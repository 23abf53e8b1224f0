// Test-only reference implementations, kept independent of the library's
// evaluation paths: a recursive adaptive Simpson rule, the fall-shape
// integrals under the substitution u = 1 - s^2, and complete elliptic
// integrals by the arithmetic-geometric mean.
#pragma once

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double fa, double b, double fb, double m, double fm,
                                   double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-13, int depth = 60) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol,
                                depth);
}

// f(k) = int_0^1 sqrt(u) du / sqrt((1-u)(1-ku)), via u = 1 - s^2:
//      = int_0^1 2 sqrt(1-s^2) / sqrt(1 - k + k s^2) ds
inline double fall_f(double k, double tol = 1e-13) {
    return adaptive_simpson(
        [k](double s) {
            return 2.0 * std::sqrt(std::max(1.0 - s * s, 0.0)) /
                   std::sqrt(1.0 - k + k * s * s);
        },
        0.0, 1.0, tol);
}

// g(k) = int_0^1 u^{3/2} du / sqrt((1-u)(1-ku)), same substitution:
//      = int_0^1 2 (1-s^2)^{3/2} / sqrt(1 - k + k s^2) ds
inline double fall_g(double k, double tol = 1e-13) {
    return adaptive_simpson(
        [k](double s) {
            const double u = std::max(1.0 - s * s, 0.0);
            return 2.0 * u * std::sqrt(u) / std::sqrt(1.0 - k + k * s * s);
        },
        0.0, 1.0, tol);
}

struct KE {
    double K, E;
};

// Complete elliptic integrals with parameter m = 1 - mc (AGM;
// Abramowitz-Stegun 17.6). Takes the complement so the degenerate end
// m -> 1 keeps full precision.
inline KE elliptic_KE_comp(double mc) {
    const double pi = 3.141592653589793238462643383279502884;
    const double m = 1.0 - mc;
    double a = 1.0, b = std::sqrt(mc);
    double sum = 0.5 * m;
    double pow2 = 1.0;
    for (int i = 0; i < 64; ++i) {
        const double c = 0.5 * (a - b);
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
        sum += pow2 * c * c;
        pow2 *= 2.0;
        if (std::fabs(c) < 1e-17 * a)
            break;
    }
    KE r;
    r.K = pi / (2.0 * a);
    r.E = r.K * (1.0 - sum);
    return r;
}

inline KE elliptic_KE(double m) { return elliptic_KE_comp(1.0 - m); }

// The same integrals through the closed elliptic forms (independent route),
// parameterized by the complement 1 - k.
inline double fall_f_elliptic_comp(double kc) {
    const double k = 1.0 - kc;
    if (k == 0.0)
        return 3.141592653589793238462643383279502884 / 2.0;
    const KE ke = elliptic_KE_comp(kc);
    return 2.0 * (ke.K - ke.E) / k;
}

inline double fall_g_elliptic_comp(double kc) {
    const double k = 1.0 - kc;
    if (k == 0.0)
        return 3.0 * 3.141592653589793238462643383279502884 / 8.0;
    const KE ke = elliptic_KE_comp(kc);
    return 2.0 * ((2.0 + k) * ke.K - 2.0 * (1.0 + k) * ke.E) / (3.0 * k * k);
}

inline double fall_f_elliptic(double k) { return fall_f_elliptic_comp(1.0 - k); }
inline double fall_g_elliptic(double k) { return fall_g_elliptic_comp(1.0 - k); }

} // namespace oracle
