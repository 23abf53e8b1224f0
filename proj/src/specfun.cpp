#include "helium/specfun.hpp"
#include "helium/errors.hpp"
#include "helium/roots.hpp"

#include <cmath>

namespace helium::specfun {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kHalfPi = 1.570796326794896619231321691639751442;

// Below this complement the theta-substituted integrands develop a peak at
// theta = pi/2 too narrow to resolve in double; switch to the AGM route.
constexpr double kAgmSwitch = 1e-8;
// Below this complement even sqrt(1-k) degrades; the logarithmic asymptotics
// of K and E are then exact to double precision (error O((1-k) log(1-k))).
constexpr double kAsymptoticSwitch = 1e-280;

double theta_weight(double delta, double sin_t, double cos_t) {
    // 1 - k sin^2 = cos^2 + delta sin^2, evaluated without cancellation.
    return std::sqrt(cos_t * cos_t + delta * sin_t * sin_t);
}

// K and E in the regime where only log(1-m) is representable.
CompleteElliptic elliptic_asymptotic(double log_delta) {
    CompleteElliptic ce;
    ce.K = std::log(4.0) - 0.5 * log_delta;
    ce.E = 1.0;
    return ce;
}

CompleteElliptic elliptic_for(const ShapeParam& k) {
    if (k.log_complement() < std::log(kAsymptoticSwitch))
        return elliptic_asymptotic(k.log_complement());
    return complete_elliptic(k.complement());
}

double f_elliptic(const ShapeParam& k) {
    const CompleteElliptic ce = elliptic_for(k);
    return 2.0 * (ce.K - ce.E) / k.k();
}

double g_elliptic(const ShapeParam& k) {
    const CompleteElliptic ce = elliptic_for(k);
    const double kk = k.k();
    return 2.0 * ((2.0 + kk) * ce.K - 2.0 * (1.0 + kk) * ce.E) / (3.0 * kk * kk);
}

double f_prime_elliptic(const ShapeParam& k) {
    // d/dk [2(K-E)/k] = (E/(1-k) + E - 2K)/k^2; cancellation-free only for
    // small complements, which is the only regime where it is used.
    const CompleteElliptic ce = elliptic_for(k);
    const double kk = k.k();
    return (ce.E / k.complement() + ce.E - 2.0 * ce.K) / (kk * kk);
}

double g_prime_elliptic(const ShapeParam& k) {
    const CompleteElliptic ce = elliptic_for(k);
    const double kk = k.k();
    const double delta = k.complement();
    const double Kp = (ce.E - delta * ce.K) / (2.0 * kk * delta);
    const double Ep = (ce.E - ce.K) / (2.0 * kk);
    const double P = (2.0 + kk) * ce.K - 2.0 * (1.0 + kk) * ce.E;
    const double Pp = ce.K + (2.0 + kk) * Kp - 2.0 * ce.E - 2.0 * (1.0 + kk) * Ep;
    return 2.0 * (Pp * kk - 2.0 * P) / (3.0 * kk * kk * kk);
}

} // namespace

ShapeParam::ShapeParam(double k) {
    if (!(k >= 0.0) || k >= 1.0)
        throw DomainError("ShapeParam: k must lie in [0,1)");
    k_ = k;
    delta_ = 1.0 - k;
    log_delta_ = std::log1p(-k);
}

ShapeParam ShapeParam::from_complement(double one_minus_k) {
    if (!(one_minus_k > 0.0) || one_minus_k > 1.0)
        throw DomainError("ShapeParam: complement must lie in (0,1]");
    ShapeParam s;
    s.delta_ = one_minus_k;
    s.k_ = 1.0 - one_minus_k;
    s.log_delta_ = std::log(one_minus_k);
    return s;
}

ShapeParam ShapeParam::from_log_complement(double log_one_minus_k) {
    if (!(log_one_minus_k <= 0.0))
        throw DomainError("ShapeParam: log complement must be <= 0");
    ShapeParam s;
    s.log_delta_ = log_one_minus_k;
    s.delta_ = std::exp(log_one_minus_k); // may underflow to 0
    s.k_ = -std::expm1(log_one_minus_k);
    if (s.k_ >= 1.0)
        s.k_ = 1.0; // representable limit; complement carries the information
    return s;
}

CompleteElliptic complete_elliptic(double one_minus_m) {
    if (!(one_minus_m > 0.0) || one_minus_m > 1.0)
        throw DomainError("complete_elliptic: complement must lie in (0,1]");
    const double m = 1.0 - one_minus_m;
    double a = 1.0;
    double b = std::sqrt(one_minus_m);
    double sum = 0.5 * m; // 2^{-1} c_0^2 with c_0^2 = m
    double pow2 = 1.0;    // 2^{n-1} for n = 1
    for (int it = 0; it < 64; ++it) {
        const double c = 0.5 * (a - b);
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
        sum += pow2 * c * c;
        pow2 *= 2.0;
        if (std::fabs(c) < 1e-17 * a)
            break;
    }
    CompleteElliptic ce;
    ce.K = kPi / (2.0 * a);
    ce.E = ce.K * (1.0 - sum);
    return ce;
}

double f(const ShapeParam& k, const Quadrature& opts) {
    const double delta = k.complement();
    if (delta < kAgmSwitch)
        return f_elliptic(k);
    auto integrand = [delta](double t) {
        const double s = std::sin(t), c = std::cos(t);
        return 2.0 * s * s / theta_weight(delta, s, c);
    };
    return integrate(integrand, 0.0, kHalfPi, opts).value;
}

double g(const ShapeParam& k, const Quadrature& opts) {
    const double delta = k.complement();
    if (delta < kAgmSwitch)
        return g_elliptic(k);
    auto integrand = [delta](double t) {
        const double s = std::sin(t), c = std::cos(t);
        const double s2 = s * s;
        return 2.0 * s2 * s2 / theta_weight(delta, s, c);
    };
    return integrate(integrand, 0.0, kHalfPi, opts).value;
}

double f_prime(const ShapeParam& k, const Quadrature& opts) {
    const double delta = k.complement();
    if (delta < kAgmSwitch)
        return f_prime_elliptic(k);
    auto integrand = [delta](double t) {
        const double s = std::sin(t), c = std::cos(t);
        const double w = theta_weight(delta, s, c);
        const double s2 = s * s;
        return s2 * s2 / (w * w * w);
    };
    return integrate(integrand, 0.0, kHalfPi, opts).value;
}

double g_prime(const ShapeParam& k, const Quadrature& opts) {
    const double delta = k.complement();
    if (delta < kAgmSwitch)
        return g_prime_elliptic(k);
    auto integrand = [delta](double t) {
        const double s = std::sin(t), c = std::cos(t);
        const double w = theta_weight(delta, s, c);
        const double s2 = s * s;
        return s2 * s2 * s2 / (w * w * w);
    };
    return integrate(integrand, 0.0, kHalfPi, opts).value;
}

double h(const ShapeParam& k, const Quadrature& opts) {
    return g(k, opts) / f(k, opts);
}

double phi(const ShapeParam& k, const Quadrature& opts) {
    const double hk = h(k, opts);
    return k.k() * hk * hk;
}

ShapeParam solve_phi(double target, const Quadrature& opts) {
    if (!(target > 0.0) || !(target < 1.0))
        throw DomainError("solve_phi: target must lie in (0,1)");
    // phi is strictly increasing in k, hence strictly decreasing in
    // log(1-k) read backwards; solve in x = log(1-k) where the whole
    // range [0,1) stays well conditioned.
    auto residual = [&](double x) {
        return phi(ShapeParam::from_log_complement(x), opts) - target;
    };
    const double x_lo = std::log(1e-290); // phi here is essentially 1
    RootOptions ropts;
    ropts.f_tol = 5e-13;
    ropts.x_tol_rel = 1e-15;
    const double x = find_root(residual, x_lo, 0.0, ropts);
    return ShapeParam::from_log_complement(x);
}

} // namespace helium::specfun
