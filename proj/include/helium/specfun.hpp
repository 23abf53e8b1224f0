#pragma once

#include "helium/quadrature.hpp"

namespace helium::specfun {

/// Dimensionless fall-shape variable k in [0,1).
///
/// Near the degenerate limit k -> 1 the complement 1-k can be far below
/// machine epsilon while remaining physically meaningful (large mean
/// fields drive 1-k toward 1e-300 and beyond), so the complement and its
/// logarithm are carried explicitly instead of being recovered from k.
class ShapeParam {
public:
    explicit ShapeParam(double k);
    static ShapeParam from_complement(double one_minus_k);
    static ShapeParam from_log_complement(double log_one_minus_k);

    double k() const { return k_; }
    /// 1 - k; may underflow to zero for extreme shapes (see log_complement).
    double complement() const { return delta_; }
    /// log(1 - k); always finite.
    double log_complement() const { return log_delta_; }

private:
    ShapeParam() = default;
    double k_ = 0.0;
    double delta_ = 1.0;
    double log_delta_ = 0.0;
};

/// Time-of-flight integral: int_0^1 sqrt(u) / sqrt((1-u)(1-ku)) du.
/// Positive, strictly increasing, divergent like log(1/(1-k)) as k -> 1.
double f(const ShapeParam& k, const Quadrature& opts = {});

/// Mean-value integral: int_0^1 u^{3/2} / sqrt((1-u)(1-ku)) du.
/// Satisfies 0 < g(k) < f(k).
double g(const ShapeParam& k, const Quadrature& opts = {});

/// Derivative of f: (1/2) int_0^1 u^{3/2} / sqrt((1-u)(1-ku)^3) du.
double f_prime(const ShapeParam& k, const Quadrature& opts = {});

/// Derivative of g: (1/2) int_0^1 u^{5/2} / sqrt((1-u)(1-ku)^3) du.
double g_prime(const ShapeParam& k, const Quadrature& opts = {});

/// Ratio h(k) = g(k)/f(k); increases from 3/4 at k=0 toward 1 as k -> 1.
double h(const ShapeParam& k, const Quadrature& opts = {});

/// phi(k) = k * h(k)^2; increases from 0 toward 1 on [0,1).
double phi(const ShapeParam& k, const Quadrature& opts = {});

/// Unique k in (0,1) with phi(k) = target, for target in (0,1).
/// Residual |phi(k) - target| <= 1e-12.
ShapeParam solve_phi(double target, const Quadrature& opts = {});

/// Complete elliptic integrals K(m), E(m) with parameter m = 1 - one_minus_m,
/// computed by the arithmetic-geometric mean. Serves as the closed-form
/// route for f and g: f = 2(K-E)/k, g = 2((2+k)K - 2(1+k)E)/(3k^2).
struct CompleteElliptic {
    double K;
    double E;
};
CompleteElliptic complete_elliptic(double one_minus_m);

} // namespace helium::specfun
