#pragma once

#include "helium/quadrature.hpp"
#include "helium/specfun.hpp"

#include <memory>
#include <vector>

namespace helium::freefall {

/// One monotone fall arc q'' = -2/q^2 + m on [0, sigma] with q(0) = q0,
/// qdot(0) = 0, q(sigma) = 0, described through its shape parameter.
struct ArcHeader {
    double m = 0.0;
    double sigma = 0.0;
    double q0 = 0.0;
    double energy = 0.0; // -2/q0 - m*q0, conserved along the arc
    specfun::ShapeParam k{0.0};
};

struct ArcSample {
    double t;
    double q;
    double qdot; // NaN below the velocity floor (q <= 1e-8 q0)
};

struct FreeFallArc {
    ArcHeader header;
    std::vector<ArcSample> samples;
};

/// Velocity samples are omitted once q falls below this fraction of q0.
inline constexpr double kVelocityFloor = 1e-8;

/// sigma = (q0^{3/2}/2) f(m q0^2 / 2). Requires m >= 0 and, for m > 0,
/// q0 < sqrt(2/m) so that the arc actually reaches zero.
double time_of_flight(double m, double q0, const Quadrature& opts = {});

ArcHeader make_header(double m, double q0, const Quadrature& opts = {});

/// Unique q0 in (0, sqrt(2/m)) whose fall time equals sigma. The solve runs
/// in log(1-k), which stays well conditioned even when k is within 1e-300
/// of the degenerate limit (large m at fixed sigma).
ArcHeader solve_q0(double m, double sigma, const Quadrature& opts = {});

/// f_sigma(m) = sqrt(m) * mean(q_{m,sigma}) = sqrt(2k) h(k); increases from 0
/// toward sqrt(2) as m -> infinity.
double f_sigma(double m, double sigma, const Quadrature& opts = {});

/// Mean value of the arc: q0 * h(k).
double mean_value(const ArcHeader& header, const Quadrature& opts = {});

/// Dense arc samples, uniform in the angle theta defined by q = q0 sin^2(theta).
/// The time of each sample comes from the same quadrature that defines sigma;
/// the singular ODE is never stepped through the collision.
FreeFallArc sample_arc(double m, double sigma, int n_samples, const Quadrature& opts = {});

/// Quadrature-backed evaluator for a single arc. Positions, velocities and
/// the time maps in both the physical and the regularized parameterization
/// are obtained from cumulative theta-integrals, so every query is accurate
/// to the quadrature tolerance regardless of how close it is to the
/// collision.
class ArcModel {
public:
    ArcModel(const ArcHeader& header, const Quadrature& opts = {});
    ~ArcModel();
    ArcModel(ArcModel&&) noexcept;
    ArcModel& operator=(ArcModel&&) noexcept;

    const ArcHeader& header() const;

    double time_from_theta(double theta) const; // t in [0, sigma], theta in [0, pi/2]
    double theta_from_time(double t) const;
    double q_from_theta(double theta) const;
    double qdot_from_theta(double theta) const; // fall branch, <= 0

    /// Total of dt/q over the arc (finite despite the endpoint collision).
    double kepler_time_total() const;
    /// theta at the given fraction of the arc's dt/q integral
    /// (fraction 0 = arc start at q0, fraction 1 = collision).
    double theta_from_tau_fraction(double frac) const;

    /// Total of qdot^2 dt over the arc.
    double kinetic_total() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace helium::freefall
