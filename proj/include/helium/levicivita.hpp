#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace helium::levicivita {

enum class Parity { Periodic, Twisted };

/// Real signal sampled uniformly on one fundamental domain [0,1).
/// Periodic signals satisfy z(tau+1) = z(tau); twisted signals live on the
/// double cover with z(tau+1) = -z(tau), of which only [0,1) is stored.
struct LoopSignal {
    Parity parity = Parity::Periodic;
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
};

/// Nonnegative trajectory sampled uniformly on [0,1). Velocities are
/// optional (empty vector) and may hold NaN at samples too close to a
/// collision for the velocity to be representable.
struct CollisionTrajectory {
    std::vector<double> values;
    std::vector<double> velocities;

    int size() const { return static_cast<int>(values.size()); }
};

// -- loop utilities ---------------------------------------------------------

/// Samples on the double cover [0,2): the identity for periodic signals,
/// [v; -v] for twisted ones.
std::vector<double> double_cover(const LoopSignal& z);

/// Spectral first/second derivative on the fundamental domain (twisted
/// signals are differentiated on their periodic double cover).
std::vector<double> loop_derivative(const LoopSignal& z);
std::vector<double> loop_second_derivative(const LoopSignal& z);

/// Trigonometric evaluation of z and z' at arbitrary tau.
std::function<double(double)> loop_interpolant(const LoopSignal& z);
std::function<double(double)> loop_derivative_interpolant(const LoopSignal& z);

/// Mean of v^2 over the fundamental domain (the L^2 norm squared; for
/// twisted signals this equals the half-weighted double-cover integral).
double norm_sq(const std::vector<double>& values);

/// Sign-change zeros of z in [0,1), positions by linear interpolation.
/// Throws RegularityError on adjacent zero samples or an all-zero signal.
std::vector<double> zeros_of(const LoopSignal& z);

/// Zeros of q: samples below 1e-12 * max(q), refined through the local
/// q^{3/2}-linear collision profile when the zero falls between samples.
std::vector<double> zeros_of(const CollisionTrajectory& q);

// -- time maps --------------------------------------------------------------

/// Monotone reparameterization of [0,1] with fixed endpoints.
class MonotoneTimeMap {
public:
    MonotoneTimeMap() = default;
    explicit MonotoneTimeMap(std::function<double(double)> fwd) : fwd_(std::move(fwd)) {}
    double operator()(double x) const { return fwd_(x); }
    /// Inverse by monotone bracketing (bisection + secant refinement).
    double inverse(double y) const;

private:
    std::function<double(double)> fwd_;
};

/// t_z(tau) = int_0^tau z^2 / ||z||^2: the regularized-to-physical time map.
MonotoneTimeMap time_map_tz(const LoopSignal& z);

/// tau_q(t) = int_0^t ds/q normalized by the full singular integral.
/// The 1/q integral is finite for transverse collisions; near each zero it
/// is evaluated through the local collision model, in between by high-order
/// composite quadrature on the samples.
MonotoneTimeMap time_map_tauq(const CollisionTrajectory& q);

/// The singular integral int_0^1 dt/q(t) itself.
double inverse_q_integral(const CollisionTrajectory& q);

// -- the transformation -----------------------------------------------------

/// q(t) = z(tau_z(t))^2 resampled on a uniform t-grid (out_n = input size
/// when 0). Velocities are filled from qdot = 2||z||^2 z'/z away from zeros.
CollisionTrajectory forward_lc(const LoopSignal& z, int out_n = 0);

/// Inverse transformation: |z(tau)| = sqrt(q(t_q(tau))) with sign switching
/// at every zero and the segment containing tau = 0 carrying global_sign.
/// The returned parity is Periodic for an even number of zeros, Twisted for
/// an odd number.
LoopSignal lift_lc(const CollisionTrajectory& q, int global_sign = +1, int out_n = 0);

// -- energies ---------------------------------------------------------------

struct EnergyTrace {
    std::vector<double> values; // NaN outside the evaluated window
    double min = 0.0, max = 0.0;
    double range() const { return max - min; }
};

/// E_i(t) = qdot^2/2 - 2/q - q/(qbar_sum)^2 at samples with
/// q >= interior_fraction * max(q) and a finite velocity.
EnergyTrace energy_q(const CollisionTrajectory& q, double qbar_sum,
                     double interior_fraction = 0.05);

struct ZEnergy {
    std::vector<double> trace; // Kepler energy (2||z||^4 z'^2 - 2)/z^2, NaN near zeros
    std::vector<double> mu;    // collision strengths 2||z||^4 z'(tau*)^2 per zero
    double norm_sq = 0.0;      // ||z||^2
};

/// Kepler energy trace of z (charge 2) plus the per-zero collision strength
/// reported in place of the indeterminate ratio at the zeros themselves.
ZEnergy energy_z(const LoopSignal& z, double interior_fraction = 1e-6);

} // namespace helium::levicivita
