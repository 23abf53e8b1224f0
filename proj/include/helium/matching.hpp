#pragma once

#include "helium/freefall.hpp"
#include "helium/levicivita.hpp"
#include "helium/quadrature.hpp"
#include "helium/specfun.hpp"

#include <string>
#include <vector>

namespace helium::matching {

/// Period-1 collinear orbit for a coprime pair (n1, n2): two reflected
/// free-fall trains sharing the matched mean field m, sampled on a common
/// uniform grid together with their regularized lifts.
struct OrbitPair {
    int n1 = 1, n2 = 1;
    std::string note; // provenance, e.g. when the input pair was reduced

    double sigma1 = 0.0, sigma2 = 0.0; // half-periods 1/(2 n_i)
    double m = 0.0;                    // matched mean field
    freefall::ArcHeader arc1, arc2;
    double qbar1 = 0.0, qbar2 = 0.0;

    int grid_n = 0;                      // shared uniform grid size
    std::vector<double> q1, q2;          // positions on t_l = l/grid_n
    std::vector<double> qdot1, qdot2;    // velocities, NaN at collision samples
    levicivita::LoopSignal z1, z2;       // lifts on tau_j = j/grid_n
    std::vector<int> zero_index1, zero_index2; // grid indices of the collisions

    // exact per-trajectory integrals over one unit period (arc quadrature)
    double kinetic1 = 0.0, kinetic2 = 0.0; // int qdot_i^2 dt
    double invq1 = 0.0, invq2 = 0.0;       // int dt/q_i
};

/// Unique m > 0 with f_{sigma1}(m) + f_{sigma2}(m) = 1, located by bracket
/// expansion and monotone refinement; residual at most 1e-11.
double solve_mean_field(double sigma1, double sigma2, const Quadrature& opts = {});

/// Matching function K(r,k) = k - 1/(2 (r h(r^2 k) + h(k))^2), defined for
/// r^2 k < 1; strictly increasing in k with K(r,0) = -8/(9 (r+1)^2).
double big_K(double r, const specfun::ShapeParam& k, const Quadrature& opts = {});

/// Unique root k = kappa(r) of K(r, .); satisfies kappa(1/r) = r^2 kappa(r)
/// and lies in [1/(2(r+1)^2), 8/9].
specfun::ShapeParam kappa(double r, const Quadrature& opts = {});

/// Half-period ratio realized by the height ratio r:
/// Psi(r) = r^{3/2} f(r^2 kappa(r)) / f(kappa(r)), a strictly increasing
/// bijection of the positive reals with Psi(1) = 1.
double psi(double r, const Quadrature& opts = {});

/// Inverse of Psi: |Psi(r) - rho| <= 1e-10 max(1, rho).
double psi_inverse(double rho, const Quadrature& opts = {});

/// Default shared grid: 2048 n1 n2, capped at 2^20 rounded down to a
/// multiple of 2 n1 n2 so that every collision lands on a grid point.
int default_grid(int n1, int n2);

/// Build the orbit for (n1, n2). Non-coprime input is reduced by the gcd
/// (the orbit is the same curve) and annotated in `note`. grid_n = 0 picks
/// the default; other values are rounded up to a multiple of 2 n1 n2.
OrbitPair build_orbit(int n1, int n2, int grid_n = 0, const Quadrature& opts = {});

} // namespace helium::matching
