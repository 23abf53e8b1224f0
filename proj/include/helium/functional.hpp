#pragma once

#include "helium/levicivita.hpp"

#include <utility>
#include <vector>

namespace helium::matching {
struct OrbitPair;
}

namespace helium::functional {

using levicivita::CollisionTrajectory;
using levicivita::LoopSignal;

/// Pair of loop signals on a common grid size together with the cached
/// norms entering every functional: ||z_i||^2, ||z_i'||^2, ||z_i^2||^2 and
/// the interaction denominator D.
struct LoopPair {
    LoopSignal z1, z2;
};

struct PairNorms {
    double n1 = 0.0, n2 = 0.0; // ||z_i||^2
    double d1 = 0.0, d2 = 0.0; // ||z_i'||^2
    double s1 = 0.0, s2 = 0.0; // ||z_i^2||^2
    double D = 0.0;            // s1 n2 + s2 n1
};

PairNorms pair_norms(const LoopPair& pair);

/// Q(z) = 2 ||z||^2 ||z'||^2 + 2 / ||z||^2.
double action_Q(const LoopSignal& z);

/// A(z1,z2) = - n1 n2 / D; equals -1/(qbar1 + qbar2) under the forward map.
double action_A(const LoopPair& pair);

/// B(z1,z2) = Q(z1) + Q(z2) + A(z1,z2).
double action_B(const LoopPair& pair);

/// Unregularized action S(q1,q2) = sum_i (||qdot_i||^2/2 + int 2/q_i) -
/// 1/(qbar1+qbar2). The singular pieces are evaluated through the
/// regularized side (lift norms and the singular-aware 1/q integral).
double action_S(const CollisionTrajectory& q1, const CollisionTrajectory& q2);

struct GradPair {
    std::vector<double> g1, g2;
    double sup = 0.0; // max |g|
    double l2 = 0.0;  // sqrt(||g1||^2 + ||g2||^2), discrete L2 norms
};

/// Exact L2 gradient of the discrete B with spectral derivatives:
/// g_i = 4(||z_i'||^2 z_i - ||z_i||^2 z_i'' - z_i/||z_i||^4)
///       - 2 (n_j^2 s_i / D^2) z_i + 4 (n_i n_j^2 / D^2) z_i^3.
GradPair grad_B(const LoopPair& pair);

struct CriticalConstants {
    double a1 = 0.0, a2 = 0.0; // z_i'' = a_i z_i + b_i z_i^3 at critical points
    double b1 = 0.0, b2 = 0.0;
};

CriticalConstants critical_constants(const LoopPair& pair);

/// Residual fields z_i'' - a_i z_i - b_i z_i^3 (small at critical points).
std::pair<std::vector<double>, std::vector<double>> critical_residual(const LoopPair& pair);

/// q-side ODE constants c_i = ||qdot_i||^2/2 - int 2/q_i - qbar_i/(qbar1+qbar2)^2
/// from precomputed trajectory integrals.
std::pair<double, double> q_side_constants(double kinetic1, double invq1, double qbar1,
                                           double kinetic2, double invq2, double qbar2);

/// Same constants computed from sampled trajectories via the regularized route.
std::pair<double, double> q_side_constants(const CollisionTrajectory& q1,
                                           const CollisionTrajectory& q2);

/// Legendre transform: eta_i = 4 ||z_i||^2 w_i and its inverse
/// w_i = eta_i / (4 ||z_i||^2).
std::pair<std::vector<double>, std::vector<double>>
legendre(const LoopPair& pair, const std::vector<double>& w1, const std::vector<double>& w2);

std::pair<std::vector<double>, std::vector<double>>
legendre_velocity(const LoopPair& pair, const std::vector<double>& eta1,
                  const std::vector<double>& eta2);

/// H(z,eta) = sum_i (||eta_i||^2/(8||z_i||^2) - 2/||z_i||^2) + n1 n2 / D.
double hamiltonian(const LoopPair& pair, const std::vector<double>& eta1,
                   const std::vector<double>& eta2);

/// A_H(z,eta) = <eta_1, z_1'> + <eta_2, z_2'> - H(z,eta); with eta from the
/// Legendre transform of z' this equals B(z) identically.
double hamiltonian_action(const LoopPair& pair, const std::vector<double>& eta1,
                          const std::vector<double>& eta2);

struct RefineResult {
    LoopPair pair;
    bool converged = false;
    double grad_l2_initial = 0.0;
    double grad_l2_final = 0.0;
    int iterations = 0;
};

/// Polish a near-critical pair by damped Gauss-Newton on ||grad B||^2 with
/// matrix-free Hessian products. Stops once the gradient L2 norm reaches
/// tol (or no further progress is possible); never throws on
/// non-convergence, the flag reports it.
RefineResult refine_critical(const LoopPair& pair, int max_iters = 30, double tol = 0.0);

/// Full diagnostics of an orbit candidate.
struct ActionReport {
    double Q1 = 0.0, Q2 = 0.0, A = 0.0, B = 0.0;
    double grad_sup = 0.0, grad_l2 = 0.0;
    double a1 = 0.0, a2 = 0.0, b1 = 0.0, b2 = 0.0;
    double c1 = 0.0, c2 = 0.0;
    std::vector<double> mu1, mu2; // collision strength per zero
    double energy_range1 = 0.0, energy_range2 = 0.0;
    double action_S = 0.0; // q-side action from the exact arc integrals
};

ActionReport build_report(const matching::OrbitPair& orbit);

} // namespace helium::functional
