#include "helium/functional.hpp"
#include "helium/errors.hpp"
#include "helium/fourier.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace helium::functional {

using levicivita::norm_sq;

namespace {

double inner(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc / static_cast<double>(a.size());
}

void check_pair(const LoopPair& pair) {
    if (pair.z1.values.empty() || pair.z1.size() != pair.z2.size())
        throw DomainError("loop pair: signals must share a common grid size");
}

} // namespace

PairNorms pair_norms(const LoopPair& pair) {
    check_pair(pair);
    PairNorms n;
    n.n1 = norm_sq(pair.z1.values);
    n.n2 = norm_sq(pair.z2.values);
    if (n.n1 <= 0.0 || n.n2 <= 0.0)
        throw DomainError("loop pair: both signals must have positive norm");
    n.d1 = norm_sq(loop_derivative(pair.z1));
    n.d2 = norm_sq(loop_derivative(pair.z2));
    std::vector<double> sq(pair.z1.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = pair.z1.values[i] * pair.z1.values[i];
    n.s1 = norm_sq(sq);
    for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = pair.z2.values[i] * pair.z2.values[i];
    n.s2 = norm_sq(sq);
    n.D = n.s1 * n.n2 + n.s2 * n.n1;
    return n;
}

double action_Q(const LoopSignal& z) {
    const double n = norm_sq(z.values);
    if (n <= 0.0)
        throw DomainError("action_Q: signal has zero norm");
    const double d = norm_sq(loop_derivative(z));
    return 2.0 * n * d + 2.0 / n;
}

double action_A(const LoopPair& pair) {
    const PairNorms n = pair_norms(pair);
    return -n.n1 * n.n2 / n.D;
}

double action_B(const LoopPair& pair) {
    return action_Q(pair.z1) + action_Q(pair.z2) + action_A(pair);
}

namespace {

// Per-trajectory integrals through the regularized side: the plain sample
// mean of the cusped q converges only like h^{5/3}, while the lift norms
// are spectrally accurate.
struct TrajectorySide {
    double kinetic; // int qdot^2 dt = 4 ||z||^2 ||z'||^2
    double invq;    // int dt/q
    double mean;    // qbar = ||z^2||^2 / ||z||^2
};

TrajectorySide trajectory_side(const CollisionTrajectory& q) {
    TrajectorySide side;
    side.invq = levicivita::inverse_q_integral(q);
    const LoopSignal z = levicivita::lift_lc(q);
    const double nz = norm_sq(z.values);
    side.kinetic = 4.0 * nz * norm_sq(loop_derivative(z));
    std::vector<double> sq(z.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = z.values[i] * z.values[i];
    side.mean = norm_sq(sq) / nz;
    return side;
}

} // namespace

double action_S(const CollisionTrajectory& q1, const CollisionTrajectory& q2) {
    const TrajectorySide s1 = trajectory_side(q1);
    const TrajectorySide s2 = trajectory_side(q2);
    return 0.5 * s1.kinetic + 2.0 * s1.invq + 0.5 * s2.kinetic + 2.0 * s2.invq -
           1.0 / (s1.mean + s2.mean);
}

GradPair grad_B(const LoopPair& pair) {
    const PairNorms n = pair_norms(pair);
    const std::vector<double> dd1 = loop_second_derivative(pair.z1);
    const std::vector<double> dd2 = loop_second_derivative(pair.z2);
    const double D2 = n.D * n.D;

    GradPair g;
    const std::size_t N = pair.z1.values.size();
    g.g1.resize(N);
    g.g2.resize(N);
    const double lin1 = 4.0 * n.d1 - 4.0 / (n.n1 * n.n1) - 2.0 * n.n2 * n.n2 * n.s1 / D2;
    const double lin2 = 4.0 * n.d2 - 4.0 / (n.n2 * n.n2) - 2.0 * n.n1 * n.n1 * n.s2 / D2;
    const double cub1 = 4.0 * n.n1 * n.n2 * n.n2 / D2;
    const double cub2 = 4.0 * n.n2 * n.n1 * n.n1 / D2;
    for (std::size_t i = 0; i < N; ++i) {
        const double v1 = pair.z1.values[i], v2 = pair.z2.values[i];
        g.g1[i] = lin1 * v1 - 4.0 * n.n1 * dd1[i] + cub1 * v1 * v1 * v1;
        g.g2[i] = lin2 * v2 - 4.0 * n.n2 * dd2[i] + cub2 * v2 * v2 * v2;
    }
    for (std::size_t i = 0; i < N; ++i)
        g.sup = std::max({g.sup, std::fabs(g.g1[i]), std::fabs(g.g2[i])});
    g.l2 = std::sqrt(norm_sq(g.g1) + norm_sq(g.g2));
    return g;
}

CriticalConstants critical_constants(const LoopPair& pair) {
    const PairNorms n = pair_norms(pair);
    const double D2 = n.D * n.D;
    CriticalConstants c;
    c.a1 = n.d1 / n.n1 - 1.0 / (n.n1 * n.n1 * n.n1) -
           n.n2 * n.n2 * n.s1 / (2.0 * n.n1 * D2);
    c.a2 = n.d2 / n.n2 - 1.0 / (n.n2 * n.n2 * n.n2) -
           n.n1 * n.n1 * n.s2 / (2.0 * n.n2 * D2);
    c.b1 = n.n2 * n.n2 / D2;
    c.b2 = n.n1 * n.n1 / D2;
    return c;
}

std::pair<std::vector<double>, std::vector<double>> critical_residual(const LoopPair& pair) {
    const CriticalConstants c = critical_constants(pair);
    std::vector<double> r1 = loop_second_derivative(pair.z1);
    std::vector<double> r2 = loop_second_derivative(pair.z2);
    for (std::size_t i = 0; i < r1.size(); ++i) {
        const double v1 = pair.z1.values[i], v2 = pair.z2.values[i];
        r1[i] -= c.a1 * v1 + c.b1 * v1 * v1 * v1;
        r2[i] -= c.a2 * v2 + c.b2 * v2 * v2 * v2;
    }
    return {std::move(r1), std::move(r2)};
}

std::pair<double, double> q_side_constants(double kinetic1, double invq1, double qbar1,
                                           double kinetic2, double invq2, double qbar2) {
    const double ctx = (qbar1 + qbar2) * (qbar1 + qbar2);
    return {0.5 * kinetic1 - 2.0 * invq1 - qbar1 / ctx,
            0.5 * kinetic2 - 2.0 * invq2 - qbar2 / ctx};
}

std::pair<double, double> q_side_constants(const CollisionTrajectory& q1,
                                           const CollisionTrajectory& q2) {
    const TrajectorySide s1 = trajectory_side(q1);
    const TrajectorySide s2 = trajectory_side(q2);
    return q_side_constants(s1.kinetic, s1.invq, s1.mean, s2.kinetic, s2.invq, s2.mean);
}

std::pair<std::vector<double>, std::vector<double>>
legendre(const LoopPair& pair, const std::vector<double>& w1, const std::vector<double>& w2) {
    const double n1 = norm_sq(pair.z1.values), n2 = norm_sq(pair.z2.values);
    std::vector<double> e1(w1.size()), e2(w2.size());
    for (std::size_t i = 0; i < w1.size(); ++i)
        e1[i] = 4.0 * n1 * w1[i];
    for (std::size_t i = 0; i < w2.size(); ++i)
        e2[i] = 4.0 * n2 * w2[i];
    return {std::move(e1), std::move(e2)};
}

std::pair<std::vector<double>, std::vector<double>>
legendre_velocity(const LoopPair& pair, const std::vector<double>& eta1,
                  const std::vector<double>& eta2) {
    const double n1 = norm_sq(pair.z1.values), n2 = norm_sq(pair.z2.values);
    std::vector<double> w1(eta1.size()), w2(eta2.size());
    for (std::size_t i = 0; i < eta1.size(); ++i)
        w1[i] = eta1[i] / (4.0 * n1);
    for (std::size_t i = 0; i < eta2.size(); ++i)
        w2[i] = eta2[i] / (4.0 * n2);
    return {std::move(w1), std::move(w2)};
}

double hamiltonian(const LoopPair& pair, const std::vector<double>& eta1,
                   const std::vector<double>& eta2) {
    const PairNorms n = pair_norms(pair);
    return norm_sq(eta1) / (8.0 * n.n1) - 2.0 / n.n1 + norm_sq(eta2) / (8.0 * n.n2) -
           2.0 / n.n2 + n.n1 * n.n2 / n.D;
}

double hamiltonian_action(const LoopPair& pair, const std::vector<double>& eta1,
                          const std::vector<double>& eta2) {
    const std::vector<double> d1 = loop_derivative(pair.z1);
    const std::vector<double> d2 = loop_derivative(pair.z2);
    return inner(eta1, d1) + inner(eta2, d2) - hamiltonian(pair, eta1, eta2);
}

// ---------------------------------------------------------------------------
// Refinement: damped least-squares descent on the gradient. The search
// direction comes from a quasi-Newton solve of the critical-point residual
// r_i = z_i'' - a_i z_i - b_i z_i^3 with a Fourier-diagonal approximation
// of its linearization (d^2/dtau^2 - a_i - 3 b_i <z_i^2>); steps are only
// accepted when they reduce ||grad B||, with halving damping otherwise.

namespace {

// Spectral solve of (d^2/dtau^2 - shift) dz = r on the signal's cover,
// regularized away from the operator's near-null modes.
std::vector<double> diagonal_solve(const LoopSignal& proto, const std::vector<double>& r,
                                   double shift, double reg) {
    const bool twisted = proto.parity == levicivita::Parity::Twisted;
    const double period = twisted ? 2.0 : 1.0;
    std::vector<double> rc = r;
    if (twisted) {
        rc.resize(2 * r.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            rc[i + r.size()] = -r[i];
    }
    auto coeff = fourier::rfft(rc);
    const double two_pi = 6.283185307179586476925286766559005768;
    for (std::size_t j = 0; j < coeff.size(); ++j) {
        const double w = two_pi * static_cast<double>(j) / period;
        double denom = -(w * w) - shift;
        if (std::fabs(denom) < reg)
            denom = denom < 0.0 ? -reg : reg;
        coeff[j] /= denom;
    }
    auto out = fourier::irfft(coeff, static_cast<int>(rc.size()));
    out.resize(r.size());
    return out;
}

double mean_sq_value(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v)
        acc += x * x;
    return acc / static_cast<double>(v.size());
}

// Solve (d^2/dtau^2 - a - 3 b z^2(tau)) dz = r by CG preconditioned with the
// Fourier-diagonal solve above. The operator is symmetric; a handful of
// iterations turns the outer loop into an honest quasi-Newton method.
std::vector<double> linearized_solve(const LoopSignal& z, const std::vector<double>& r,
                                     double a, double b) {
    const double m2 = 3.0 * b * mean_sq_value(z.values);
    const double reg = 0.3 * std::fabs(a) + 1e-6;
    auto precond = [&](const std::vector<double>& v) {
        return diagonal_solve(z, v, a + m2, reg);
    };
    auto apply = [&](const std::vector<double>& v) {
        LoopSignal tmp = z;
        tmp.values = v;
        std::vector<double> out = loop_second_derivative(tmp);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] -= (a + 3.0 * b * z.values[i] * z.values[i]) * v[i];
        return out;
    };
    std::vector<double> x(r.size(), 0.0);
    std::vector<double> res = r; // residual of L x = r
    std::vector<double> zv = precond(res);
    std::vector<double> p = zv;
    double rz = inner(res, zv);
    const double r0 = std::sqrt(norm_sq(r));
    for (int it = 0; it < 12; ++it) {
        const std::vector<double> Lp = apply(p);
        const double pLp = inner(p, Lp);
        if (!std::isfinite(pLp) || std::fabs(pLp) < 1e-300)
            break;
        const double alpha = rz / pLp;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            res[i] -= alpha * Lp[i];
        }
        if (std::sqrt(norm_sq(res)) < 1e-8 * r0)
            break;
        zv = precond(res);
        const double rz_new = inner(res, zv);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = zv[i] + beta * p[i];
    }
    return x;
}

} // namespace

RefineResult refine_critical(const LoopPair& pair, int max_iters, double tol) {
    RefineResult res;
    res.pair = pair;
    res.grad_l2_initial = grad_B(pair).l2;
    double gnorm = res.grad_l2_initial;
    if (tol <= 0.0)
        tol = 1e-2 * res.grad_l2_initial;

    LoopPair cur = pair;
    int it = 0;
    for (; it < max_iters && gnorm > tol; ++it) {
        const CriticalConstants c = critical_constants(cur);
        auto resid = critical_residual(cur);
        std::vector<double> d1 = linearized_solve(cur.z1, resid.first, c.a1, c.b1);
        std::vector<double> d2 = linearized_solve(cur.z2, resid.second, c.a2, c.b2);

        bool accepted = false;
        double damp = 1.0;
        for (int tries = 0; tries < 10; ++tries) {
            LoopPair trial = cur;
            for (std::size_t i = 0; i < trial.z1.values.size(); ++i) {
                trial.z1.values[i] -= damp * d1[i];
                trial.z2.values[i] -= damp * d2[i];
            }
            double gn;
            try {
                gn = grad_B(trial).l2;
            } catch (const DomainError&) {
                damp *= 0.5;
                continue;
            }
            if (gn < gnorm) {
                cur = std::move(trial);
                gnorm = gn;
                accepted = true;
                break;
            }
            damp *= 0.5;
        }
        if (!accepted)
            break;
    }
    res.iterations = it;
    res.grad_l2_final = gnorm;
    res.converged = gnorm <= tol;
    res.pair = std::move(cur);
    return res;
}

} // namespace helium::functional
