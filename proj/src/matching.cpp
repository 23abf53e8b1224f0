#include "helium/matching.hpp"
#include "helium/errors.hpp"
#include "helium/roots.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace helium::matching {

double solve_mean_field(double sigma1, double sigma2, const Quadrature& opts) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw DomainError("solve_mean_field: half-periods must be positive");
    auto fsum = [&](double m) {
        return freefall::f_sigma(m, sigma1, opts) + freefall::f_sigma(m, sigma2, opts);
    };
    // f_sigma1 + f_sigma2 increases from 0 toward 2 sqrt(2) > 1, so a root
    // of fsum = 1 always exists; expand the upper end until it is bracketed.
    double lo = 1e-8, hi = 1.0;
    while (fsum(hi) < 1.0) {
        hi *= 10.0;
        if (hi > 1e30)
            throw AccuracyError("solve_mean_field: failed to bracket the mean field");
    }
    while (fsum(lo) >= 1.0) {
        lo *= 1e-2;
        if (lo < 1e-300)
            throw AccuracyError("solve_mean_field: failed to bracket the mean field");
    }
    RootOptions ropts;
    ropts.f_tol = 2e-12;
    ropts.x_tol_rel = 1e-15;
    ropts.max_iter = 300;
    return find_root([&](double m) { return fsum(m) - 1.0; }, lo, hi, ropts);
}

double big_K(double r, const specfun::ShapeParam& k, const Quadrature& opts) {
    if (!(r > 0.0))
        throw DomainError("big_K: r must be positive");
    const double r2k = r * r * k.k();
    if (r2k >= 1.0)
        throw DomainError("big_K: r^2 k must be below 1");
    const double hk = specfun::h(k, opts);
    const double hrk = specfun::h(specfun::ShapeParam(r2k), opts);
    const double s = r * hrk + hk;
    return k.k() - 1.0 / (2.0 * s * s);
}

specfun::ShapeParam kappa(double r, const Quadrature& opts) {
    if (!(r > 0.0))
        throw DomainError("kappa: r must be positive");
    const double k_max = std::min(1.0, 1.0 / (r * r));
    // A priori bracket from 3/4 <= h < 1:
    //   kappa = 1/(2 (r h(r^2 k) + h(k))^2) in (1/(2(r+1)^2), 8/(9 r^2)) and <= 8/9.
    double lo = 0.5 / ((r + 1.0) * (r + 1.0)) * (1.0 - 1e-9);
    double hi = std::min({8.0 / 9.0 * (r > 1.0 ? 1.0 / (r * r) : 1.0) * (1.0 + 1e-9),
                          k_max * (1.0 - 1e-12)});
    auto K = [&](double k) { return big_K(r, specfun::ShapeParam(k), opts); };
    if (!(K(lo) <= 0.0) || !(K(hi) >= 0.0)) { // numerical safety net
        lo = 0.0;
        hi = k_max * (1.0 - 1e-12);
    }
    // stop on the bracket width, not on |K|: kappa itself scales like 1/r^2,
    // so an absolute residual floor would destroy the relative accuracy
    RootOptions ropts;
    ropts.f_tol = 0.0;
    ropts.x_tol_rel = 1e-15;
    ropts.max_iter = 300;
    return specfun::ShapeParam(find_root([&](double k) { return K(k); }, lo, hi, ropts));
}

double psi(double r, const Quadrature& opts) {
    const specfun::ShapeParam k = kappa(r, opts);
    const specfun::ShapeParam rk(r * r * k.k());
    return std::pow(r, 1.5) * specfun::f(rk, opts) / specfun::f(k, opts);
}

double psi_inverse(double rho, const Quadrature& opts) {
    if (!(rho > 0.0))
        throw DomainError("psi_inverse: ratio must be positive");
    if (rho == 1.0)
        return 1.0;
    double lo = 1.0, hi = 1.0;
    if (rho > 1.0) {
        while (psi(hi, opts) < rho) {
            hi *= 2.0;
            if (hi > 1e12)
                throw AccuracyError("psi_inverse: failed to bracket");
        }
    } else {
        while (psi(lo, opts) > rho) {
            lo *= 0.5;
            if (lo < 1e-12)
                throw AccuracyError("psi_inverse: failed to bracket");
        }
    }
    RootOptions ropts;
    ropts.f_tol = 1e-11 * std::max(1.0, rho);
    ropts.x_tol_rel = 1e-14;
    return find_root([&](double r) { return psi(r, opts) - rho; }, lo, hi, ropts);
}

int default_grid(int n1, int n2) {
    const long long block = 2LL * n1 * n2;
    long long n = 2048LL * n1 * n2;
    const long long cap = 1LL << 20;
    if (n > cap)
        n = (cap / block) * block;
    return static_cast<int>(n);
}

namespace {

// Fill positions/velocities/lift for one electron of the pair.
void fill_trajectory(const freefall::ArcModel& model, int n_arcs /* = n_i */, int N,
                     std::vector<double>& q, std::vector<double>& qdot,
                     levicivita::LoopSignal& z, std::vector<int>& zero_idx) {
    const freefall::ArcHeader& hdr = model.header();
    const int half = N / (2 * n_arcs); // samples per half-arc
    const double q_floor = freefall::kVelocityFloor * hdr.q0;

    // positions and velocities on the first fall arc [0, sigma]
    std::vector<double> qa(static_cast<std::size_t>(half) + 1);
    std::vector<double> va(static_cast<std::size_t>(half) + 1);
    for (int l = 0; l <= half; ++l) {
        if (l == 0) {
            qa[0] = hdr.q0;
            va[0] = 0.0;
            continue;
        }
        if (l == half) {
            qa[static_cast<std::size_t>(half)] = 0.0;
            va[static_cast<std::size_t>(half)] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double t = static_cast<double>(l) / N;
        const double theta = model.theta_from_time(t);
        qa[static_cast<std::size_t>(l)] = model.q_from_theta(theta);
        va[static_cast<std::size_t>(l)] = qa[static_cast<std::size_t>(l)] > q_floor
                                              ? model.qdot_from_theta(theta)
                                              : std::numeric_limits<double>::quiet_NaN();
    }

    // lift on the first fall arc: tau fractions j/half of the arc's dt/q mass
    std::vector<double> za(static_cast<std::size_t>(half) + 1);
    const double zscale = std::sqrt(hdr.q0);
    for (int j = 0; j <= half; ++j) {
        if (j == 0) {
            za[0] = zscale;
            continue;
        }
        if (j == half) {
            za[static_cast<std::size_t>(half)] = 0.0;
            continue;
        }
        const double theta = model.theta_from_tau_fraction(static_cast<double>(j) / half);
        za[static_cast<std::size_t>(j)] = zscale * std::sin(theta);
    }

    // reflect and tile: q mirrors evenly about every arc endpoint, the lift
    // mirrors with a sign switch at every collision
    q.assign(static_cast<std::size_t>(N), 0.0);
    qdot.assign(static_cast<std::size_t>(N), 0.0);
    z.parity = (n_arcs % 2 == 1) ? levicivita::Parity::Twisted
                                 : levicivita::Parity::Periodic;
    z.values.assign(static_cast<std::size_t>(N), 0.0);
    zero_idx.clear();
    const int block = 2 * half; // one full fall+rise block: period 1/n_arcs
    for (int b = 0; b < n_arcs; ++b) {
        const double bsign = (b % 2 == 0) ? 1.0 : -1.0;
        for (int j = 0; j < block; ++j) {
            const int l = b * block + j;
            const int mirror = j <= half ? j : block - j;
            q[static_cast<std::size_t>(l)] = qa[static_cast<std::size_t>(mirror)];
            qdot[static_cast<std::size_t>(l)] =
                j <= half ? va[static_cast<std::size_t>(mirror)]
                          : -va[static_cast<std::size_t>(mirror)];
            const double zval = za[static_cast<std::size_t>(mirror)];
            z.values[static_cast<std::size_t>(l)] =
                bsign * (j <= half ? zval : -zval);
        }
        zero_idx.push_back(b * block + half);
    }
}

} // namespace

OrbitPair build_orbit(int n1, int n2, int grid_n, const Quadrature& opts) {
    if (n1 < 1 || n2 < 1)
        throw std::invalid_argument("build_orbit: n1 and n2 must be positive integers");
    OrbitPair orbit;
    const int g = std::gcd(n1, n2);
    if (g > 1) {
        orbit.note = "reduced from (" + std::to_string(n1) + "," + std::to_string(n2) +
                     ") by gcd " + std::to_string(g);
        n1 /= g;
        n2 /= g;
    }
    orbit.n1 = n1;
    orbit.n2 = n2;
    orbit.sigma1 = 0.5 / n1;
    orbit.sigma2 = 0.5 / n2;
    orbit.m = solve_mean_field(orbit.sigma1, orbit.sigma2, opts);
    orbit.arc1 = freefall::solve_q0(orbit.m, orbit.sigma1, opts);
    orbit.arc2 = freefall::solve_q0(orbit.m, orbit.sigma2, opts);
    orbit.qbar1 = freefall::mean_value(orbit.arc1, opts);
    orbit.qbar2 = freefall::mean_value(orbit.arc2, opts);

    const int block = 2 * n1 * n2;
    if (grid_n <= 0)
        grid_n = default_grid(n1, n2);
    else
        grid_n = ((grid_n + block - 1) / block) * block;
    if (grid_n < 2 * block)
        grid_n = 2 * block;
    orbit.grid_n = grid_n;

    freefall::ArcModel model1(orbit.arc1, opts);
    freefall::ArcModel model2(orbit.arc2, opts);
    fill_trajectory(model1, n1, grid_n, orbit.q1, orbit.qdot1, orbit.z1, orbit.zero_index1);
    fill_trajectory(model2, n2, grid_n, orbit.q2, orbit.qdot2, orbit.z2, orbit.zero_index2);

    orbit.kinetic1 = 2.0 * n1 * model1.kinetic_total();
    orbit.kinetic2 = 2.0 * n2 * model2.kinetic_total();
    orbit.invq1 = 2.0 * n1 * model1.kepler_time_total();
    orbit.invq2 = 2.0 * n2 * model2.kepler_time_total();
    return orbit;
}

} // namespace helium::matching
