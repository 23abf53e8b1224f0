#include "helium/functional.hpp"
#include "helium/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace helium::functional {

namespace {

// Energy trace of one electron along the regularized parameterization:
// E(tau_j) = (2||z||^4 z_j'^2 - 2)/z_j^2 - z_j^2 m, evaluated gridwise so
// the check is independent of the energy relation used to build the arcs.
double energy_range_tau(const levicivita::LoopSignal& z, double m,
                        double interior_fraction) {
    const double nz = levicivita::norm_sq(z.values);
    const std::vector<double> dz = levicivita::loop_derivative(z);
    double z2max = 0.0;
    for (double v : z.values)
        z2max = std::max(z2max, v * v);
    const double floor = interior_fraction * z2max;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < z.values.size(); ++j) {
        const double q = z.values[j] * z.values[j];
        if (q < floor)
            continue;
        const double e = (2.0 * nz * nz * dz[j] * dz[j] - 2.0) / q - q * m;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    return hi - lo;
}

std::vector<double> mu_at_zeros(const levicivita::LoopSignal& z,
                                const std::vector<int>& zero_idx) {
    const double nz = levicivita::norm_sq(z.values);
    const std::vector<double> dz = levicivita::loop_derivative(z);
    std::vector<double> mu;
    mu.reserve(zero_idx.size());
    for (int idx : zero_idx)
        mu.push_back(2.0 * nz * nz * dz[static_cast<std::size_t>(idx)] *
                     dz[static_cast<std::size_t>(idx)]);
    return mu;
}

} // namespace

ActionReport build_report(const matching::OrbitPair& orbit) {
    ActionReport rep;
    LoopPair pair{orbit.z1, orbit.z2};
    rep.Q1 = action_Q(pair.z1);
    rep.Q2 = action_Q(pair.z2);
    rep.A = action_A(pair);
    rep.B = rep.Q1 + rep.Q2 + rep.A;

    const GradPair g = grad_B(pair);
    rep.grad_sup = g.sup;
    rep.grad_l2 = g.l2;

    const CriticalConstants cc = critical_constants(pair);
    rep.a1 = cc.a1;
    rep.a2 = cc.a2;
    rep.b1 = cc.b1;
    rep.b2 = cc.b2;

    const auto cs = q_side_constants(orbit.kinetic1, orbit.invq1, orbit.qbar1,
                                     orbit.kinetic2, orbit.invq2, orbit.qbar2);
    rep.c1 = cs.first;
    rep.c2 = cs.second;

    rep.mu1 = mu_at_zeros(orbit.z1, orbit.zero_index1);
    rep.mu2 = mu_at_zeros(orbit.z2, orbit.zero_index2);

    rep.energy_range1 = energy_range_tau(orbit.z1, orbit.m, 0.1);
    rep.energy_range2 = energy_range_tau(orbit.z2, orbit.m, 0.1);

    rep.action_S = 0.5 * (orbit.kinetic1 + orbit.kinetic2) +
                   2.0 * (orbit.invq1 + orbit.invq2) -
                   1.0 / (orbit.qbar1 + orbit.qbar2);
    return rep;
}

} // namespace helium::functional
