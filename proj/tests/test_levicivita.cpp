#include "helium/errors.hpp"
#include "helium/levicivita.hpp"
#include "helium/matching.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace helium;
using namespace helium::levicivita;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;

LoopSignal constant_signal(double c, int n) {
    LoopSignal z;
    z.parity = Parity::Periodic;
    z.values.assign(static_cast<std::size_t>(n), c);
    return z;
}

LoopSignal sin_signal(int n, double shift = 0.0) {
    LoopSignal z;
    z.parity = Parity::Periodic;
    z.values.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        z.values.push_back(std::sin(kTwoPi * (static_cast<double>(j) / n - shift)));
    return z;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

} // namespace

TEST_CASE("time map t_z") {
    SUBCASE("constant signal gives the identity") {
        auto tz = time_map_tz(constant_signal(1.0, 64));
        for (double tau : {0.0, 0.1, 0.33, 0.5, 0.99, 1.0})
            CHECK(tz(tau) == doctest::Approx(tau).epsilon(1e-14));
    }
    SUBCASE("sin closed form") {
        auto tz = time_map_tz(sin_signal(256));
        for (int i = 0; i <= 40; ++i) {
            const double tau = i / 40.0;
            const double expect = tau - std::sin(2.0 * kTwoPi * tau) / (2.0 * kTwoPi);
            CHECK(tz(tau) == doctest::Approx(expect).epsilon(1e-13));
        }
        CHECK(tz(0.25) == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("monotone with fixed endpoints") {
        auto tz = time_map_tz(sin_signal(128, 0.123));
        CHECK(tz(0.0) == 0.0);
        CHECK(tz(1.0) == 1.0);
        double prev = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double v = tz(i / 50.0);
            CHECK(v >= prev);
            prev = v;
        }
    }
    SUBCASE("zero-norm signal rejected") {
        CHECK_THROWS_AS(time_map_tz(constant_signal(0.0, 32)), RegularityError);
    }
}

TEST_CASE("time map tau_q") {
    SUBCASE("constant trajectory gives the identity") {
        CollisionTrajectory q;
        q.values.assign(64, 1.0);
        auto tq = time_map_tauq(q);
        for (double t : {0.0, 0.2, 0.5, 0.77, 1.0})
            CHECK(tq(t) == doctest::Approx(t).epsilon(1e-13));
        CHECK(tq(1.0) == 1.0);
    }
    SUBCASE("inverts t_z on a forward image") {
        const int n = 4096;
        const LoopSignal z = sin_signal(n);
        auto tz = time_map_tz(z);
        auto tq = time_map_tauq(forward_lc(z));
        double worst = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double tau = i / 200.0;
            worst = std::max(worst, std::fabs(tq(tz(tau)) - tau));
        }
        CHECK(worst < 1e-8);
    }
    SUBCASE("nonnegative samples required") {
        CollisionTrajectory q;
        q.values.assign(64, 1.0);
        q.values[10] = -0.3;
        CHECK_THROWS_AS(time_map_tauq(q), DomainError);
    }
}

TEST_CASE("forward transformation") {
    SUBCASE("constant signal squares") {
        auto q = forward_lc(constant_signal(0.7, 64));
        for (double v : q.values)
            CHECK(v == doctest::Approx(0.49).epsilon(1e-14));
    }
    SUBCASE("global sign drops out bit for bit") {
        LoopSignal z = sin_signal(256, 0.05);
        LoopSignal zneg = z;
        for (double& v : zneg.values)
            v = -v;
        const auto qa = forward_lc(z);
        const auto qb = forward_lc(zneg);
        CHECK(qa.values == qb.values);
    }
    SUBCASE("sin image: zeros and mean") {
        const int n = 2048;
        const auto q = forward_lc(sin_signal(n));
        const auto zs = zeros_of(q);
        REQUIRE(zs.size() == 2);
        CHECK(zs[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(zs[1] == doctest::Approx(0.5).epsilon(1e-12));
        // mean value identity qbar = ||z^2||^2 / ||z||^2 = 3/4; the uniform
        // resampling of the cusped q converges like h^{5/3}
        double mean = 0.0;
        for (double v : q.values)
            mean += v;
        mean /= n;
        CHECK(mean == doctest::Approx(0.75).epsilon(1e-4));
    }
}

TEST_CASE("lift: structure and round trips") {
    SUBCASE("constant trajectory lifts to the constant") {
        CollisionTrajectory q;
        q.values.assign(64, 1.0);
        const auto z = lift_lc(q, +1);
        CHECK(z.parity == Parity::Periodic);
        for (double v : z.values)
            CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        const auto zm = lift_lc(q, -1);
        for (double v : zm.values)
            CHECK(v == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("two lifts differ by global negation only") {
        const auto q = forward_lc(sin_signal(512, 0.21));
        const auto zp = lift_lc(q, +1);
        const auto zm = lift_lc(q, -1);
        REQUIRE(zp.values.size() == zm.values.size());
        for (std::size_t i = 0; i < zp.values.size(); ++i)
            CHECK(zp.values[i] == -zm.values[i]);
    }
    SUBCASE("round trip on sin images, aligned and shifted zeros") {
        for (double shift : {0.0, 0.2347}) {
            const auto q = forward_lc(sin_signal(2048, shift));
            const auto z = lift_lc(q, +1);
            const auto rt = forward_lc(z);
            CHECK(max_abs_diff(rt.values, q.values) < 1e-10);
        }
    }
    SUBCASE("lift after forward recovers the signal up to a global sign") {
        const LoopSignal z = sin_signal(2048, 0.31);
        const auto z2 = lift_lc(forward_lc(z), -1);
        double worst = 1e300;
        for (int sgn : {-1, 1}) {
            double w = 0.0;
            for (std::size_t i = 0; i < z.values.size(); ++i)
                w = std::max(w, std::fabs(sgn * z2.values[i] - z.values[i]));
            worst = std::min(worst, w);
        }
        CHECK(worst < 1e-9);
    }
    SUBCASE("degenerate inputs rejected") {
        CollisionTrajectory q;
        q.values.assign(64, 0.0);
        CHECK_THROWS_AS(lift_lc(q, +1), RegularityError);
        // adjacent zero samples
        q.values.assign(64, 1.0);
        q.values[10] = q.values[11] = 0.0;
        CHECK_THROWS_AS(lift_lc(q, +1), RegularityError);
        CHECK_THROWS_AS(lift_lc(forward_lc(sin_signal(256)), 2), DomainError);
    }
}

TEST_CASE("orbit components: parity law, round trip, two-path lift") {
    const auto orbit = matching::build_orbit(1, 2);
    struct Electron {
        const std::vector<double>* q;
        const std::vector<double>* qdot;
        const LoopSignal* z;
        int zeros;
        Parity parity;
    };
    const Electron electrons[2] = {
        {&orbit.q1, &orbit.qdot1, &orbit.z1, 1, Parity::Twisted},
        {&orbit.q2, &orbit.qdot2, &orbit.z2, 2, Parity::Periodic},
    };
    for (const Electron& e : electrons) {
        CollisionTrajectory traj;
        traj.values = *e.q;
        traj.velocities = *e.qdot;

        const auto zs = zeros_of(traj);
        CHECK(static_cast<int>(zs.size()) == e.zeros);

        const auto lifted = lift_lc(traj, +1);
        CHECK(lifted.parity == e.parity);

        // sign switches at every zero: count flips between consecutive
        // nonzero samples (collision samples are exactly zero)
        int changes = 0;
        double prev = 0.0;
        for (double v : lifted.values) {
            if (v == 0.0)
                continue;
            if (prev != 0.0 && v * prev < 0.0)
                ++changes;
            prev = v;
        }
        CHECK(changes == e.zeros);

        // round trip at sample points
        const auto rt = forward_lc(lifted);
        CHECK(max_abs_diff(rt.values, traj.values) < 1e-10);

        // the sample-based lift agrees with the arc-quadrature lift
        double worst = 0.0;
        for (std::size_t i = 0; i < lifted.values.size(); ++i)
            worst = std::max(worst, std::fabs(std::fabs(lifted.values[i]) -
                                              std::fabs(e.z->values[i])));
        CHECK(worst < 1e-10);

        // zero sets correspond under the time maps
        auto tz = time_map_tz(lifted);
        const auto zzeros = zeros_of(lifted);
        REQUIRE(zzeros.size() == zs.size());
        for (std::size_t k = 0; k < zzeros.size(); ++k)
            CHECK(tz(zzeros[k]) == doctest::Approx(zs[k]).epsilon(1e-10));

        // singular integral identity int dt/q = 1 / ||z||^2
        const double invq = inverse_q_integral(traj);
        CHECK(invq * norm_sq(e.z->values) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("energies") {
    SUBCASE("constant trajectory") {
        CollisionTrajectory q;
        q.values.assign(64, 2.0);
        q.velocities.assign(64, 0.0);
        const auto tr = energy_q(q, 3.0);
        // E = -2/c - c/(qbar_sum)^2
        CHECK(tr.min == doctest::Approx(-2.0 / 2.0 - 2.0 / 9.0).epsilon(1e-14));
        CHECK(tr.range() == doctest::Approx(0.0));
    }
    SUBCASE("constant signal Kepler energy") {
        const auto ze = energy_z(constant_signal(0.5, 64));
        for (double v : ze.trace)
            if (!std::isnan(v))
                CHECK(v == doctest::Approx(-2.0 / 0.25).epsilon(1e-12));
        CHECK(ze.mu.empty());
    }
    SUBCASE("orbit: energy constancy and collision strength 2") {
        const auto orbit = matching::build_orbit(2, 3);
        CollisionTrajectory traj;
        traj.values = orbit.q1;
        traj.velocities = orbit.qdot1;
        const auto tr = energy_q(traj, orbit.qbar1 + orbit.qbar2);
        CHECK(tr.range() < 1e-8);
        CHECK(tr.min == doctest::Approx(orbit.arc1.energy).epsilon(1e-9));

        const auto ze = energy_z(orbit.z1);
        REQUIRE(ze.mu.size() == 2);
        for (double mu : ze.mu)
            CHECK(mu == doctest::Approx(2.0).epsilon(1e-6));
        // E_z matches E_q + q/(qbar sum)^2 away from collisions: both are
        // reparameterizations of the same Kepler energy
        const double ctx = orbit.qbar1 + orbit.qbar2;
        for (std::size_t j = 0; j < ze.trace.size(); ++j) {
            if (std::isnan(ze.trace[j]))
                continue;
            const double q = orbit.z1.values[j] * orbit.z1.values[j];
            if (q < 0.1 * orbit.arc1.q0)
                continue;
            const double e_helium = ze.trace[j] - q / (ctx * ctx);
            CHECK(e_helium == doctest::Approx(orbit.arc1.energy).epsilon(1e-7));
        }
    }
}

TEST_CASE("loop signal zero detection") {
    const auto zs = zeros_of(sin_signal(256, 0.125));
    REQUIRE(zs.size() == 2);
    CHECK(zs[0] == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(zs[1] == doctest::Approx(0.625).epsilon(1e-10));

    LoopSignal flat;
    flat.parity = Parity::Periodic;
    flat.values.assign(64, 0.0);
    CHECK_THROWS_AS(zeros_of(flat), RegularityError);

    // twisted wrap: one sign change inside, the other across the seam
    LoopSignal tw;
    tw.parity = Parity::Twisted;
    tw.values.reserve(128);
    for (int j = 0; j < 128; ++j)
        tw.values.push_back(std::cos(3.141592653589793 * j / 128.0));
    CHECK(zeros_of(tw).size() == 1);
}
