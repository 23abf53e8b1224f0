#include "helium/freefall.hpp"
#include "helium/errors.hpp"
#include "helium/roots.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace helium::freefall {

namespace {

constexpr double kHalfPi = 1.570796326794896619231321691639751442;
constexpr double kPi = 3.141592653589793238462643383279502884;

double sqrt_two_k(const specfun::ShapeParam& k) {
    // sqrt(2k) = sqrt(2) exp(log1p(-delta)/2); exact even when k rounds to 1.
    return std::sqrt(2.0) * std::exp(0.5 * std::log1p(-k.complement()));
}

} // namespace

double time_of_flight(double m, double q0, const Quadrature& opts) {
    return make_header(m, q0, opts).sigma;
}

ArcHeader make_header(double m, double q0, const Quadrature& opts) {
    if (m < 0.0)
        throw DomainError("free fall: mean field m must be nonnegative");
    if (!(q0 > 0.0))
        throw DomainError("free fall: q0 must be positive");
    ArcHeader h;
    h.m = m;
    h.q0 = q0;
    h.energy = -2.0 / q0 - m * q0;
    const double kval = 0.5 * m * q0 * q0;
    if (kval >= 1.0)
        throw DomainError("free fall: k = m q0^2/2 >= 1, the arc never reaches zero");
    h.k = specfun::ShapeParam(kval);
    h.sigma = 0.5 * std::pow(q0, 1.5) * specfun::f(h.k, opts);
    return h;
}

ArcHeader solve_q0(double m, double sigma, const Quadrature& opts) {
    if (!(sigma > 0.0))
        throw DomainError("solve_q0: sigma must be positive");
    if (m < 0.0)
        throw DomainError("solve_q0: m must be nonnegative");
    if (m == 0.0) {
        // k = 0 exactly: sigma = (pi/4) q0^{3/2}.
        const double q0 = std::pow(4.0 * sigma / kPi, 2.0 / 3.0);
        ArcHeader h;
        h.m = 0.0;
        h.q0 = q0;
        h.energy = -2.0 / q0;
        h.k = specfun::ShapeParam(0.0);
        h.sigma = sigma;
        return h;
    }

    const double q0_max = std::sqrt(2.0 / m);
    auto q0_of = [&](double x) {
        // x = log(1-k) and q0 = q0_max sqrt(k); sqrt(k) = exp(log1p(-delta)/2).
        return q0_max * std::exp(0.5 * std::log1p(-std::exp(x)));
    };
    auto sigma_of = [&](double x) {
        const double q0 = q0_of(x);
        if (q0 == 0.0)
            return 0.0;
        return 0.5 * std::pow(q0, 1.5) *
               specfun::f(specfun::ShapeParam::from_log_complement(x), opts);
    };
    // sigma grows like q0_max^{3/2} (log(4) - x/2 - 1) as x -> -inf; pick a
    // lower bound with a factor-two margin and verify the bracket.
    double x_lo = 2.0 * (std::log(4.0) - 1.0 - 2.0 * sigma * std::pow(0.5 * m, 0.75)) - 20.0;
    x_lo = std::min(x_lo, -1.0);
    if (x_lo < -1e306)
        throw DomainError("solve_q0: sigma out of representable range for this m");
    while (sigma_of(x_lo) <= sigma) {
        x_lo *= 2.0;
        if (x_lo < -1e306)
            throw DomainError("solve_q0: failed to bracket (sigma too large for this m)");
    }
    RootOptions ropts;
    ropts.x_tol_rel = 1e-16;
    ropts.f_tol = 1e-13 * sigma;
    ropts.max_iter = 400;
    const double x = find_root([&](double t) { return sigma_of(t) - sigma; }, x_lo, 0.0, ropts);

    ArcHeader h;
    h.m = m;
    h.k = specfun::ShapeParam::from_log_complement(x);
    h.q0 = q0_of(x);
    h.energy = -2.0 / h.q0 - m * h.q0;
    h.sigma = sigma;
    return h;
}

double f_sigma(double m, double sigma, const Quadrature& opts) {
    if (m == 0.0)
        return 0.0;
    const ArcHeader h = solve_q0(m, sigma, opts);
    return sqrt_two_k(h.k) * specfun::h(h.k, opts);
}

double mean_value(const ArcHeader& header, const Quadrature& opts) {
    return header.q0 * specfun::h(header.k, opts);
}

// ---------------------------------------------------------------------------
// ArcModel

namespace {

// Integrand weight w = sqrt(1 - k sin^2 theta) without cancellation.
struct ThetaWeight {
    double delta;
    double operator()(double theta) const {
        const double s = std::sin(theta), c = std::cos(theta);
        return std::sqrt(c * c + delta * s * s);
    }
};

} // namespace

struct ArcModel::Impl {
    ArcHeader header;
    Quadrature opts;
    double delta;
    // S(theta) = int_0^theta sin^2/w ; T(theta) = int_0^theta 1/w ;
    // J(theta) = int_0^theta cos^2 * w.
    std::unique_ptr<CumulativeIntegral> S, T, J;

    double time_from_theta(double theta) const {
        return std::pow(header.q0, 1.5) * (S->total() - S->eval(theta));
    }
};

ArcModel::ArcModel(const ArcHeader& header, const Quadrature& opts)
    : impl_(std::make_unique<Impl>()) {
    impl_->header = header;
    impl_->opts = opts;
    impl_->delta = header.k.complement();
    if (impl_->delta < 1e-8)
        throw AccuracyError("ArcModel: arc too close to the degenerate limit k = 1 "
                            "for dense sampling");
    const double d = impl_->delta;
    ThetaWeight w{d};
    impl_->S = std::make_unique<CumulativeIntegral>(
        [w](double t) {
            const double s = std::sin(t);
            return s * s / w(t);
        },
        0.0, kHalfPi, opts);
    impl_->T = std::make_unique<CumulativeIntegral>(
        [w](double t) { return 1.0 / w(t); }, 0.0, kHalfPi, opts);
    impl_->J = std::make_unique<CumulativeIntegral>(
        [w](double t) {
            const double c = std::cos(t);
            return c * c * w(t);
        },
        0.0, kHalfPi, opts);
}

ArcModel::~ArcModel() = default;
ArcModel::ArcModel(ArcModel&&) noexcept = default;
ArcModel& ArcModel::operator=(ArcModel&&) noexcept = default;

const ArcHeader& ArcModel::header() const { return impl_->header; }

double ArcModel::time_from_theta(double theta) const {
    if (theta <= 0.0)
        return impl_->header.sigma;
    if (theta >= kHalfPi)
        return 0.0;
    return impl_->time_from_theta(theta);
}

double ArcModel::theta_from_time(double t) const {
    const double sigma = impl_->header.sigma;
    if (t <= 0.0)
        return kHalfPi;
    if (t >= sigma)
        return 0.0;
    // solved to theta-resolution: sampled positions are later second-
    // differenced, which amplifies any time-residual slack by 1/h^2
    RootOptions ropts;
    ropts.x_tol_rel = 3e-16;
    ropts.f_tol = 0.0;
    ropts.max_iter = 300;
    return find_root([&](double th) { return impl_->time_from_theta(th) - t; }, 0.0,
                     kHalfPi, ropts);
}

double ArcModel::q_from_theta(double theta) const {
    const double s = std::sin(theta);
    return impl_->header.q0 * s * s;
}

double ArcModel::qdot_from_theta(double theta) const {
    // |qdot| = 2 q0^{-1/2} cos(theta) w(theta) / sin(theta), negative branch.
    const double s = std::sin(theta), c = std::cos(theta);
    if (s == 0.0)
        return -std::numeric_limits<double>::infinity();
    if (c == 0.0)
        return 0.0;
    const double w = std::sqrt(c * c + impl_->delta * s * s);
    return -2.0 / std::sqrt(impl_->header.q0) * c * w / s;
}

double ArcModel::kepler_time_total() const {
    // int dt/q = (sqrt(q0)/2) int_0^1 du / (sqrt(u) sqrt((1-u)(1-ku)))
    return std::sqrt(impl_->header.q0) * impl_->T->total();
}

double ArcModel::theta_from_tau_fraction(double frac) const {
    if (frac <= 0.0)
        return kHalfPi;
    if (frac >= 1.0)
        return 0.0;
    const double target = (1.0 - frac) * impl_->T->total();
    RootOptions ropts;
    ropts.x_tol_rel = 3e-16;
    ropts.f_tol = 0.0;
    ropts.max_iter = 300;
    return find_root([&](double th) { return impl_->T->eval(th) - target; }, 0.0,
                     kHalfPi, ropts);
}

double ArcModel::kinetic_total() const {
    return 4.0 * std::sqrt(impl_->header.q0) * impl_->J->total();
}

FreeFallArc sample_arc(double m, double sigma, int n_samples, const Quadrature& opts) {
    if (n_samples < 2)
        throw std::invalid_argument("sample_arc: need at least two samples");
    FreeFallArc arc;
    arc.header = solve_q0(m, sigma, opts);
    ArcModel model(arc.header, opts);
    arc.samples.reserve(static_cast<std::size_t>(n_samples));
    const double q_floor = kVelocityFloor * arc.header.q0;
    for (int j = 0; j < n_samples; ++j) {
        // theta runs from pi/2 (rest at q0) down to 0 (collision).
        const double theta = kHalfPi * (1.0 - double(j) / double(n_samples - 1));
        ArcSample s;
        s.t = j == n_samples - 1 ? sigma : model.time_from_theta(theta);
        s.q = j == n_samples - 1 ? 0.0 : model.q_from_theta(theta);
        s.qdot = s.q > q_floor ? model.qdot_from_theta(theta)
                               : std::numeric_limits<double>::quiet_NaN();
        if (j == 0)
            s.qdot = 0.0;
        arc.samples.push_back(s);
    }
    return arc;
}

} // namespace helium::freefall
