#include "helium/levicivita.hpp"
#include "helium/errors.hpp"
#include "helium/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace helium::levicivita {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Uniform-grid Lagrange interpolation (8-point barycentric, nodes 0..7).

constexpr double kBary8[8] = {-1.0 / 5040.0, 1.0 / 720.0, -1.0 / 240.0, 1.0 / 144.0,
                              -1.0 / 144.0,  1.0 / 240.0, -1.0 / 720.0, 1.0 / 5040.0};

double lagrange8(const double* y, double x) {
    const double r = std::round(x);
    if (r >= 0.0 && r <= 7.0 && std::fabs(x - r) < 1e-12)
        return y[static_cast<int>(r)];
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double t = kBary8[i] / (x - i);
        num += t * y[i];
        den += t;
    }
    return num / den;
}

constexpr double kGL5x[5] = {-0.906179845938663992797626878299393,
                             -0.538469310105683091036314420700208, 0.0,
                             0.538469310105683091036314420700208,
                             0.906179845938663992797626878299393};
constexpr double kGL5w[5] = {0.236926885056189087514264040719917,
                             0.478628670499366468041291514835638,
                             0.568888888888888888888888888888889,
                             0.478628670499366468041291514835638,
                             0.236926885056189087514264040719917};

// Integral of the degree-7 interpolant through y[0..7] over [a,b] in node units.
double lagrange8_integral(const double* y, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i)
        acc += kGL5w[i] * lagrange8(y, c + h * kGL5x[i]);
    return acc * h;
}

// Interpolation on a contiguous run y[0..m-1] at fractional index x with the
// stencil clamped inside the run.
double run_interp(const double* y, int m, double x) {
    if (m >= 8) {
        int s = static_cast<int>(std::floor(x)) - 3;
        s = std::clamp(s, 0, m - 8);
        return lagrange8(y + s, x - s);
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
        double w = 1.0;
        for (int j = 0; j < m; ++j)
            if (j != i)
                w /= double(i - j);
        const double d = x - i;
        if (std::fabs(d) < 1e-14)
            return y[i];
        num += w / d * y[i];
        den += w / d;
    }
    return num / den;
}

// prefix[i] = integral from node 0 to node i of the sliding interpolant.
std::vector<double> run_prefix_integral(const std::vector<double>& y, double h) {
    const int m = static_cast<int>(y.size());
    std::vector<double> prefix(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i + 1 < m; ++i) {
        double piece;
        if (m >= 8) {
            const int s = std::clamp(i - 3, 0, m - 8);
            piece = lagrange8_integral(y.data() + s, i - s, i + 1 - s);
        } else {
            piece = 0.5 * (y[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i + 1)]);
        }
        prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + piece * h;
    }
    return prefix;
}

double run_partial_integral(const std::vector<double>& y, const std::vector<double>& prefix,
                            double h, double x) {
    const int m = static_cast<int>(y.size());
    int i = std::clamp(static_cast<int>(std::floor(x)), 0, m - 2);
    double piece;
    if (m >= 8) {
        const int s = std::clamp(i - 3, 0, m - 8);
        piece = lagrange8_integral(y.data() + s, i - s, x - s);
    } else {
        piece = 0.5 * (y[static_cast<std::size_t>(i)] + run_interp(y.data(), m, x)) * (x - i);
    }
    return prefix[static_cast<std::size_t>(i)] + piece * h;
}

// 32-point Gauss-Legendre nodes on [-1,1], generated once by Newton
// iteration on the Legendre polynomial.
struct GL32 {
    double x[32];
    double w[32];
    GL32() {
        const int n = 32;
        for (int i = 0; i < n / 2; ++i) {
            double t = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
            double p0 = 0.0, p1 = 0.0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = t;
                for (int j = 2; j <= n; ++j) {
                    const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double step = p1 / dp;
                t -= step;
                if (std::fabs(step) < 1e-16)
                    break;
            }
            p0 = 1.0;
            p1 = t;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            x[i] = -t;
            x[n - 1 - i] = t;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

const GL32& gl32() {
    static const GL32 table;
    return table;
}

// ---------------------------------------------------------------------------
// Local collision model. On any segment where q solves a Kepler-with-
// constant-force equation, v^2 q / 2 = mu + C q + M q^2 holds exactly with
// mu > 0 at a transverse zero; the integrals of dt and dt/q up to the point
// with sqrt(q) = y are then regular integrals in y.

struct CollisionModel {
    double mu = 0.0, C = 0.0, M = 0.0;
    bool valid = false;

    double P(double y) const {
        const double y2 = y * y;
        return 2.0 * (mu + C * y2 + M * y2 * y2);
    }
    double dt_of_y(double y) const { // time from the zero to sqrt(q) = y
        const GL32& g = gl32();
        double acc = 0.0;
        for (int i = 0; i < 32; ++i) {
            const double yy = 0.5 * y * (1.0 + g.x[i]);
            acc += g.w[i] * (2.0 * yy * yy / std::sqrt(P(yy)));
        }
        return acc * 0.5 * y;
    }
    double invq_of_y(double y) const { // int dt/q from the zero to sqrt(q) = y
        const GL32& g = gl32();
        double acc = 0.0;
        for (int i = 0; i < 32; ++i) {
            const double yy = 0.5 * y * (1.0 + g.x[i]);
            acc += g.w[i] * (2.0 / std::sqrt(P(yy)));
        }
        return acc * 0.5 * y;
    }
    double y_of_dt(double dt) const {
        double y = std::cbrt(1.5 * dt * std::sqrt(2.0 * mu));
        for (int it = 0; it < 60; ++it) {
            const double fv = dt_of_y(y) - dt;
            const double dv = 2.0 * y * y / std::sqrt(P(y));
            const double step = dv > 0.0 ? fv / dv : 0.0;
            const double yn = y - step;
            y = yn > 0.0 ? yn : 0.5 * y;
            if (std::fabs(step) <= 1e-15 * (1.0 + y))
                break;
        }
        return y;
    }
    double y_of_invq(double target) const {
        double y = 0.5 * target * std::sqrt(2.0 * mu);
        for (int it = 0; it < 60; ++it) {
            const double fv = invq_of_y(y) - target;
            const double dv = 2.0 / std::sqrt(P(y));
            const double step = fv / dv;
            const double yn = y - step;
            y = yn > 0.0 ? yn : 0.5 * y;
            if (std::fabs(step) <= 1e-15 * (1.0 + y))
                break;
        }
        return y;
    }
};

CollisionModel fit_model(const std::vector<double>& qs, const std::vector<double>& vs) {
    CollisionModel m;
    const int n = static_cast<int>(qs.size());
    if (n < 3)
        return m;
    double qscale = 0.0;
    for (double q : qs)
        qscale = std::max(qscale, q);
    if (qscale <= 0.0)
        return m;
    long double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    long double rhs[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
        const long double q = qs[static_cast<std::size_t>(i)] / qscale;
        const long double row[3] = {1.0L, q, q * q};
        const long double b = 0.5L * static_cast<long double>(vs[static_cast<std::size_t>(i)]) *
                              vs[static_cast<std::size_t>(i)] * qs[static_cast<std::size_t>(i)];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c)
                A[r][c] += row[r] * row[c];
            rhs[r] += row[r] * b;
        }
    }
    for (int c = 0; c < 3; ++c) { // elimination with partial pivoting
        int best = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::fabs(static_cast<double>(A[r][c])) >
                std::fabs(static_cast<double>(A[best][c])))
                best = r;
        if (best != c) {
            for (int cc = 0; cc < 3; ++cc)
                std::swap(A[c][cc], A[best][cc]);
            std::swap(rhs[c], rhs[best]);
        }
        if (A[c][c] == 0.0L)
            return m;
        for (int r = c + 1; r < 3; ++r) {
            const long double fac = A[r][c] / A[c][c];
            for (int cc = c; cc < 3; ++cc)
                A[r][cc] -= fac * A[c][cc];
            rhs[r] -= fac * rhs[c];
        }
    }
    long double sol[3];
    for (int r = 2; r >= 0; --r) {
        long double acc = rhs[r];
        for (int c = r + 1; c < 3; ++c)
            acc -= A[r][c] * sol[c];
        sol[r] = acc / A[r][r];
    }
    m.mu = static_cast<double>(sol[0]);
    m.C = static_cast<double>(sol[1] / qscale);
    m.M = static_cast<double>(sol[2] / (qscale * qscale));
    m.valid = m.mu > 0.0 && std::isfinite(m.mu) && std::isfinite(m.C) && std::isfinite(m.M);
    return m;
}

// ---------------------------------------------------------------------------
// Trajectory analysis: zeros, per-zero models, cumulative 1/q integral.

struct Segment {
    double t_lo = 0.0, t_hi = 0.0; // bounding zeros, t_hi may exceed 1
    int first = 0;                 // index (mod n) of first sample strictly inside
    int count = 0;
    int wl = 0, wr = 0;            // model-window sample counts at each end
    CollisionModel left, right;    // models at t_lo (right side) and t_hi (left side)
    std::vector<double> qs;        // q on all segment samples
    std::vector<double> invq;      // 1/q on the middle samples [wl, count-1-wr]
    std::vector<double> prefix;
    double xi_first = 0.0;         // first sample position relative to t_lo
    double xi_mlo = 0.0, xi_mhi = 0.0;
    double left_full = 0.0, right_full = 0.0, total = 0.0;

    double len() const { return t_hi - t_lo; }
};

struct Analysis {
    int n = 0;
    double h = 0.0;
    std::vector<double> q;
    double qmax = 0.0;
    std::vector<double> zeros; // refined positions, ascending in [0,1)
    std::vector<Segment> segments;
    std::vector<double> cumJ; // J at each segment start; J anchored at zeros[0]
    double I_total = 0.0;
    double I_offset = 0.0; // J(1 - zeros[0]) = integral from zeros[0] to 1

    // zero-free fallback
    std::unique_ptr<fourier::PeriodicAntiderivative> smooth_invq;
    std::unique_ptr<fourier::TrigSeries> smooth_q;

    double J_partial(const Segment& s, double xi) const;
    double J(double x) const;      // integral over [zeros[0], zeros[0]+x], x in [0,1]
    double I(double t) const;      // integral over [0,t]
    double q_eval(double t) const; // sub-sample evaluation of q

    struct JPoint {
        double q;  // q at the located point
        double t;  // absolute time in [zeros[0], zeros[0]+1)
    };
    JPoint invert_J(double target) const; // J(x) = target
};

double Analysis::J_partial(const Segment& s, double xi) const {
    if (xi <= 0.0)
        return 0.0;
    if (xi >= s.len())
        return s.total;
    if (xi <= s.xi_mlo)
        return s.left.invq_of_y(s.left.y_of_dt(xi));
    if (xi >= s.xi_mhi)
        return s.total - s.right.invq_of_y(s.right.y_of_dt(s.len() - xi));
    return s.left_full + run_partial_integral(s.invq, s.prefix, h, (xi - s.xi_mlo) / h);
}

double Analysis::J(double x) const {
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return I_total;
    const double t = zeros[0] + x;
    int lo = 0, hi = static_cast<int>(segments.size()) - 1;
    while (lo < hi) { // last segment with t_lo <= t
        const int mid = (lo + hi + 1) / 2;
        if (segments[static_cast<std::size_t>(mid)].t_lo <= t)
            lo = mid;
        else
            hi = mid - 1;
    }
    const Segment& s = segments[static_cast<std::size_t>(lo)];
    return cumJ[static_cast<std::size_t>(lo)] + J_partial(s, t - s.t_lo);
}

double Analysis::I(double t) const {
    t -= std::floor(t);
    if (smooth_invq)
        return smooth_invq->operator()(t);
    const double z0 = zeros[0];
    if (t >= z0)
        return J(t - z0) + I_total - I_offset;
    return J(t + 1.0 - z0) - I_offset;
}

double Analysis::q_eval(double t) const {
    t -= std::floor(t);
    if (smooth_q)
        return smooth_q->operator()(t);
    const double z0 = zeros[0];
    const double x = t >= z0 ? t - z0 : t + 1.0 - z0;
    const double tt = z0 + x;
    int lo = 0, hi = static_cast<int>(segments.size()) - 1;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (segments[static_cast<std::size_t>(mid)].t_lo <= tt)
            lo = mid;
        else
            hi = mid - 1;
    }
    const Segment& s = segments[static_cast<std::size_t>(lo)];
    const double xi = tt - s.t_lo;
    if (xi <= s.xi_mlo) {
        const double y = s.left.y_of_dt(xi);
        return y * y;
    }
    if (xi >= s.xi_mhi) {
        const double y = s.right.y_of_dt(s.len() - xi);
        return y * y;
    }
    return run_interp(s.qs.data(), s.count, (xi - s.xi_first) / h);
}

Analysis::JPoint Analysis::invert_J(double target) const {
    JPoint p{};
    target = std::clamp(target, 0.0, I_total);
    int lo = 0, hi = static_cast<int>(segments.size()) - 1;
    while (lo < hi) { // last segment with cumJ <= target
        const int mid = (lo + hi + 1) / 2;
        if (cumJ[static_cast<std::size_t>(mid)] <= target)
            lo = mid;
        else
            hi = mid - 1;
    }
    const Segment& s = segments[static_cast<std::size_t>(lo)];
    const double part = target - cumJ[static_cast<std::size_t>(lo)];
    if (part <= s.left_full) {
        const double y = s.left.y_of_invq(part);
        p.q = y * y;
        p.t = s.t_lo + s.left.dt_of_y(y);
        return p;
    }
    if (part >= s.total - s.right_full) {
        const double y = s.right.y_of_invq(s.total - part);
        p.q = y * y;
        p.t = s.t_hi - s.right.dt_of_y(y);
        return p;
    }
    // middle: monotone solve on the composite prefix
    const int m = static_cast<int>(s.invq.size());
    const double want = part - s.left_full;
    int a = 0, b = m - 1;
    while (a + 1 < b) { // bracket on sample prefix values
        const int mid = (a + b) / 2;
        if (s.prefix[static_cast<std::size_t>(mid)] <= want)
            a = mid;
        else
            b = mid;
    }
    double xlo = a, xhi = b;
    double flo = s.prefix[static_cast<std::size_t>(a)] - want;
    double fhi = s.prefix[static_cast<std::size_t>(b)] - want;
    double x = 0.5 * (xlo + xhi);
    for (int it = 0; it < 80; ++it) {
        x = (fhi != flo) ? xlo - flo * (xhi - xlo) / (fhi - flo) : 0.5 * (xlo + xhi);
        if (!(x > xlo) || !(x < xhi) ||
            std::min(x - xlo, xhi - x) < 0.05 * (xhi - xlo))
            x = 0.5 * (xlo + xhi);
        const double fx = run_partial_integral(s.invq, s.prefix, h, x) - want;
        if (fx == 0.0)
            break;
        if ((fx > 0.0) == (fhi > 0.0)) {
            xhi = x;
            fhi = fx;
        } else {
            xlo = x;
            flo = fx;
        }
        if (xhi - xlo < 1e-13)
            break;
    }
    const double xi = s.xi_mlo + x * h;
    p.q = run_interp(s.qs.data(), s.count, (xi - s.xi_first) / h);
    p.t = s.t_lo + xi;
    return p;
}

// Coarse zero localization: exact (sub-threshold) samples, plus cusps of
// w = q^{3/2} between samples detected by extrapolating the two branches.
std::vector<double> coarse_zeros(const std::vector<double>& q, double qmax, double h) {
    const int n = static_cast<int>(q.size());
    const double thresh = 1e-12 * qmax;
    std::vector<double> zs;
    auto qa = [&](int l) { return q[static_cast<std::size_t>((l % n + n) % n)]; };
    for (int l = 0; l < n; ++l) {
        if (q[static_cast<std::size_t>(l)] <= thresh) {
            if (qa(l - 1) <= thresh || qa(l + 1) <= thresh)
                throw RegularityError("collision trajectory: zeros must be isolated");
            zs.push_back(h * l);
            continue;
        }
        // local minimum strictly between samples
        const double qm = qa(l - 1), q0 = q[static_cast<std::size_t>(l)], qp = qa(l + 1);
        if (!(q0 < qm && q0 <= qp))
            continue;
        auto w = [&](int j) { return std::pow(qa(j), 1.5); };
        // The cusp may sit in (t_{l-1}, t_l) or (t_l, t_{l+1}). For each
        // candidate interval extrapolate the q^{3/2} branch lines from the
        // strictly outer samples; only the true interval gives consistent
        // intersections.
        bool found = false;
        double t0 = 0.0, best = 0.5 * h;
        for (int a : {l - 1, l}) { // interval (t_a, t_{a+1})
            const double sL = (w(a) - w(a - 1)) / h;
            const double sR = (w(a + 2) - w(a + 1)) / h;
            if (!(sL < 0.0) || !(sR > 0.0))
                continue;
            const double tL = h * a - w(a) / sL;
            const double tR = h * (a + 1) - w(a + 1) / sR;
            if (tL < h * a - 0.25 * h || tL > h * (a + 1) + 0.25 * h)
                continue;
            if (tR < h * a - 0.25 * h || tR > h * (a + 1) + 0.25 * h)
                continue;
            const double mismatch = std::fabs(tL - tR);
            if (mismatch > best)
                continue; // shallow smooth minimum, not a collision
            t0 = std::clamp(0.5 * (tL + tR), h * a + 1e-9 * h, h * (a + 1) - 1e-9 * h);
            best = mismatch;
            found = true;
        }
        if (!found)
            continue;
        zs.push_back(t0 - std::floor(t0));
    }
    std::sort(zs.begin(), zs.end());
    return zs;
}

Analysis build_analysis(const CollisionTrajectory& traj) {
    Analysis an;
    an.n = traj.size();
    if (an.n < 8)
        throw RegularityError("collision trajectory: too few samples");
    an.h = 1.0 / an.n;
    an.q = traj.values;
    for (double v : an.q) {
        if (!(v >= 0.0))
            throw DomainError("collision trajectory: samples must be nonnegative");
        an.qmax = std::max(an.qmax, v);
    }
    if (an.qmax == 0.0)
        throw RegularityError("collision trajectory: identically zero");

    std::vector<double> zs = coarse_zeros(an.q, an.qmax, an.h);
    if (zs.empty()) {
        std::vector<double> invq(an.q.size());
        for (std::size_t i = 0; i < an.q.size(); ++i)
            invq[i] = 1.0 / an.q[i];
        an.smooth_invq = std::make_unique<fourier::PeriodicAntiderivative>(invq, 1.0);
        an.smooth_q = std::make_unique<fourier::TrigSeries>(an.q, 1.0);
        an.I_total = an.smooth_invq->total();
        return an;
    }

    // velocities: input ones if provided, otherwise from the derivative of
    // q^{3/2} (linear through collisions), qdot = (2/3) w' / sqrt(q)
    std::vector<double> vel;
    if (!traj.velocities.empty()) {
        vel = traj.velocities;
    } else {
        const int n = an.n;
        vel.assign(static_cast<std::size_t>(n), kNaN);
        std::vector<double> w(static_cast<std::size_t>(n));
        for (int l = 0; l < n; ++l)
            w[static_cast<std::size_t>(l)] = std::pow(an.q[static_cast<std::size_t>(l)], 1.5);
        auto wa = [&](int l) { return w[static_cast<std::size_t>((l % n + n) % n)]; };
        for (int l = 0; l < n; ++l) {
            const double qv = an.q[static_cast<std::size_t>(l)];
            if (qv <= 1e-10 * an.qmax)
                continue;
            const double wp =
                (wa(l - 2) - 8.0 * wa(l - 1) + 8.0 * wa(l + 1) - wa(l + 2)) / (12.0 * an.h);
            vel[static_cast<std::size_t>(l)] = (2.0 / 3.0) * wp / std::sqrt(qv);
        }
    }

    const int Z = static_cast<int>(zs.size());
    auto assemble = [&](const std::vector<double>& zeros) {
        std::vector<Segment> segs(static_cast<std::size_t>(Z));
        for (int j = 0; j < Z; ++j) {
            Segment& s = segs[static_cast<std::size_t>(j)];
            s.t_lo = zeros[static_cast<std::size_t>(j)];
            s.t_hi = j + 1 < Z ? zeros[static_cast<std::size_t>(j + 1)]
                               : zeros[0] + 1.0;
            int l = static_cast<int>(std::floor(s.t_lo / an.h)) + 1;
            while (an.h * l <= s.t_lo + 1e-15)
                ++l;
            s.first = l;
            int cnt = 0;
            while (an.h * (l + cnt) < s.t_hi - 1e-15) {
                const double qv = an.q[static_cast<std::size_t>(((l + cnt) % an.n + an.n) % an.n)];
                if (qv <= 1e-12 * an.qmax)
                    break; // the bounding zero itself sits on this sample
                ++cnt;
            }
            s.count = cnt;
            if (cnt < 4)
                throw RegularityError("collision trajectory: zeros too close together");
            s.xi_first = an.h * l - s.t_lo;
            s.qs.resize(static_cast<std::size_t>(cnt));
            for (int i = 0; i < cnt; ++i)
                s.qs[static_cast<std::size_t>(i)] =
                    an.q[static_cast<std::size_t>(((l + i) % an.n + an.n) % an.n)];
        }
        return segs;
    };

    auto fit_side = [&](const Segment& s, bool left_end) {
        const int wfit = std::min(s.count, std::min(40, std::max(3, s.count / 3)));
        std::vector<double> qs, vs;
        for (int i = 0; i < wfit; ++i) {
            const int idx = left_end ? s.first + i : s.first + s.count - 1 - i;
            const double qv = an.q[static_cast<std::size_t>((idx % an.n + an.n) % an.n)];
            const double vv = vel[static_cast<std::size_t>((idx % an.n + an.n) % an.n)];
            if (!std::isfinite(vv))
                continue;
            qs.push_back(qv);
            vs.push_back(vv);
        }
        CollisionModel m = fit_model(qs, vs);
        if (!m.valid)
            throw RegularityError("collision trajectory: could not fit a transverse "
                                  "collision model (non-transverse zero?)");
        return m;
    };

    // Fit models on coarse segments, refine off-grid zero positions from the
    // model time-distance of the nearest samples, then reassemble.
    std::vector<Segment> segs = assemble(zs);
    std::vector<double> refined = zs;
    for (int j = 0; j < Z; ++j) {
        const double z = zs[static_cast<std::size_t>(j)];
        const double snapped = std::round(z / an.h) * an.h;
        const bool on_grid =
            std::fabs(z - snapped) < 1e-9 &&
            an.q[static_cast<std::size_t>((static_cast<int>(std::round(z / an.h)) % an.n + an.n) % an.n)] <=
                1e-12 * an.qmax;
        if (on_grid) {
            refined[static_cast<std::size_t>(j)] = snapped - std::floor(snapped);
            continue;
        }
        const Segment& right_seg = segs[static_cast<std::size_t>(j)];
        const Segment& left_seg = segs[static_cast<std::size_t>((j + Z - 1) % Z)];
        const CollisionModel mr = fit_side(right_seg, true);
        const CollisionModel ml = fit_side(left_seg, false);
        // The models give the exact time distance of a sample from the zero,
        // independently of the coarse position estimate.
        const double qr = right_seg.qs.front();
        const double ql = left_seg.qs.back();
        const double tr = right_seg.t_lo + right_seg.xi_first;
        const double tl = left_seg.t_lo + left_seg.xi_first + an.h * (left_seg.count - 1);
        const double est_r = tr - mr.dt_of_y(std::sqrt(qr));
        double est_l = tl + ml.dt_of_y(std::sqrt(ql));
        est_l -= std::round(est_l - est_r); // unwrap onto the same branch
        double cand = 0.5 * (est_r + est_l);
        // keep the refinement inside the original bracketing interval
        if (!(cand >= z - an.h && cand <= z + an.h))
            cand = std::clamp(est_r, z - an.h, z + an.h);
        refined[static_cast<std::size_t>(j)] = cand - std::floor(cand);
    }
    std::sort(refined.begin(), refined.end());
    an.zeros = refined;
    an.segments = assemble(refined);

    // windows, models, composite integrals
    an.cumJ.assign(static_cast<std::size_t>(Z), 0.0);
    double acc = 0.0;
    for (int j = 0; j < Z; ++j) {
        Segment& s = an.segments[static_cast<std::size_t>(j)];
        // model windows: as wide as possible for the composite rule, but
        // only where q is far from the turning point (the model quadrature
        // variables degenerate where the velocity vanishes)
        const int wcap = std::min(32, std::max(2, s.count / 6));
        auto window = [&](bool left_end) {
            int w = 2;
            for (int i = 2; i <= wcap; ++i) {
                const double qv = left_end ? s.qs[static_cast<std::size_t>(i)]
                                           : s.qs[static_cast<std::size_t>(s.count - 1 - i)];
                if (qv > 0.2 * an.qmax)
                    break;
                w = i;
            }
            return w;
        };
        int wl = window(true), wr = window(false);
        while (s.count - wl - wr < 2) {
            if (wl > 1)
                --wl;
            if (wr > 1 && s.count - wl - wr < 2)
                --wr;
            if (wl == 1 && wr == 1)
                break;
        }
        s.wl = wl;
        s.wr = wr;
        s.left = fit_side(s, true);
        s.right = fit_side(s, false);
        s.xi_mlo = s.xi_first + an.h * s.wl;
        s.xi_mhi = s.xi_first + an.h * (s.count - 1 - s.wr);
        const int mcount = s.count - s.wl - s.wr;
        s.invq.resize(static_cast<std::size_t>(mcount));
        for (int i = 0; i < mcount; ++i)
            s.invq[static_cast<std::size_t>(i)] = 1.0 / s.qs[static_cast<std::size_t>(i + s.wl)];
        s.prefix = run_prefix_integral(s.invq, an.h);
        s.left_full = s.left.invq_of_y(s.left.y_of_dt(s.xi_mlo));
        s.right_full = s.right.invq_of_y(s.right.y_of_dt(s.len() - s.xi_mhi));
        s.total = s.left_full + s.prefix.back() + s.right_full;
        an.cumJ[static_cast<std::size_t>(j)] = acc;
        acc += s.total;
    }
    an.I_total = acc;
    an.I_offset = an.J(1.0 - an.zeros[0]);
    return an;
}

// ---------------------------------------------------------------------------
// Loop-side helpers.

int wrap(int l, int n) { return (l % n + n) % n; }

} // namespace

std::vector<double> double_cover(const LoopSignal& z) {
    if (z.parity == Parity::Periodic)
        return z.values;
    std::vector<double> cover(z.values.size() * 2);
    for (std::size_t i = 0; i < z.values.size(); ++i) {
        cover[i] = z.values[i];
        cover[i + z.values.size()] = -z.values[i];
    }
    return cover;
}

std::vector<double> loop_derivative(const LoopSignal& z) {
    if (z.parity == Parity::Periodic)
        return fourier::derivative_periodic(z.values, 1.0, 1);
    auto d = fourier::derivative_periodic(double_cover(z), 2.0, 1);
    d.resize(z.values.size());
    return d;
}

std::vector<double> loop_second_derivative(const LoopSignal& z) {
    if (z.parity == Parity::Periodic)
        return fourier::derivative_periodic(z.values, 1.0, 2);
    auto d = fourier::derivative_periodic(double_cover(z), 2.0, 2);
    d.resize(z.values.size());
    return d;
}

std::function<double(double)> loop_interpolant(const LoopSignal& z) {
    const double period = z.parity == Parity::Periodic ? 1.0 : 2.0;
    auto series = std::make_shared<fourier::TrigSeries>(double_cover(z), period);
    return [series](double tau) { return (*series)(tau); };
}

std::function<double(double)> loop_derivative_interpolant(const LoopSignal& z) {
    const double period = z.parity == Parity::Periodic ? 1.0 : 2.0;
    auto series = std::make_shared<fourier::TrigSeries>(double_cover(z), period);
    return [series](double tau) { return series->derivative(tau); };
}

double norm_sq(const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values)
        acc += v * v;
    return acc / static_cast<double>(values.size());
}

std::vector<double> zeros_of(const LoopSignal& z) {
    const int n = z.size();
    if (n == 0)
        throw RegularityError("loop signal: empty");
    bool any = false;
    for (double v : z.values)
        if (v != 0.0)
            any = true;
    if (!any)
        throw RegularityError("loop signal: identically zero");
    std::vector<double> zs;
    const double h = 1.0 / n;
    for (int l = 0; l < n; ++l) {
        const double a = z.values[static_cast<std::size_t>(l)];
        const double next = l + 1 < n ? z.values[static_cast<std::size_t>(l + 1)]
                                      : (z.parity == Parity::Twisted ? -z.values[0]
                                                                     : z.values[0]);
        if (a == 0.0) {
            const double prev = z.values[static_cast<std::size_t>(wrap(l - 1, n))] *
                                (l == 0 && z.parity == Parity::Twisted ? -1.0 : 1.0);
            if (next == 0.0 || prev == 0.0)
                throw RegularityError("loop signal: zeros must be isolated");
            zs.push_back(h * l);
            continue;
        }
        if (a * next < 0.0)
            zs.push_back(h * (l + a / (a - next)));
    }
    return zs;
}

std::vector<double> zeros_of(const CollisionTrajectory& q) {
    Analysis an = build_analysis(q);
    return an.zeros;
}

double MonotoneTimeMap::inverse(double y) const {
    double lo = 0.0, hi = 1.0, flo = fwd_(0.0) - y, fhi = fwd_(1.0) - y;
    if (flo >= 0.0)
        return 0.0;
    if (fhi <= 0.0)
        return 1.0;
    double x = 0.5;
    for (int it = 0; it < 200; ++it) {
        x = (fhi != flo) ? lo - flo * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
        if (!(x > lo) || !(x < hi) ||
            std::min(x - lo, hi - x) < 0.05 * (hi - lo))
            x = 0.5 * (lo + hi);
        const double fx = fwd_(x) - y;
        if (fx == 0.0)
            return x;
        if (fx > 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        if (hi - lo < 1e-15)
            break;
    }
    return 0.5 * (lo + hi);
}

MonotoneTimeMap time_map_tz(const LoopSignal& z) {
    const double nsq = norm_sq(z.values);
    if (nsq <= 0.0)
        throw RegularityError("time_map_tz: signal has zero norm");
    std::vector<double> w(z.values.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = z.values[i] * z.values[i];
    auto anti = std::make_shared<fourier::PeriodicAntiderivative>(w, 1.0);
    const double total = anti->total();
    return MonotoneTimeMap([anti, total](double tau) {
        if (tau <= 0.0)
            return 0.0;
        if (tau >= 1.0)
            return 1.0;
        return (*anti)(tau) / total;
    });
}

MonotoneTimeMap time_map_tauq(const CollisionTrajectory& q) {
    auto an = std::make_shared<Analysis>(build_analysis(q));
    const double total = an->I_total;
    if (!(total > 0.0) || !std::isfinite(total))
        throw RegularityError("time_map_tauq: 1/q integral is not finite");
    return MonotoneTimeMap([an, total](double t) {
        if (t <= 0.0)
            return 0.0;
        if (t >= 1.0)
            return 1.0;
        return an->I(t) / total;
    });
}

double inverse_q_integral(const CollisionTrajectory& q) {
    return build_analysis(q).I_total;
}

// ---------------------------------------------------------------------------
// Forward transformation.

CollisionTrajectory forward_lc(const LoopSignal& z, int out_n) {
    const int n = z.size();
    if (n < 4)
        throw RegularityError("forward_lc: too few samples");
    if (out_n <= 0)
        out_n = n;
    const double nsq_samples = norm_sq(z.values);
    if (nsq_samples <= 0.0)
        throw RegularityError("forward_lc: signal has zero norm");

    const int F = 8;
    const bool twisted = z.parity == Parity::Twisted;
    const double period = twisted ? 2.0 : 1.0;
    const std::vector<double> cover = double_cover(z);
    std::vector<double> zu = fourier::upsample_periodic(cover, F);
    std::vector<double> du = fourier::upsample_periodic(
        fourier::derivative_periodic(cover, period, 1), F);
    const int nf = n * F; // fine samples covering [0,1)
    zu.resize(static_cast<std::size_t>(nf));
    du.resize(static_cast<std::size_t>(nf));

    // z^2 on the fine grid is alias-free for F >= 2, so its antiderivative
    // is the exact time map of the trigonometric interpolant.
    std::vector<double> wf(static_cast<std::size_t>(nf));
    for (int j = 0; j < nf; ++j)
        wf[static_cast<std::size_t>(j)] = zu[static_cast<std::size_t>(j)] * zu[static_cast<std::size_t>(j)];
    fourier::PeriodicAntiderivative anti(wf, 1.0);
    std::vector<double> C = anti.grid_values(); // size nf+1, C[nf] = ||z||^2
    const double Ctot = anti.total();

    auto zfine = [&](double tau) {
        const double x = (tau - std::floor(tau)) * nf;
        int s = static_cast<int>(std::floor(x)) - 3;
        double y[8];
        for (int i = 0; i < 8; ++i)
            y[i] = zu[static_cast<std::size_t>(wrap(s + i, nf))];
        return lagrange8(y, x - s);
    };
    auto dfine = [&](double tau) {
        const double x = (tau - std::floor(tau)) * nf;
        int s = static_cast<int>(std::floor(x)) - 3;
        double y[8];
        for (int i = 0; i < 8; ++i)
            y[i] = du[static_cast<std::size_t>(wrap(s + i, nf))];
        return lagrange8(y, x - s);
    };
    auto Cfine = [&](double tau) { // antiderivative, valid for tau in [0,1]
        const double x = tau * nf;
        int s = std::clamp(static_cast<int>(std::floor(x)) - 3, 0, nf - 7);
        return lagrange8(C.data() + s, x - s);
    };

    // zeros of z and the slope there, for the ill-conditioned flat stretches
    // of the time map (t_z is cubically flat at each zero, so the bisection
    // answer is only reliable up to the ulp ripple of the antiderivative)
    std::vector<double> zzero;
    std::vector<double> zzero_t, zzero_d;
    try {
        zzero = zeros_of(z);
    } catch (const RegularityError&) {
        zzero.clear();
    }
    double zamp = 0.0;
    for (double v : zu)
        zamp = std::max(zamp, std::fabs(v));
    const double flat_thresh = 1e-4 * zamp;

    CollisionTrajectory out;
    out.values.assign(static_cast<std::size_t>(out_n), 0.0);
    out.velocities.assign(static_cast<std::size_t>(out_n), kNaN);
    for (double tau0 : zzero) {
        zzero_t.push_back(Cfine(tau0) / Ctot);
        zzero_d.push_back(dfine(tau0));
    }
    int cell = 0;
    for (int l = 0; l < out_n; ++l) {
        const double target = (static_cast<double>(l) / out_n) * Ctot;
        while (cell + 1 < nf && C[static_cast<std::size_t>(cell + 1)] < target)
            ++cell;
        double lo = static_cast<double>(cell) / nf, hi = static_cast<double>(cell + 1) / nf;
        double flo = C[static_cast<std::size_t>(cell)] - target;
        double fhi = C[static_cast<std::size_t>(cell + 1)] - target;
        double tau = 0.5 * (lo + hi);
        if (flo >= 0.0) {
            tau = lo;
        } else if (fhi <= 0.0) {
            tau = hi;
        } else {
            for (int it = 0; it < 120; ++it) {
                tau = (fhi != flo) ? lo - flo * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
                // force bisection when secant crawls along one endpoint
                // (t_z is flat to second order at zeros of z)
                if (!(tau > lo) || !(tau < hi) ||
                    std::min(tau - lo, hi - tau) < 0.05 * (hi - lo))
                    tau = 0.5 * (lo + hi);
                const double fx = Cfine(tau) - target;
                if (fx == 0.0)
                    break;
                if (fx > 0.0) {
                    hi = tau;
                    fhi = fx;
                } else {
                    lo = tau;
                    flo = fx;
                }
                if (hi - lo < 1e-17)
                    break;
            }
        }
        double zv = zfine(tau);
        if (std::fabs(zv) < flat_thresh && !zzero.empty()) {
            // local cubic inversion: t - t* = z'(tau*)^2 (tau - tau*)^3 / (3 ||z||^2)
            std::size_t best = 0;
            double dist = 2.0;
            const double t_l = static_cast<double>(l) / out_n;
            for (std::size_t k = 0; k < zzero.size(); ++k) {
                double d = std::fabs(t_l - zzero_t[k]);
                d = std::min(d, 1.0 - d);
                if (d < dist) {
                    dist = d;
                    best = k;
                }
            }
            double dt = t_l - zzero_t[best];
            if (dt > 0.5)
                dt -= 1.0;
            if (dt < -0.5)
                dt += 1.0;
            const double slope2 = zzero_d[best] * zzero_d[best];
            if (std::fabs(dt) <= 8.0 * 2.220446049250313e-16) {
                // the zero position itself is defined only to ulp; this is a
                // collision sample
                tau = zzero[best];
                zv = 0.0;
            } else if (slope2 > 0.0) {
                tau = zzero[best] + std::cbrt(3.0 * Ctot * dt / slope2);
                zv = zfine(tau);
            }
        }
        out.values[static_cast<std::size_t>(l)] = zv * zv;
        out.velocities[static_cast<std::size_t>(l)] = 2.0 * Ctot * dfine(tau) / zv;
    }
    // velocity floor: near-collision samples carry no usable velocity
    double qmax = 0.0;
    for (double v : out.values)
        qmax = std::max(qmax, v);
    for (int l = 0; l < out_n; ++l)
        if (out.values[static_cast<std::size_t>(l)] <= 1e-8 * qmax ||
            !std::isfinite(out.velocities[static_cast<std::size_t>(l)]))
            out.velocities[static_cast<std::size_t>(l)] = kNaN;
    return out;
}

// ---------------------------------------------------------------------------
// Inverse transformation.

LoopSignal lift_lc(const CollisionTrajectory& q, int global_sign, int out_n) {
    if (global_sign != 1 && global_sign != -1)
        throw DomainError("lift_lc: global sign must be +1 or -1");
    const int n = q.size();
    if (out_n <= 0)
        out_n = n;
    Analysis an = build_analysis(q);

    LoopSignal z;
    z.values.assign(static_cast<std::size_t>(out_n), 0.0);

    if (an.zeros.empty()) {
        z.parity = Parity::Periodic;
        // strictly positive trajectory: tau and t related smoothly
        MonotoneTimeMap tq = time_map_tauq(q);
        for (int j = 0; j < out_n; ++j) {
            const double t = tq.inverse(static_cast<double>(j) / out_n);
            z.values[static_cast<std::size_t>(j)] =
                global_sign * std::sqrt(std::max(an.q_eval(t), 0.0));
        }
        return z;
    }

    const int Z = static_cast<int>(an.zeros.size());
    z.parity = (Z % 2 == 1) ? Parity::Twisted : Parity::Periodic;

    // tau positions of the zeros
    std::vector<double> tau_zero(static_cast<std::size_t>(Z));
    for (int k = 0; k < Z; ++k)
        tau_zero[static_cast<std::size_t>(k)] = an.I(an.zeros[static_cast<std::size_t>(k)]) / an.I_total;

    // sign per output sample: global_sign on the segment containing tau = 0,
    // switching at every zero
    std::vector<int> sign(static_cast<std::size_t>(out_n), global_sign);
    {
        int flips = 0;
        int next = 0;
        for (int j = 0; j < out_n; ++j) {
            const double tau = static_cast<double>(j) / out_n;
            while (next < Z && tau_zero[static_cast<std::size_t>(next)] <= tau + 1e-15) {
                ++flips;
                ++next;
            }
            sign[static_cast<std::size_t>(j)] = (flips % 2 == 0) ? global_sign : -global_sign;
        }
    }

    for (int j = 0; j < out_n; ++j) {
        const double tau = static_cast<double>(j) / out_n;
        // J-space target for I(t) = tau * I_total (see Analysis::I)
        double target = tau * an.I_total + an.I_offset;
        if (target >= an.I_total)
            target -= an.I_total;
        const auto p = an.invert_J(target);
        z.values[static_cast<std::size_t>(j)] =
            sign[static_cast<std::size_t>(j)] * std::sqrt(std::max(p.q, 0.0));
    }

    // snap samples that land on a zero
    double zmax = 0.0;
    for (double v : z.values)
        zmax = std::max(zmax, std::fabs(v));
    for (double& v : z.values)
        if (std::fabs(v) < 1e-12 * zmax)
            v = 0.0;
    return z;
}

// ---------------------------------------------------------------------------
// Energies.

EnergyTrace energy_q(const CollisionTrajectory& q, double qbar_sum,
                     double interior_fraction) {
    const int n = q.size();
    EnergyTrace tr;
    tr.values.assign(static_cast<std::size_t>(n), kNaN);
    double qmax = 0.0;
    for (double v : q.values)
        qmax = std::max(qmax, v);
    const double floor = interior_fraction * qmax;
    const double ctx = 1.0 / (qbar_sum * qbar_sum);
    tr.min = std::numeric_limits<double>::infinity();
    tr.max = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < n; ++l) {
        const double qv = q.values[static_cast<std::size_t>(l)];
        const double vv = q.velocities.empty() ? kNaN : q.velocities[static_cast<std::size_t>(l)];
        if (qv < floor || !std::isfinite(vv))
            continue;
        const double e = 0.5 * vv * vv - 2.0 / qv - qv * ctx;
        tr.values[static_cast<std::size_t>(l)] = e;
        tr.min = std::min(tr.min, e);
        tr.max = std::max(tr.max, e);
    }
    return tr;
}

ZEnergy energy_z(const LoopSignal& z, double interior_fraction) {
    const int n = z.size();
    ZEnergy ze;
    ze.norm_sq = norm_sq(z.values);
    ze.trace.assign(static_cast<std::size_t>(n), kNaN);
    const std::vector<double> dz = loop_derivative(z);
    double z2max = 0.0;
    for (double v : z.values)
        z2max = std::max(z2max, v * v);
    const double floor = interior_fraction * z2max;
    const double n4 = ze.norm_sq * ze.norm_sq;
    for (int l = 0; l < n; ++l) {
        const double zv = z.values[static_cast<std::size_t>(l)];
        if (zv * zv < floor)
            continue;
        const double d = dz[static_cast<std::size_t>(l)];
        ze.trace[static_cast<std::size_t>(l)] = (2.0 * n4 * d * d - 2.0) / (zv * zv);
    }
    const auto zs = zeros_of(z);
    auto dint = loop_derivative_interpolant(z);
    ze.mu.reserve(zs.size());
    for (double tau : zs) {
        const double d = dint(tau);
        ze.mu.push_back(2.0 * n4 * d * d);
    }
    return ze;
}

} // namespace helium::levicivita
