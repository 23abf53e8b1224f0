#include "helium/quadrature.hpp"
#include "helium/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace helium {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::fabs(resk);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        fv1[j] = f(c - x);
        fv2[j] = f(c + x);
        const double sum = fv1[j] + fv2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
        if (j % 2 == 1)
            resg += kWg[j / 2] * sum;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::fabs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
    resasc *= std::fabs(h);
    resabs *= std::fabs(h);

    Panel p;
    p.a = a;
    p.b = b;
    p.value = resk * h;
    // QUADPACK-style error heuristic.
    double err = std::fabs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * 2.220446049250313e-16 * resabs;
    p.error = std::max(err, eps50 * 1e-4);
    return p;
}

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const Quadrature& opts) {
    if (!(opts.abs_tol > 0.0) || !(opts.rel_tol > 0.0))
        throw DomainError("quadrature: tolerances must be positive");
    if (a == b)
        return {0.0, 0.0, 0};

    std::priority_queue<Panel> heap;
    Panel first = gk15(f, a, b);
    double value = first.value;
    double error = first.error;
    heap.push(first);
    int panels = 1;

    auto tolerance = [&](double v) {
        return std::max(opts.abs_tol, opts.rel_tol * std::fabs(v));
    };

    while (error > tolerance(value) && panels < opts.max_panels) {
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval no longer splittable in double precision
            heap.push(worst);
            break;
        }
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }

    if (error > tolerance(value))
        throw AccuracyError("adaptive quadrature: tolerance unreachable within panel budget");
    return {value, error, panels};
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> f, double a,
                                       double b, const Quadrature& opts)
    : f_(std::move(f)), a_(a), b_(b) {
    if (!(opts.abs_tol > 0.0) || !(opts.rel_tol > 0.0))
        throw DomainError("quadrature: tolerances must be positive");
    std::priority_queue<Panel> heap;
    Panel first = gk15(f_, a, b);
    double value = first.value;
    double error = first.error;
    heap.push(first);
    int panels = 1;
    auto tolerance = [&](double v) {
        return std::max(opts.abs_tol, opts.rel_tol * std::fabs(v));
    };
    while (error > tolerance(value) && panels < opts.max_panels) {
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            heap.push(worst); // unsplittable; keep it in the panel table
            break;
        }
        Panel left = gk15(f_, worst.a, mid);
        Panel right = gk15(f_, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    if (error > tolerance(value))
        throw AccuracyError("cumulative quadrature: tolerance unreachable within panel budget");

    std::vector<Panel> list;
    list.reserve(heap.size());
    while (!heap.empty()) {
        list.push_back(heap.top());
        heap.pop();
    }
    std::sort(list.begin(), list.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    edges_.reserve(list.size() + 1);
    prefix_.reserve(list.size() + 1);
    edges_.push_back(a);
    prefix_.push_back(0.0);
    double acc = 0.0;
    for (const Panel& p : list) {
        acc += p.value;
        edges_.push_back(p.b);
        prefix_.push_back(acc);
    }
    total_ = acc;
}

double CumulativeIntegral::eval(double x) const {
    if (x <= a_)
        return 0.0;
    if (x >= b_)
        return total_;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    const std::size_t idx = static_cast<std::size_t>(it - edges_.begin()) - 1;
    const double lo = edges_[idx];
    if (x == lo)
        return prefix_[idx];
    return prefix_[idx] + gk15(f_, lo, x).value;
}

} // namespace helium
