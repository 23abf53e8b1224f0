#pragma once

#include <functional>
#include <vector>

namespace helium {

/// Accuracy controls shared by every quadrature-backed operation.
struct Quadrature {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    /// Panel budget for the globally adaptive scheme. 15 integrand
    /// evaluations per panel keeps the worst case under 1e6 evaluations.
    int max_panels = 60000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // estimated absolute error
    int panels = 0;
};

/// Globally adaptive Gauss-Kronrod 15(7) integration of f over [a, b].
/// Throws AccuracyError when the tolerance is unreachable within the
/// panel budget.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const Quadrature& opts = {});

/// Adaptive panel decomposition of an integral that supports partial
/// (cumulative) evaluation: eval(x) returns the integral over [a, x].
/// Panels are refined until each meets the tolerance split across the
/// interval, so partial sums inherit the accuracy of the full integral.
class CumulativeIntegral {
public:
    CumulativeIntegral(std::function<double(double)> f, double a, double b,
                       const Quadrature& opts = {});

    double total() const { return total_; }
    double eval(double x) const;         // integral over [a, x]
    double lower() const { return a_; }
    double upper() const { return b_; }

private:
    std::function<double(double)> f_;
    double a_, b_, total_;
    std::vector<double> edges_;  // panel boundaries, ascending
    std::vector<double> prefix_; // integral over [a, edges_[i]]
};

} // namespace helium
