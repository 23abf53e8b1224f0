#include "helium/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace helium::fourier {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;

// FFTW planning is not thread safe; plans are cached per size and executed
// through the new-array interface on caller-provided buffers.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    void r2c(int n, const double* in, std::complex<double>* out) {
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(mtx_);
            auto it = fwd_.find(n);
            if (it == fwd_.end()) {
                std::vector<double> tmp_in(static_cast<std::size_t>(n));
                std::vector<std::complex<double>> tmp_out(static_cast<std::size_t>(n / 2 + 1));
                plan = fftw_plan_dft_r2c_1d(n, tmp_in.data(),
                                            reinterpret_cast<fftw_complex*>(tmp_out.data()),
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
                fwd_[n] = plan;
            } else {
                plan = it->second;
            }
        }
        fftw_execute_dft_r2c(plan, const_cast<double*>(in),
                             reinterpret_cast<fftw_complex*>(out));
    }

    void c2r(int n, const std::complex<double>* in, double* out) {
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(mtx_);
            auto it = bwd_.find(n);
            if (it == bwd_.end()) {
                std::vector<std::complex<double>> tmp_in(static_cast<std::size_t>(n / 2 + 1));
                std::vector<double> tmp_out(static_cast<std::size_t>(n));
                plan = fftw_plan_dft_c2r_1d(n,
                                            reinterpret_cast<fftw_complex*>(tmp_in.data()),
                                            tmp_out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
                bwd_[n] = plan;
            } else {
                plan = it->second;
            }
        }
        // c2r destroys its input; work on a copy.
        std::vector<std::complex<double>> tmp(in, in + n / 2 + 1);
        fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(tmp.data()), out);
    }

private:
    PlanCache() = default;
    std::mutex mtx_;
    std::map<int, fftw_plan> fwd_, bwd_;
};

} // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    if (n == 0)
        throw std::invalid_argument("rfft: empty input");
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
    PlanCache::instance().r2c(n, x.data(), out.data());
    const double scale = 1.0 / n;
    for (auto& c : out)
        c *= scale;
    return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& coeff, int n) {
    if (static_cast<int>(coeff.size()) != n / 2 + 1)
        throw std::invalid_argument("irfft: coefficient count does not match n");
    std::vector<double> out(static_cast<std::size_t>(n));
    PlanCache::instance().c2r(n, coeff.data(), out.data());
    return out;
}

std::vector<double> derivative_periodic(const std::vector<double>& x, double period,
                                        int order) {
    const int n = static_cast<int>(x.size());
    auto coeff = rfft(x);
    for (int j = 0; j < static_cast<int>(coeff.size()); ++j) {
        const double w = kTwoPi * j / period;
        if (order == 1) {
            coeff[j] *= std::complex<double>(0.0, w);
            if (2 * j == n)
                coeff[j] = 0.0; // Nyquist has no well-defined odd derivative
        } else if (order == 2) {
            coeff[j] *= -w * w;
        } else {
            throw std::invalid_argument("derivative_periodic: order must be 1 or 2");
        }
    }
    return irfft(coeff, n);
}

std::vector<double> upsample_periodic(const std::vector<double>& x, int factor) {
    const int n = static_cast<int>(x.size());
    const int m = n * factor;
    auto coeff = rfft(x);
    std::vector<std::complex<double>> padded(static_cast<std::size_t>(m / 2 + 1), 0.0);
    for (int j = 0; j < static_cast<int>(coeff.size()); ++j)
        padded[j] = coeff[j];
    if (n % 2 == 0 && factor > 1)
        padded[n / 2] *= 0.5; // split the Nyquist mode symmetrically
    return irfft(padded, m);
}

TrigSeries::TrigSeries(const std::vector<double>& samples, double period)
    : coeff_(rfft(samples)), period_(period), n_(static_cast<int>(samples.size())) {}

double TrigSeries::operator()(double x) const {
    const double base = kTwoPi * x / period_;
    double acc = coeff_[0].real();
    const int jmax = static_cast<int>(coeff_.size()) - 1;
    for (int j = 1; j <= jmax; ++j) {
        const double c = std::cos(j * base), s = std::sin(j * base);
        const double w = (2 * j == n_) ? 1.0 : 2.0;
        acc += w * (coeff_[j].real() * c - coeff_[j].imag() * s);
    }
    return acc;
}

double TrigSeries::derivative(double x) const {
    const double base = kTwoPi * x / period_;
    double acc = 0.0;
    const int jmax = static_cast<int>(coeff_.size()) - 1;
    for (int j = 1; j <= jmax; ++j) {
        if (2 * j == n_)
            continue;
        const double w = kTwoPi * j / period_;
        const double c = std::cos(j * base), s = std::sin(j * base);
        // d/dx of 2 Re(coeff e^{i j base}) = 2 Re(i w coeff e^{i j base})
        acc += 2.0 * w * (-coeff_[j].real() * s - coeff_[j].imag() * c);
    }
    return acc;
}

PeriodicAntiderivative::PeriodicAntiderivative(const std::vector<double>& samples,
                                               double period)
    : coeff_(rfft(samples)), period_(period), mean_(coeff_[0].real()),
      n_(static_cast<int>(samples.size())) {}

double PeriodicAntiderivative::operator()(double x) const {
    double acc = mean_ * x;
    const double base = kTwoPi * x / period_;
    const int jmax = static_cast<int>(coeff_.size()) - 1;
    for (int j = 1; j <= jmax; ++j) {
        const double w = kTwoPi * j / period_;
        const double wmode = (2 * j == n_) ? 1.0 : 2.0;
        // integral of wmode * Re(c e^{i w x}) from 0 to x
        const std::complex<double> c = coeff_[j];
        const double re = c.real(), im = c.imag();
        const double s = std::sin(j * base), cs = std::cos(j * base);
        acc += wmode * (re * s + im * (cs - 1.0)) / w;
    }
    return acc;
}

std::vector<double> PeriodicAntiderivative::grid_values() const {
    // Periodic part by termwise division; linear part added back on the grid.
    std::vector<std::complex<double>> div(coeff_.size(), 0.0);
    const int jmax = static_cast<int>(coeff_.size()) - 1;
    for (int j = 1; j <= jmax; ++j) {
        const double w = kTwoPi * j / period_;
        div[j] = coeff_[j] / std::complex<double>(0.0, w);
    }
    if (n_ % 2 == 0) {
        // Real Nyquist mode c cos(w x) integrates to (c/w) sin(w x), which the
        // conjugate-symmetric convention does not represent; its grid values
        // are sin(pi l) = 0, so dropping it is exact on the grid.
        div[static_cast<std::size_t>(n_ / 2)] = 0.0;
    }
    std::vector<double> p = irfft(div, n_);
    std::vector<double> out(static_cast<std::size_t>(n_) + 1);
    const double h = period_ / n_;
    for (int l = 0; l < n_; ++l)
        out[static_cast<std::size_t>(l)] = mean_ * (h * l) + (p[static_cast<std::size_t>(l)] - p[0]);
    out[static_cast<std::size_t>(n_)] = mean_ * period_;
    return out;
}

} // namespace helium::fourier
