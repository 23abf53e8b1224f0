#pragma once

#include <complex>
#include <vector>

namespace helium::fourier {

/// Forward real FFT (FFTW r2c); returns n/2+1 coefficients normalized so
/// that coeff[j] = (1/n) sum_l x_l exp(-2 pi i j l / n).
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

/// Inverse of rfft for an n-point real signal.
std::vector<double> irfft(const std::vector<std::complex<double>>& coeff, int n);

/// Spectral derivative of uniformly sampled data with the given period.
/// order 1 zeroes the Nyquist mode; order 2 keeps it with weight -w^2.
std::vector<double> derivative_periodic(const std::vector<double>& x, double period,
                                        int order = 1);

/// Resample periodic data onto factor*n uniform points by zero padding.
std::vector<double> upsample_periodic(const std::vector<double>& x, int factor);

/// Trigonometric interpolant of periodic samples; evaluation is an O(n)
/// direct mode sum, exact at the sample points.
class TrigSeries {
public:
    TrigSeries(const std::vector<double>& samples, double period);
    double operator()(double x) const;
    double derivative(double x) const;
    double mean() const { return coeff_.empty() ? 0.0 : coeff_[0].real(); }
    double period() const { return period_; }

private:
    std::vector<std::complex<double>> coeff_;
    double period_;
    int n_;
};

/// Antiderivative C(x) = int_0^x f of periodic samples, split into the
/// linear mean part and a periodic remainder handled termwise (exact for
/// band-limited data).
class PeriodicAntiderivative {
public:
    PeriodicAntiderivative(const std::vector<double>& samples, double period);
    double operator()(double x) const;
    /// C at the sample points plus the endpoint: size n+1, first entry 0,
    /// last entry mean*period. Computed by one inverse FFT.
    std::vector<double> grid_values() const;
    double mean() const { return mean_; }
    double total() const { return mean_ * period_; }

private:
    std::vector<std::complex<double>> coeff_; // original spectrum
    double period_;
    double mean_;
    int n_;
};

} // namespace helium::fourier
