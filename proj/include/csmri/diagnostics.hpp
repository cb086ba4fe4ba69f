#pragma once

#include <span>
#include <utility>
#include <vector>

#include "csmri/denoise.hpp"
#include "csmri/image.hpp"
#include "csmri/wavelet.hpp"

namespace csmri {

// Reported in place of -inf for exact reconstructions.
inline constexpr double kNmseFloorDb = -320.0;

double to_db(double ratio);  // 10 log10, floored at kNmseFloorDb

// 10 log10(||x - x0||^2 / ||x0||^2). Throws if x0 is zero or shapes differ.
double nmse_db(const ComplexImage& estimate, const ComplexImage& truth);
double nmse_db(std::span<const cplx> estimate, std::span<const cplx> truth);

// Per-subband NMSE in dB; a zero-energy truth subband yields NaN.
SubbandVector subband_nmse(const WaveletCoeffs& estimate, const WaveletCoeffs& truth);

// NMSE predicted by a per-subband variance: 10 log10(N_j tau_j / ||w0_j||^2).
SubbandVector predicted_subband_nmse(const SubbandVector& tau, const WaveletCoeffs& truth);

enum class Component { real, imag };
const char* to_string(Component c);

struct QQData {
    Component component = Component::real;
    std::vector<std::pair<double, double>> points;  // (theoretical, empirical), ascending
    double correlation = 0.0;
};

// Inverse standard normal CDF, |error| below 1e-9 on (0, 1).
double normal_quantile(double p);

// Standardized empirical quantiles of the real and imaginary parts against
// Gaussian quantiles at plotting positions (i - 0.5) / n_quantiles.
std::pair<QQData, QQData> qq_data(std::span<const cplx> residual, std::size_t n_quantiles);
QQData qq_data_real(std::span<const double> samples, std::size_t n_quantiles);

struct GaussianityStats {
    double excess_kurtosis_real = 0.0;
    double excess_kurtosis_imag = 0.0;
    double skew_real = 0.0;
    double skew_imag = 0.0;
    double real_imag_correlation = 0.0;
};

GaussianityStats gaussianity_stats(std::span<const cplx> residual);

}  // namespace csmri
