#include "csmri/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace csmri {

double to_db(double ratio) {
    if (!(ratio > 0.0)) return ratio == 0.0 ? kNmseFloorDb : std::numeric_limits<double>::quiet_NaN();
    return std::max(kNmseFloorDb, 10.0 * std::log10(ratio));
}

double nmse_db(std::span<const cplx> estimate, std::span<const cplx> truth) {
    if (estimate.size() != truth.size()) throw std::invalid_argument("nmse: size mismatch");
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        err += std::norm(estimate[i] - truth[i]);
        ref += std::norm(truth[i]);
    }
    if (ref == 0.0) throw std::invalid_argument("nmse: reference has zero energy");
    return to_db(err / ref);
}

double nmse_db(const ComplexImage& estimate, const ComplexImage& truth) {
    if (!estimate.same_shape(truth)) throw std::invalid_argument("nmse: shape mismatch");
    return nmse_db(std::span<const cplx>(estimate.data), std::span<const cplx>(truth.data));
}

SubbandVector subband_nmse(const WaveletCoeffs& estimate, const WaveletCoeffs& truth) {
    if (!(estimate.layout == truth.layout)) throw std::invalid_argument("nmse: layout mismatch");
    SubbandVector out(truth.layout.count());
    for (std::size_t j = 0; j < out.size(); ++j) {
        auto e = subband_view(estimate, j);
        auto t = subband_view(truth, j);
        double err = 0.0;
        double ref = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            err += std::norm(e[i] - t[i]);
            ref += std::norm(t[i]);
        }
        out[j] = ref > 0.0 ? to_db(err / ref) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

SubbandVector predicted_subband_nmse(const SubbandVector& tau, const WaveletCoeffs& truth) {
    if (tau.size() != truth.layout.count()) throw std::invalid_argument("nmse: tau size mismatch");
    SubbandVector out(tau.size());
    for (std::size_t j = 0; j < tau.size(); ++j) {
        const double ref = squared_norm(subband_view(truth, j));
        const double n_j = static_cast<double>(truth.layout[j].length());
        out[j] = ref > 0.0 ? to_db(tau[j] * n_j / ref) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

const char* to_string(Component c) { return c == Component::real ? "real" : "imag"; }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0, 1)");
    // Acklam's rational approximation (relative error 1.15e-9) followed by one
    // Halley step against erfc, which brings the error to machine precision.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x = 0.0;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

namespace {

struct Moments {
    double mean = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

Moments central_moments(std::span<const double> x) {
    Moments m;
    const double n = static_cast<double>(x.size());
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (double v : x) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

QQData qq_data_real(std::span<const double> samples, std::size_t n_quantiles) {
    if (n_quantiles < 10) throw std::invalid_argument("qq_data: need at least 10 quantiles");
    if (samples.size() < n_quantiles) {
        throw std::invalid_argument("qq_data: fewer samples than quantiles");
    }
    const Moments mom = central_moments(samples);
    if (!(mom.m2 > 0.0)) throw std::invalid_argument("qq_data: zero-variance input");
    const double sd = std::sqrt(mom.m2);
    std::vector<double> z(samples.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (samples[i] - mom.mean) / sd;
    std::sort(z.begin(), z.end());

    QQData qq;
    qq.points.reserve(n_quantiles);
    std::vector<double> theory(n_quantiles), empirical(n_quantiles);
    const double n = static_cast<double>(z.size());
    for (std::size_t i = 0; i < n_quantiles; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n_quantiles);
        // Hazen-type interpolation of the sorted sample at probability p.
        const double pos = std::clamp(p * n - 0.5, 0.0, n - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, z.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        theory[i] = normal_quantile(p);
        empirical[i] = z[lo] + frac * (z[hi] - z[lo]);
        qq.points.emplace_back(theory[i], empirical[i]);
    }
    qq.correlation = pearson(theory, empirical);
    return qq;
}

std::pair<QQData, QQData> qq_data(std::span<const cplx> residual, std::size_t n_quantiles) {
    std::vector<double> re(residual.size()), im(residual.size());
    for (std::size_t i = 0; i < residual.size(); ++i) {
        re[i] = residual[i].real();
        im[i] = residual[i].imag();
    }
    QQData a = qq_data_real(re, n_quantiles);
    a.component = Component::real;
    QQData b = qq_data_real(im, n_quantiles);
    b.component = Component::imag;
    return {std::move(a), std::move(b)};
}

GaussianityStats gaussianity_stats(std::span<const cplx> residual) {
    if (residual.size() < 100) throw std::invalid_argument("gaussianity_stats: need >= 100 samples");
    std::vector<double> re(residual.size()), im(residual.size());
    for (std::size_t i = 0; i < residual.size(); ++i) {
        re[i] = residual[i].real();
        im[i] = residual[i].imag();
    }
    const Moments mr = central_moments(re);
    const Moments mi = central_moments(im);
    if (!(mr.m2 > 0.0) || !(mi.m2 > 0.0)) {
        throw std::invalid_argument("gaussianity_stats: zero-variance component");
    }
    GaussianityStats s;
    s.excess_kurtosis_real = mr.m4 / (mr.m2 * mr.m2) - 3.0;
    s.excess_kurtosis_imag = mi.m4 / (mi.m2 * mi.m2) - 3.0;
    s.skew_real = mr.m3 / std::pow(mr.m2, 1.5);
    s.skew_imag = mi.m3 / std::pow(mi.m2, 1.5);
    s.real_imag_correlation = pearson(re, im);
    return s;
}

}  // namespace csmri
