#include "csmri/denoise.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csmri {

namespace {

double magnitude(const cplx& v) { return std::sqrt(std::norm(v)); }

void check_threshold(double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("denoise: threshold must be >= 0");
}

}  // namespace

void soft_threshold_inplace(std::span<cplx> r, double t) {
    check_threshold(t);
    if (t == 0.0) return;
    for (auto& v : r) {
        const double mag = magnitude(v);
        v = mag > t ? v * (1.0 - t / mag) : cplx{0.0, 0.0};
    }
}

std::vector<cplx> soft_threshold(std::span<const cplx> r, double t) {
    std::vector<cplx> out(r.begin(), r.end());
    soft_threshold_inplace(out, t);
    return out;
}

double sure_risk(std::span<const cplx> r, double tau, double t) {
    if (!(tau > 0.0)) throw std::invalid_argument("denoise: SURE requires tau > 0");
    check_threshold(t);
    double residual = 0.0;
    double divergence = 0.0;
    for (const auto& v : r) {
        const double mag = magnitude(v);
        if (mag > t) {
            residual += t * t;
            divergence += 2.0 - t / mag;
        } else {
            residual += mag * mag;
        }
    }
    return residual - static_cast<double>(r.size()) * tau + tau * divergence;
}

namespace {

// LSD radix sort of non-negative doubles by their IEEE-754 bit patterns,
// which order exactly like the values themselves.
void radix_sort_nonnegative(std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::uint64_t> keys(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = std::bit_cast<std::uint64_t>(values[i]);
    for (int shift = 0; shift < 64; shift += 8) {
        std::array<std::size_t, 257> count{};
        for (std::uint64_t k : keys) ++count[((k >> shift) & 0xff) + 1];
        if (count[((keys[0] >> shift) & 0xff) + 1] == n) continue;  // digit constant
        for (std::size_t d = 0; d < 256; ++d) count[d + 1] += count[d];
        for (std::uint64_t k : keys) scratch[count[(k >> shift) & 0xff]++] = k;
        keys.swap(scratch);
    }
    for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<double>(keys[i]);
}

// Global minimizer of SURE over t >= 0 given ascending magnitudes. With m
// magnitudes at or below t,
//   SURE(t) = sum_{i<m} mag_i^2 + (n-m) t^2 - n tau + tau (2(n-m) - t sum_{i>=m} 1/mag_i),
// a convex quadratic on each interval [mag_m, mag_{m+1}) that drops by tau at
// every magnitude. The minimum is therefore either at an interval's left end
// (0 or a data magnitude) or at the interval's stationary point.
double sure_minimizer_sorted(const std::vector<double>& mag, double tau) {
    const std::size_t n = mag.size();
    std::vector<double> suffix_inv(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        suffix_inv[i] = suffix_inv[i + 1] + (mag[i] > 0.0 ? 1.0 / mag[i] : 0.0);
    }
    const double n_d = static_cast<double>(n);
    double best_t = 0.0;
    double best = std::numeric_limits<double>::infinity();
    double prefix_sq = 0.0;
    std::size_t i = 0;
    // Magnitudes equal to the interval start all map to zero.
    auto absorb = [&](double t) {
        while (i < n && mag[i] <= t) {
            prefix_sq += mag[i] * mag[i];
            ++i;
        }
    };
    auto consider = [&](double t) {
        const double above = static_cast<double>(n - i);
        const double risk =
            prefix_sq + above * t * t - n_d * tau + tau * (2.0 * above - t * suffix_inv[i]);
        if (risk < best) {
            best = risk;
            best_t = t;
        }
    };
    double start = 0.0;
    absorb(start);
    while (true) {
        consider(start);
        if (i == n) break;
        const double end = mag[i];
        const double stationary = tau * suffix_inv[i] / (2.0 * static_cast<double>(n - i));
        if (stationary > start && stationary < end) consider(stationary);
        start = end;
        absorb(start);
    }
    return best_t;
}

}  // namespace

double select_threshold(std::span<const cplx> r, double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("denoise: tau must be >= 0");
    if (r.empty()) throw std::invalid_argument("denoise: empty subband");
    if (tau == 0.0) return 0.0;
    std::vector<double> mag(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) mag[i] = magnitude(r[i]);
    radix_sort_nonnegative(mag);
    return sure_minimizer_sorted(mag, tau);
}

double average_derivative(std::span<const cplx> r, double t) {
    check_threshold(t);
    if (r.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : r) {
        const double mag = magnitude(v);
        if (mag > t) acc += 1.0 - t / (2.0 * mag);
    }
    return acc / static_cast<double>(r.size());
}

DenoiseResult denoise_colored(const WaveletCoeffs& r, const SubbandVector& tau) {
    const std::size_t count = r.layout.count();
    if (tau.size() != count) {
        throw std::invalid_argument("denoise: tau has " + std::to_string(tau.size()) +
                                    " entries, layout has " + std::to_string(count) + " subbands");
    }
    DenoiseResult out;
    out.w = r;
    out.alpha.resize(count);
    out.lambda.resize(count);
    out.threshold.resize(count);
    std::vector<double> mag;
    std::vector<double> sorted;
    for (std::size_t j = 0; j < count; ++j) {
        if (!(tau[j] >= 0.0)) {
            throw std::invalid_argument("denoise: negative variance in subband " + std::to_string(j));
        }
        auto band = subband_view(out.w, j);
        mag.resize(band.size());
        for (std::size_t i = 0; i < band.size(); ++i) mag[i] = magnitude(band[i]);
        double t = 0.0;
        if (tau[j] > 0.0) {
            sorted = mag;
            radix_sort_nonnegative(sorted);
            t = sure_minimizer_sorted(sorted, tau[j]);
        }
        double divergence = 0.0;
        if (t > 0.0) {
            for (std::size_t i = 0; i < band.size(); ++i) {
                if (mag[i] > t) {
                    const double shrink = t / mag[i];
                    divergence += 1.0 - 0.5 * shrink;
                    band[i] *= 1.0 - shrink;
                } else {
                    band[i] = 0.0;
                }
            }
        } else {
            for (double m : mag) divergence += m > 0.0 ? 1.0 : 0.0;
        }
        out.alpha[j] = divergence / static_cast<double>(band.size());
        out.threshold[j] = t;
        out.lambda[j] = tau[j] > 0.0 ? t / tau[j] : 0.0;
    }
    return out;
}

}  // namespace csmri
