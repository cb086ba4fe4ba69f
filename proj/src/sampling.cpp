#include "csmri/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "csmri/random.hpp"

namespace csmri {

double ProbabilityMap::expected_count() const {
    double acc = 0.0;
    for (double p : probs) acc += p;
    return acc;
}

double normalized_radius(std::size_t row, std::size_t col, std::size_t height, std::size_t width) {
    const double hy = static_cast<double>(height) / 2.0;
    const double hx = static_cast<double>(width) / 2.0;
    const double dy = (static_cast<double>(row) - hy) / hy;
    const double dx = (static_cast<double>(col) - hx) / hx;
    return std::sqrt((dx * dx + dy * dy) / 2.0);
}

ProbabilityMap polynomial_pmap(std::size_t height, std::size_t width, const DensityParams& params) {
    if (height == 0 || width == 0) throw std::invalid_argument("sampling: empty grid");
    if (!(params.undersampling >= 1.0)) {
        throw std::invalid_argument("sampling: undersampling factor < 1");
    }
    if (params.degree < 1) throw std::invalid_argument("sampling: polynomial degree < 1");
    if (!(params.center_radius >= 0.0 && params.center_radius < 1.0)) {
        throw std::invalid_argument("sampling: center radius outside [0, 1)");
    }
    if (!(params.p_min > 0.0 && params.p_min <= 1.0)) {
        throw std::invalid_argument("sampling: p_min outside (0, 1]");
    }

    ProbabilityMap pm;
    pm.height = height;
    pm.width = width;
    pm.params = params;
    const std::size_t n_total = height * width;
    pm.probs.assign(n_total, 1.0);
    if (params.undersampling == 1.0) return pm;

    // Base profile (1 - r)^d outside the center disc; negative marks the disc.
    std::vector<double> base(n_total);
    double center_count = 0.0;
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double rad = normalized_radius(r, c, height, width);
            if (rad <= params.center_radius) {
                base[r * width + c] = -1.0;
                center_count += 1.0;
            } else {
                base[r * width + c] = std::pow(std::max(0.0, 1.0 - rad), params.degree);
            }
        }
    }
    auto total_for = [&](double b) {
        double acc = center_count;
        for (double v : base) {
            if (v >= 0.0) acc += std::clamp(b * v, params.p_min, 1.0);
        }
        return acc;
    };

    const double target = static_cast<double>(n_total) / params.undersampling;
    const double low_sum = total_for(0.0);
    double max_sum = center_count;
    for (double v : base) {
        if (v >= 0.0) max_sum += v > 0.0 ? 1.0 : params.p_min;
    }
    if (target < low_sum) {
        throw std::domain_error("sampling: target R=" + std::to_string(params.undersampling) +
                                " infeasible, center disc and p_min floor already give " +
                                std::to_string(low_sum) + " expected samples");
    }
    if (target > max_sum) {
        throw std::domain_error("sampling: target R=" + std::to_string(params.undersampling) +
                                " infeasible, at most " + std::to_string(max_sum) +
                                " expected samples reachable");
    }

    double lo = 0.0;
    double hi = 1.0;
    while (total_for(hi) < target) {
        hi *= 2.0;
        if (hi > 1e300) throw std::domain_error("sampling: calibration diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (total_for(mid) < target) lo = mid;
        else hi = mid;
    }
    pm.scale = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n_total; ++i) {
        pm.probs[i] = base[i] < 0.0 ? 1.0 : std::clamp(pm.scale * base[i], params.p_min, 1.0);
    }
    return pm;
}

SamplingMask draw_mask(const ProbabilityMap& pmap, std::uint64_t seed) {
    Rng rng = substream(seed, "mask");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::uint8_t> grid(pmap.probs.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // Always consume one draw per position so masks stay aligned across maps.
        const double u = unif(rng);
        grid[i] = u < pmap.probs[i] ? 1 : 0;
    }
    return SamplingMask(pmap.height, pmap.width, std::move(grid));
}

KSpaceData synthesize(const ComplexImage& x0, const SamplingMask& mask, double snr_db,
                      std::uint64_t seed) {
    if (std::isnan(snr_db)) throw std::invalid_argument("sampling: snr_db is NaN");
    KSpaceData data;
    data.values = forward(x0, mask);
    if (std::isinf(snr_db) && snr_db > 0) return data;
    // ||F x0|| = ||x0|| for the unitary transform.
    const double signal = squared_norm(x0.data);
    data.noise_var =
        signal / (static_cast<double>(x0.size()) * std::pow(10.0, snr_db / 10.0));
    Rng rng = substream(seed, "noise");
    std::normal_distribution<double> gauss(0.0, std::sqrt(data.noise_var / 2.0));
    for (auto& v : data.values) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v += cplx(re, im);
    }
    return data;
}

namespace {

struct Ellipse {
    double intensity, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan table (Toft), coordinates in [-1, 1], y pointing up.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

}  // namespace

ComplexImage shepp_logan(std::size_t height, std::size_t width) {
    if (height < 16 || width < 16) throw std::invalid_argument("sampling: phantom must be >= 16x16");
    ComplexImage img(height, width);
    const double cy = (static_cast<double>(height) - 1.0) / 2.0;
    const double cx = (static_cast<double>(width) - 1.0) / 2.0;
    std::vector<double> acc(height * width, 0.0);
    for (const Ellipse& e : kSheppLogan) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double cphi = std::cos(phi);
        const double sphi = std::sin(phi);
        // Only scan the rows of the ellipse's bounding box.
        const double extent = std::max(e.a, e.b);
        const double y_hi = e.y0 + extent;
        const double y_lo = e.y0 - extent;
        const auto row_lo = static_cast<long>(std::floor(cy - y_hi * cy));
        const auto row_hi = static_cast<long>(std::ceil(cy - y_lo * cy));
        for (long r = std::max(0L, row_lo); r <= std::min<long>(row_hi, static_cast<long>(height) - 1);
             ++r) {
            const double y = (cy - static_cast<double>(r)) / cy - e.y0;
            for (std::size_t c = 0; c < width; ++c) {
                const double x = (static_cast<double>(c) - cx) / cx - e.x0;
                const double u = x * cphi + y * sphi;
                const double v = -x * sphi + y * cphi;
                if ((u * u) / (e.a * e.a) + (v * v) / (e.b * e.b) <= 1.0) {
                    acc[static_cast<std::size_t>(r) * width + c] += e.intensity;
                }
            }
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) img.data[i] = cplx(std::clamp(acc[i], 0.0, 1.0), 0.0);
    return img;
}

}  // namespace csmri
