#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "csmri/fourier.hpp"
#include "csmri/image.hpp"

namespace csmri {

struct DensityParams {
    int degree = 3;               // polynomial degree d
    double center_radius = 0.06;  // fully sampled disc, fraction of the half-diagonal
    double undersampling = 4.0;   // target R = N / E[n]
    double p_min = 0.08;          // probability floor
};

// Per-frequency Bernoulli probabilities on the centered grid.
struct ProbabilityMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> probs;
    DensityParams params;
    double scale = 1.0;  // calibrated polynomial amplitude

    double expected_count() const;
};

// Normalized radius in [0, 1] of a centered grid position (1 at the corners).
double normalized_radius(std::size_t row, std::size_t col, std::size_t height, std::size_t width);

// p(r) = clamp(b (1 - r)^d, p_min, 1) with p = 1 inside the center disc, b
// calibrated by bisection so that sum(p) = N / R. Throws std::domain_error
// when the target cannot be met and std::invalid_argument on bad parameters.
ProbabilityMap polynomial_pmap(std::size_t height, std::size_t width, const DensityParams& params);

// Independent Bernoulli draw per position.
SamplingMask draw_mask(const ProbabilityMap& pmap, std::uint64_t seed);

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

// y = Phi x0 + CN(0, sigma^2 I) with sigma^2 = ||F x0||^2 / (N 10^(snr_db/10)).
// snr_db = +inf gives noiseless data.
KSpaceData synthesize(const ComplexImage& x0, const SamplingMask& mask, double snr_db,
                      std::uint64_t seed);

// Modified (high-contrast) ten-ellipse Shepp-Logan phantom, real valued in [0, 1].
ComplexImage shepp_logan(std::size_t height, std::size_t width);

}  // namespace csmri
