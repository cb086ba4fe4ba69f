#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csmri/fourier.hpp"
#include "csmri/sampling.hpp"
#include "test_support.hpp"

using namespace csmri;

namespace {

// Brute-force Shepp-Logan rendering: every pixel tested against every ellipse
// of the modified (Toft) table via the rotated quadratic form.
double reference_phantom_norm(std::size_t n) {
    const double table[10][6] = {
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},          {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
        {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},      {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
        {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},         {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
        {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},       {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
        {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},     {0.1, 0.023, 0.046, 0.06, -0.605, 0.0}};
    double acc = 0.0;
    const double half = (static_cast<double>(n) - 1.0) / 2.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double px = (static_cast<double>(c) - half) / half;
            const double py = (half - static_cast<double>(r)) / half;
            double v = 0.0;
            for (const auto& e : table) {
                const double th = e[5] * std::numbers::pi / 180.0;
                const double ct = std::cos(th), st = std::sin(th);
                const double dx = px - e[3], dy = py - e[4];
                const double q = std::pow(dx * ct + dy * st, 2) / (e[1] * e[1]) +
                                 std::pow(dy * ct - dx * st, 2) / (e[2] * e[2]);
                if (q <= 1.0) v += e[0];
            }
            v = std::min(1.0, std::max(0.0, v));
            acc += v * v;
        }
    }
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("R = 1 gives full sampling") {
    const ProbabilityMap pm = polynomial_pmap(32, 32, {2, 0.05, 1.0, 1e-3});
    for (double p : pm.probs) CHECK(p == 1.0);
    const SamplingMask m = draw_mask(pm, 3);
    CHECK(m.count() == 1024);
}

TEST_CASE("calibration hits the target expected count") {
    const ProbabilityMap pm = polynomial_pmap(64, 64, {2, 0.05, 4.0, 1e-3});
    CHECK(std::abs(pm.expected_count() - 1024.0) <= 0.005 * 1024.0);

    for (int d : {1, 3, 8}) {
        for (double R : {2.0, 4.0, 6.0, 8.0}) {
            const ProbabilityMap p = polynomial_pmap(128, 96, {d, 0.06, R, 0.05});
            const double target = 128.0 * 96.0 / R;
            CHECK(std::abs(p.expected_count() - target) <= 0.005 * target);
        }
    }
}

TEST_CASE("probability map shape invariants") {
    const DensityParams params{3, 0.08, 6.0, 0.05};
    const std::size_t n = 64;
    const ProbabilityMap pm = polynomial_pmap(n, n, params);
    std::vector<std::pair<double, double>> by_radius;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double p = pm.probs[r * n + c];
            const double rad = normalized_radius(r, c, n, n);
            CHECK(p >= params.p_min);
            CHECK(p <= 1.0);
            if (rad <= params.center_radius) CHECK(p == 1.0);
            else by_radius.emplace_back(rad, p);
        }
    }
    std::sort(by_radius.begin(), by_radius.end());
    for (std::size_t i = 1; i < by_radius.size(); ++i) {
        CHECK(by_radius[i].second <= by_radius[i - 1].second + 1e-15);
    }
    CHECK(normalized_radius(n / 2, n / 2, n, n) == 0.0);
    CHECK(normalized_radius(0, 0, n, n) == doctest::Approx(1.0));
}

TEST_CASE("pmap errors") {
    CHECK_THROWS_AS(polynomial_pmap(32, 32, {2, 0.05, 0.5, 1e-3}), std::invalid_argument);
    CHECK_THROWS_AS(polynomial_pmap(32, 32, {0, 0.05, 4.0, 1e-3}), std::invalid_argument);
    CHECK_THROWS_AS(polynomial_pmap(32, 32, {2, 1.0, 4.0, 1e-3}), std::invalid_argument);
    CHECK_THROWS_AS(polynomial_pmap(32, 32, {2, 0.05, 4.0, 0.0}), std::invalid_argument);
    // Center disc alone exceeds N/R.
    CHECK_THROWS_AS(polynomial_pmap(64, 64, {2, 0.9, 4.0, 1e-3}), std::domain_error);
    // Floor alone exceeds N/R.
    CHECK_THROWS_AS(polynomial_pmap(64, 64, {2, 0.05, 8.0, 0.2}), std::domain_error);
}

TEST_CASE("mask draws: determinism, mean count, independence") {
    const ProbabilityMap pm = polynomial_pmap(64, 64, {2, 0.05, 4.0, 1e-3});
    CHECK(draw_mask(pm, 42) == draw_mask(pm, 42));
    CHECK_FALSE(draw_mask(pm, 42) == draw_mask(pm, 43));

    const double mean_target = pm.expected_count();
    double var = 0.0;
    for (double p : pm.probs) var += p * (1.0 - p);
    double total = 0.0;
    const int draws = 500;
    for (int s = 0; s < draws; ++s) total += static_cast<double>(draw_mask(pm, 1000 + static_cast<std::uint64_t>(s)).count());
    const double mean = total / draws;
    CHECK(std::abs(mean - mean_target) <= 3.0 * std::sqrt(var / draws));

    // Pairwise correlation of the indicator grids over 100 seed pairs.
    const ProbabilityMap half = polynomial_pmap(64, 64, {1, 0.0, 2.0, 0.05});
    double worst = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const auto a = draw_mask(half, 5000 + 2 * static_cast<std::uint64_t>(pair)).grid();
        const auto b = draw_mask(half, 5001 + 2 * static_cast<std::uint64_t>(pair)).grid();
        // Correlate the centered residuals (indicator minus probability).
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double da = a[i] - half.probs[i];
            const double db = b[i] - half.probs[i];
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        worst = std::max(worst, std::abs(sab / std::sqrt(saa * sbb)));
    }
    CHECK(worst < 0.05);
}

TEST_CASE("synthesize noise level and statistics") {
    // x0 with ||F x0||^2 = N.
    ComplexImage x0(32, 32);
    for (auto& v : x0.data) v = 1.0;
    const SamplingMask full = SamplingMask::full(32, 32);
    CHECK(synthesize(x0, full, 40.0, 1).noise_var == doctest::Approx(1e-4).epsilon(1e-12));

    const KSpaceData clean = synthesize(x0, full, kNoiseless, 1);
    CHECK(clean.noise_var == 0.0);
    CHECK(test::max_abs_diff(clean.values, forward(x0, full)) == 0.0);

    const ComplexImage phantom = shepp_logan(64, 64);
    const ProbabilityMap pm = polynomial_pmap(64, 64, {2, 0.05, 4.0, 1e-3});
    const SamplingMask m = draw_mask(pm, 9);
    const std::vector<cplx> exact = forward(phantom, m);
    double power = 0.0, re = 0.0, im = 0.0, sigma2 = 0.0;
    const int draws = 200;
    for (int s = 0; s < draws; ++s) {
        const KSpaceData y = synthesize(phantom, m, 20.0, 300 + static_cast<std::uint64_t>(s));
        sigma2 = y.noise_var;
        for (std::size_t i = 0; i < exact.size(); ++i) {
            const cplx e = y.values[i] - exact[i];
            re += e.real() * e.real();
            im += e.imag() * e.imag();
        }
    }
    const double n = static_cast<double>(m.count()) * draws;
    power = (re + im) / n;
    CHECK(std::abs(power - sigma2) <= 0.05 * sigma2);
    CHECK(std::abs(re / n - sigma2 / 2) <= 0.1 * sigma2 / 2);
    CHECK(std::abs(im / n - sigma2 / 2) <= 0.1 * sigma2 / 2);
    CHECK_THROWS(synthesize(phantom, m, std::nan(""), 1));
}

TEST_CASE("Shepp-Logan phantom") {
    const ComplexImage x = shepp_logan(512, 512);
    CHECK(x(256, 256).real() > 0.0);
    CHECK(x(0, 0) == cplx(0.0, 0.0));
    for (const auto& v : x.data) {
        CHECK(v.imag() == 0.0);
        CHECK(v.real() >= 0.0);
        CHECK(v.real() <= 1.0);
    }
    const double ref = reference_phantom_norm(512);
    CHECK(std::abs(std::sqrt(squared_norm(x.data)) - ref) <= 1e-6 * ref);
    CHECK_THROWS(shepp_logan(8, 64));
}
