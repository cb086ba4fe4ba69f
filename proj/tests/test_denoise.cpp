#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "csmri/denoise.hpp"
#include "test_support.hpp"

using namespace csmri;

namespace {

// Sparse complex ground truth: `support` fraction of unit-modulus spikes.
std::vector<cplx> sparse_truth(std::size_t n, double support, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<cplx> w(n);
    for (auto& v : w) {
        if (u(rng) < support) v = std::polar(1.0, 2.0 * 3.141592653589793 * u(rng));
    }
    return w;
}

std::vector<cplx> add_noise(const std::vector<cplx>& w, double tau, std::uint64_t seed) {
    std::vector<cplx> r = test::random_vector(w.size(), seed, std::sqrt(tau / 2.0));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += w[i];
    return r;
}

double sq_error(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e += std::norm(a[i] - b[i]);
    return e;
}

// Real-coordinate central-difference trace of the soft-threshold Jacobian,
// divided by 2N (the mean over real coordinates times two gives our alpha).
double fd_alpha(std::vector<cplx> r, double t, double h) {
    double trace = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (int part = 0; part < 2; ++part) {
            const cplx step = part == 0 ? cplx(h, 0.0) : cplx(0.0, h);
            const cplx orig = r[i];
            r[i] = orig + step;
            const cplx plus = soft_threshold(std::span<const cplx>(&r[i], 1), t)[0];
            r[i] = orig - step;
            const cplx minus = soft_threshold(std::span<const cplx>(&r[i], 1), t)[0];
            r[i] = orig;
            const cplx d = (plus - minus) / (2.0 * h);
            trace += part == 0 ? d.real() : d.imag();
        }
    }
    return trace / static_cast<double>(r.size());
}

}  // namespace

TEST_CASE("soft threshold examples") {
    const std::vector<cplx> r{{3.0, 4.0}};
    CHECK(soft_threshold(r, 0.0)[0] == cplx(3.0, 4.0));
    CHECK(soft_threshold(r, 5.0)[0] == cplx(0.0, 0.0));
    const cplx half = soft_threshold(r, 2.5)[0];
    CHECK(std::abs(half - cplx(1.5, 2.0)) < 1e-15);
    const std::vector<cplx> zero{{0.0, 0.0}};
    CHECK(soft_threshold(zero, 0.0)[0] == cplx(0.0, 0.0));
    CHECK(soft_threshold(zero, 1.0)[0] == cplx(0.0, 0.0));
    CHECK_THROWS_AS(soft_threshold(r, -1.0), std::invalid_argument);

    std::vector<cplx> inplace{{3.0, 4.0}, {0.1, 0.0}};
    soft_threshold_inplace(inplace, 2.5);
    CHECK(std::abs(inplace[0] - cplx(1.5, 2.0)) < 1e-15);
    CHECK(inplace[1] == cplx(0.0, 0.0));
}

TEST_CASE("soft threshold is non-expansive and phase equivariant") {
    const auto a = test::random_vector(1000, 1);
    const auto b = test::random_vector(1000, 2);
    for (double t : {0.0, 0.3, 1.0, 3.0}) {
        CHECK(std::sqrt(sq_error(soft_threshold(a, t), soft_threshold(b, t))) <=
              std::sqrt(sq_error(a, b)) + 1e-12);
        const cplx rot = std::polar(1.0, 0.7);
        std::vector<cplx> ar(a);
        for (auto& v : ar) v *= rot;
        const auto ga = soft_threshold(a, t);
        const auto gar = soft_threshold(ar, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(gar[i] - rot * ga[i]));
        CHECK(worst < 1e-14);
    }
}

TEST_CASE("SURE limits") {
    const auto r = test::random_vector(500, 3);
    const double tau = 0.7;
    CHECK(sure_risk(r, tau, 0.0) == doctest::Approx(500 * tau).epsilon(1e-12));
    const double big = 1e6;
    CHECK(sure_risk(r, tau, big) == doctest::Approx(squared_norm(r) - 500 * tau).epsilon(1e-12));
    CHECK_THROWS_AS(sure_risk(r, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sure_risk(r, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("SURE is unbiased over Monte Carlo draws") {
    const std::size_t n = 2048;
    const double tau = 0.05;
    const auto w0 = sparse_truth(n, 0.1, 10);
    for (double t : {0.5 * std::sqrt(tau), std::sqrt(tau), 2.0 * std::sqrt(tau)}) {
        const int draws = 500;
        std::vector<double> diff(draws);
        for (int d = 0; d < draws; ++d) {
            const auto r = add_noise(w0, tau, 100 + static_cast<std::uint64_t>(d));
            diff[static_cast<std::size_t>(d)] = sure_risk(r, tau, t) - sq_error(soft_threshold(r, t), w0);
        }
        const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / draws;
        double var = 0.0;
        for (double v : diff) var += (v - mean) * (v - mean);
        const double se = std::sqrt(var / (draws - 1) / draws);
        CHECK(std::abs(mean) <= 3.0 * se);
    }
}

TEST_CASE("select_threshold matches exhaustive grid search") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto w0 = sparse_truth(64, 0.2, 500 + seed);
        const double tau = 0.02 + 0.01 * static_cast<double>(seed);
        const auto r = add_noise(w0, tau, 600 + seed);
        const double t_star = select_threshold(r, tau);
        double max_mag = 0.0;
        for (const auto& v : r) max_mag = std::max(max_mag, std::abs(v));
        const double hi = 1.05 * max_mag;
        const int points = 10000;
        const double spacing = hi / (points - 1);
        double best_t = 0.0, best = sure_risk(r, tau, 0.0);
        for (int i = 1; i < points; ++i) {
            const double t = spacing * i;
            const double s = sure_risk(r, tau, t);
            if (s < best) { best = s; best_t = t; }
        }
        CHECK(std::abs(t_star - best_t) <= spacing);
        CHECK(sure_risk(r, tau, t_star) <= best + 1e-12 * std::abs(best));
    }
}

TEST_CASE("select_threshold regimes") {
    const double tau = 1.0;
    const auto noise = test::random_vector(16384, 7, std::sqrt(tau / 2.0));
    std::vector<double> mags(noise.size());
    for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(noise[i]);
    std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2), mags.end());
    const double median = mags[mags.size() / 2];
    const double t = select_threshold(noise, tau);
    CHECK(t >= median);
    CHECK(sure_risk(noise, tau, t) < sure_risk(noise, tau, 0.0));

    const auto sparse = sparse_truth(4096, 0.1, 8);
    CHECK(select_threshold(sparse, 1e-12) <= 1e-5);
    CHECK(select_threshold(sparse, 0.0) == 0.0);
    CHECK_THROWS(select_threshold(sparse, -1.0));
}

TEST_CASE("average derivative") {
    const auto r = test::random_vector(256, 9);
    CHECK(average_derivative(r, 0.0) == doctest::Approx(1.0));
    double max_mag = 0.0;
    for (const auto& v : r) max_mag = std::max(max_mag, std::abs(v));
    CHECK(average_derivative(r, max_mag) == 0.0);

    double prev = 1.0;
    for (double t = 0.0; t < max_mag; t += 0.05) {
        const double a = average_derivative(r, t);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(a <= prev + 1e-15);
        prev = a;
    }

    // Finite differences, away from the threshold boundary.
    const double h = 1e-6;
    const double t = 0.8;
    std::vector<cplx> away;
    for (const auto& v : test::random_vector(2000, 10)) {
        if (std::abs(std::abs(v) - t) > 10 * h) away.push_back(v);
        if (away.size() == 256) break;
    }
    REQUIRE(away.size() == 256);
    const double fd = fd_alpha(away, t, h) / 2.0;
    const double an = average_derivative(away, t);
    CHECK(std::abs(fd - an) <= 1e-6 * an);
}

TEST_CASE("denoise_colored per subband") {
    const SubbandLayout layout(64, 64, 2);
    WaveletCoeffs r(layout);
    r.values = test::random_vector(layout.total(), 11);

    SUBCASE("near-zero variance is nearly the identity") {
        const DenoiseResult res = denoise_colored(r, SubbandVector(layout.count(), 1e-12));
        CHECK(test::rel_diff(res.w.values, r.values) <= 1e-5);
        for (double a : res.alpha) CHECK(a == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("zero variance is exactly the identity") {
        const DenoiseResult res = denoise_colored(r, SubbandVector(layout.count(), 0.0));
        CHECK(res.w.values == r.values);
        for (double a : res.alpha) CHECK(a == 1.0);
    }
    SUBCASE("outputs are consistent with the components") {
        SubbandVector tau(layout.count());
        for (std::size_t j = 0; j < tau.size(); ++j) tau[j] = 0.2 + 0.3 * static_cast<double>(j);
        const DenoiseResult res = denoise_colored(r, tau);
        for (std::size_t j = 0; j < layout.count(); ++j) {
            const auto in = subband_view(r, j);
            const double t = select_threshold(in, tau[j]);
            CHECK(res.threshold[j] == t);
            CHECK(res.lambda[j] == doctest::Approx(t / tau[j]));
            CHECK(res.alpha[j] == doctest::Approx(average_derivative(in, t)).epsilon(1e-12));
            const auto out = soft_threshold(in, t);
            const auto got = subband_view(res.w, j);
            CHECK(test::max_abs_diff(std::vector<cplx>(got.begin(), got.end()), out) <= 1e-15);
        }
    }
    SUBCASE("subband separability under permutation") {
        SubbandVector tau(layout.count(), 0.5);
        const DenoiseResult base = denoise_colored(r, tau);
        WaveletCoeffs perm = r;
        auto view = subband_view(perm, 3);
        std::reverse(view.begin(), view.end());
        const DenoiseResult moved = denoise_colored(perm, tau);
        for (std::size_t j = 0; j < layout.count(); ++j) {
            auto a = subband_view(base.w, j);
            auto b = subband_view(moved.w, j);
            std::vector<cplx> av(a.begin(), a.end()), bv(b.begin(), b.end());
            if (j == 3) std::reverse(bv.begin(), bv.end());
            CHECK(test::max_abs_diff(av, bv) <= 1e-15);
        }
    }
    CHECK_THROWS(denoise_colored(r, SubbandVector(layout.count() - 1, 1.0)));
    CHECK_THROWS(denoise_colored(r, SubbandVector(layout.count(), -1.0)));
}

TEST_CASE("colored denoising reduces per-subband error on sparse subbands") {
    const SubbandLayout layout(64, 64, 2);
    WaveletCoeffs w0(layout);
    SubbandVector sigma(layout.count());
    for (std::size_t j = 0; j < layout.count(); ++j) {
        const auto truth = sparse_truth(layout[j].length(), 0.3, 40 + j);
        std::copy(truth.begin(), truth.end(), subband_view(w0, j).begin());
        sigma[j] = 0.01 * std::pow(2.0, static_cast<double>(j) / 2.0);
    }
    std::vector<double> in_mse(layout.count(), 0.0), out_mse(layout.count(), 0.0);
    for (int d = 0; d < 50; ++d) {
        WaveletCoeffs r(layout);
        for (std::size_t j = 0; j < layout.count(); ++j) {
            const auto noisy = add_noise(std::vector<cplx>(subband_view(w0, j).begin(), subband_view(w0, j).end()),
                                         sigma[j], 1000 + 100 * static_cast<std::uint64_t>(d) + j);
            std::copy(noisy.begin(), noisy.end(), subband_view(r, j).begin());
        }
        const DenoiseResult res = denoise_colored(r, sigma);
        for (std::size_t j = 0; j < layout.count(); ++j) {
            for (std::size_t i = 0; i < layout[j].length(); ++i) {
                in_mse[j] += std::norm(subband_view(r, j)[i] - subband_view(w0, j)[i]);
                out_mse[j] += std::norm(subband_view(res.w, j)[i] - subband_view(w0, j)[i]);
            }
        }
    }
    for (std::size_t j = 0; j < layout.count(); ++j) CHECK(out_mse[j] <= in_mse[j]);
}
