#include "csmri/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csmri/denoise.hpp"
#include "csmri/diagnostics.hpp"

namespace csmri::baselines {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// u + Psi Phi^H (y - Phi Psi^H u)
WaveletCoeffs gradient_step(const WaveletCoeffs& u, const KSpaceData& y, const SamplingMask& mask) {
    const std::vector<cplx> predicted = forward(idwt(u), mask);
    std::vector<cplx> residual(predicted.size());
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = y.values[i] - predicted[i];
    WaveletCoeffs g = dwt(adjoint(residual, mask), u.layout.scales());
    for (std::size_t i = 0; i < g.size(); ++i) g.values[i] += u.values[i];
    return g;
}

double next_momentum(double t) { return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0; }

void extrapolate(WaveletCoeffs& u, const WaveletCoeffs& w, const WaveletCoeffs& w_prev,
                 double beta) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        u.values[i] = w.values[i] + beta * (w.values[i] - w_prev.values[i]);
    }
}

void check_inputs(const KSpaceData& y, const SamplingMask& mask, int iterations) {
    if (y.values.size() != mask.count()) {
        throw std::invalid_argument("baselines: measurement length does not match the mask");
    }
    if (iterations < 1) throw std::invalid_argument("baselines: iterations must be >= 1");
}

}  // namespace

double fista_objective(const WaveletCoeffs& w, const KSpaceData& y, const SamplingMask& mask,
                       double lambda) {
    const std::vector<cplx> predicted = forward(idwt(w), mask);
    double fit = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) fit += std::norm(y.values[i] - predicted[i]);
    double l1 = 0.0;
    for (const auto& v : w.values) l1 += std::abs(v);
    return 0.5 * fit + lambda * l1;
}

Result fista(const KSpaceData& y, const SamplingMask& mask, int scales, double lambda,
             int iterations, const std::optional<ComplexImage>& ground_truth,
             const std::optional<WaveletCoeffs>& start) {
    if (!(lambda > 0.0)) throw std::invalid_argument("fista: lambda must be > 0");
    check_inputs(y, mask, iterations);
    const SubbandLayout layout(mask.height(), mask.width(), scales);
    std::optional<WaveletCoeffs> w0;
    if (ground_truth) w0 = dwt(*ground_truth, scales);

    Result result;
    result.trace.algorithm = "fista";
    WaveletCoeffs w = start ? *start : WaveletCoeffs(layout);
    if (!(w.layout == layout)) throw std::invalid_argument("fista: start layout mismatch");
    WaveletCoeffs u = w;
    double t = 1.0;
    const SubbandVector thresholds(layout.count(), lambda);
    for (int k = 0; k < iterations; ++k) {
        const auto t0 = Clock::now();
        WaveletCoeffs v = gradient_step(u, y, mask);
        WaveletCoeffs w_next = v;
        soft_threshold_inplace(w_next.values, lambda);
        const double t_next = next_momentum(t);
        u = w_next;
        extrapolate(u, w_next, w, (t - 1.0) / t_next);
        w = std::move(w_next);
        t = t_next;

        IterationRecord rec;
        rec.seconds = seconds_since(t0);
        rec.iter = k;
        rec.threshold = thresholds;
        if (w0) {
            rec.nmse_db = nmse_db(idwt(w), *ground_truth);
            rec.subband_nmse_db = subband_nmse(v, *w0);
        }
        result.trace.records.push_back(std::move(rec));
    }
    result.image = idwt(w);
    result.w = std::move(w);
    return result;
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (points < 1 || !(lo > 0.0) || !(hi >= lo)) {
        throw std::invalid_argument("log_grid: need points >= 1 and 0 < lo <= hi");
    }
    std::vector<double> grid(static_cast<std::size_t>(points));
    if (points == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    return grid;
}

LambdaSearch tune_lambda(const KSpaceData& y, const SamplingMask& mask, const ComplexImage& truth,
                         int scales, int budget_iters, std::vector<double> grid) {
    if (grid.empty()) throw std::invalid_argument("tune_lambda: empty grid");
    std::sort(grid.begin(), grid.end());
    LambdaSearch search;
    search.grid = grid;
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        const Result r = fista(y, mask, scales, lambda, budget_iters);
        const double e = nmse_db(r.image, truth);
        search.nmse_db.push_back(e);
        if (e < best) {
            best = e;
            search.lambda = lambda;
        }
    }
    return search;
}

Result sure_it(const KSpaceData& y, const SamplingMask& mask, int scales,
               const ComplexImage& ground_truth, int iterations,
               const std::function<void(int, const WaveletCoeffs&)>& on_iteration) {
    check_inputs(y, mask, iterations);
    if (ground_truth.height != mask.height() || ground_truth.width != mask.width()) {
        throw std::invalid_argument("sure_it: ground truth shape does not match the mask");
    }
    const SubbandLayout layout(mask.height(), mask.width(), scales);
    const WaveletCoeffs w0 = dwt(ground_truth, scales);
    const double n_total = static_cast<double>(layout.total());

    Result result;
    result.trace.algorithm = "sure_it";
    WaveletCoeffs w(layout);
    WaveletCoeffs u(layout);
    double t = 1.0;
    for (int k = 0; k < iterations; ++k) {
        const auto t0 = Clock::now();
        WaveletCoeffs r = gradient_step(u, y, mask);
        double err = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) err += std::norm(w0.values[i] - r.values[i]);
        const SubbandVector tau(layout.count(), err / n_total);
        DenoiseResult den = denoise_colored(r, tau);
        const double t_next = next_momentum(t);
        u = den.w;
        extrapolate(u, den.w, w, (t - 1.0) / t_next);
        w = std::move(den.w);
        t = t_next;

        IterationRecord rec;
        rec.seconds = seconds_since(t0);
        rec.iter = k;
        rec.tau = tau;
        rec.threshold = den.threshold;
        rec.alpha = den.alpha;
        rec.nmse_db = nmse_db(idwt(w), ground_truth);
        rec.subband_nmse_db = subband_nmse(r, w0);
        rec.tau_nmse_db = predicted_subband_nmse(tau, w0);
        result.trace.records.push_back(std::move(rec));
        if (on_iteration) on_iteration(k, r);
    }
    result.image = idwt(w);
    result.w = std::move(w);
    return result;
}

}  // namespace csmri::baselines
