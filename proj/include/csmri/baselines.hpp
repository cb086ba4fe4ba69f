#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "csmri/fourier.hpp"
#include "csmri/trace.hpp"
#include "csmri/wavelet.hpp"

namespace csmri::baselines {

struct Result {
    ComplexImage image;
    WaveletCoeffs w;  // final wavelet-domain iterate
    RunTrace trace;
};

// 0.5 ||y - Phi Psi^H w||^2 + lambda ||w||_1
double fista_objective(const WaveletCoeffs& w, const KSpaceData& y, const SamplingMask& mask,
                       double lambda);

// FISTA on the synthesis problem with unit step (||Phi^H Phi|| = 1), zero start.
// `start` overrides the zero initialization when given.
Result fista(const KSpaceData& y, const SamplingMask& mask, int scales, double lambda,
             int iterations, const std::optional<ComplexImage>& ground_truth = std::nullopt,
             const std::optional<WaveletCoeffs>& start = std::nullopt);

struct LambdaSearch {
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> nmse_db;  // NMSE at the budget for each grid point
};

// Exhaustive search over `grid` for the lambda minimising NMSE after
// `budget_iters` FISTA iterations; ties go to the smaller lambda.
LambdaSearch tune_lambda(const KSpaceData& y, const SamplingMask& mask, const ComplexImage& truth,
                         int scales, int budget_iters, std::vector<double> grid);

std::vector<double> log_grid(double lo, double hi, int points);

// FISTA with SURE-tuned per-subband soft thresholding, driven by the oracle
// white variance tau_k = ||w0 - r_k||^2 / N and no density compensation.
Result sure_it(const KSpaceData& y, const SamplingMask& mask, int scales,
               const ComplexImage& ground_truth, int iterations,
               const std::function<void(int, const WaveletCoeffs&)>& on_iteration = {});

}  // namespace csmri::baselines
