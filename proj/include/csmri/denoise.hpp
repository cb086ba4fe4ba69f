#pragma once

#include <span>
#include <vector>

#include "csmri/image.hpp"
#include "csmri/wavelet.hpp"

namespace csmri {

// One real value per subband (variances, thresholds or derivatives).
using SubbandVector = std::vector<double>;

// Complex soft thresholding r * max(1 - t/|r|, 0); |r| <= t maps to 0.
std::vector<cplx> soft_threshold(std::span<const cplx> r, double t);
void soft_threshold_inplace(std::span<cplx> r, double t);

// Stein's unbiased estimate of ||soft_threshold(r, t) - w0||^2 for
// r = w0 + CN(0, tau I), i.e. real and imaginary parts each of variance tau/2:
//   ||g - r||^2 - N tau + tau * sum_{|r_i| > t} (2 - t/|r_i|)
double sure_risk(std::span<const cplx> r, double tau, double t);

// Global minimizer of sure_risk over t >= 0, ties toward the smaller
// threshold. Searches 0, every |r_i| and the stationary point of each
// quadratic piece between consecutive magnitudes. tau == 0 returns 0.
double select_threshold(std::span<const cplx> r, double tau);

// Mean over the 2N real coordinates of the diagonal of the soft-threshold
// Jacobian: (1/N) sum_{|r_i| > t} (1 - t / (2|r_i|)).
double average_derivative(std::span<const cplx> r, double t);

struct DenoiseResult {
    WaveletCoeffs w;
    SubbandVector alpha;
    SubbandVector lambda;     // threshold / tau per subband
    SubbandVector threshold;  // absolute threshold per subband
};

// SURE-tuned soft thresholding applied independently to every subband with
// its own noise variance tau_j.
DenoiseResult denoise_colored(const WaveletCoeffs& r, const SubbandVector& tau);

}  // namespace csmri
