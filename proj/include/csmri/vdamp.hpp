#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "csmri/denoise.hpp"
#include "csmri/fourier.hpp"
#include "csmri/sampling.hpp"
#include "csmri/trace.hpp"
#include "csmri/wavelet.hpp"

namespace csmri::vdamp {

// |F psi_j|^2 on the centered k-space grid for one atom of each subband; the
// 1 + 3s unique columns of S = |Phi Psi^H|^2.
struct SubbandSpectra {
    SubbandLayout layout;
    std::vector<std::vector<double>> profiles;
};

// Spectrum of the atom at `atom` (position inside subband j).
std::vector<double> atom_spectrum(const SubbandLayout& layout, std::size_t j, std::size_t atom);
SubbandSpectra compute_spectra(const SubbandLayout& layout);

// tau_j = sum_{w in Omega} m_j(w) / p_w * [(1/p_w - 1)|z_w|^2 + sigma^2]
SubbandVector tau_update(std::span<const cplx> z, const SamplingMask& mask,
                         const ProbabilityMap& pmap, double noise_var,
                         const SubbandSpectra& spectra);

struct State {
    WaveletCoeffs r_tilde;  // Onsager-corrected input of the next iteration
    WaveletCoeffs r;        // density-compensated estimate
    std::vector<cplx> z;    // measurement residual
    SubbandVector tau;
    WaveletCoeffs w_hat;
    SubbandVector alpha;
    SubbandVector lambda;
    SubbandVector threshold;
    int k = 0;
    bool alpha_clamped = false;  // set when the last iteration hit the alpha guard
};

inline constexpr double kAlphaCeiling = 1.0 - 1e-9;

State initial_state(const SubbandLayout& layout);

// Lines 3-8 of one VDAMP iteration.
State iterate(State state, const KSpaceData& y, const SamplingMask& mask,
              const ProbabilityMap& pmap, const SubbandSpectra& spectra);

// x = Psi^H w + Phi^H (y - Phi Psi^H w); exactly consistent with y.
ComplexImage finalize(const WaveletCoeffs& w_hat, const KSpaceData& y, const SamplingMask& mask);

struct Options {
    int scales = 4;
    int iterations = 30;
    std::optional<ComplexImage> ground_truth;  // trace metrics only
    std::function<void(const State&)> on_iteration;
};

struct Result {
    ComplexImage image;
    RunTrace trace;
};

Result run(const KSpaceData& y, const SamplingMask& mask, const ProbabilityMap& pmap,
           const Options& options);

}  // namespace csmri::vdamp
