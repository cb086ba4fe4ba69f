#include "csmri/vdamp.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "csmri/diagnostics.hpp"

namespace csmri::vdamp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_problem(const KSpaceData& y, const SamplingMask& mask, const ProbabilityMap& pmap) {
    if (y.values.size() != mask.count()) {
        throw std::invalid_argument("vdamp: measurement length does not match the mask");
    }
    if (pmap.height != mask.height() || pmap.width != mask.width() ||
        pmap.probs.size() != mask.total()) {
        throw std::invalid_argument("vdamp: probability map does not match the mask");
    }
}

}  // namespace

std::vector<double> atom_spectrum(const SubbandLayout& layout, std::size_t j, std::size_t atom) {
    WaveletCoeffs unit(layout);
    const Subband& band = layout.at(j);
    if (atom >= band.length()) throw std::out_of_range("vdamp: atom index outside subband");
    unit.values[band.offset + atom] = 1.0;
    const ComplexImage k = fft2c(idwt(unit));
    std::vector<double> profile(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) profile[i] = std::norm(k.data[i]);
    return profile;
}

SubbandSpectra compute_spectra(const SubbandLayout& layout) {
    SubbandSpectra spectra;
    spectra.layout = layout;
    spectra.profiles.reserve(layout.count());
    for (std::size_t j = 0; j < layout.count(); ++j) {
        spectra.profiles.push_back(atom_spectrum(layout, j, 0));
    }
    return spectra;
}

SubbandVector tau_update(std::span<const cplx> z, const SamplingMask& mask,
                         const ProbabilityMap& pmap, double noise_var,
                         const SubbandSpectra& spectra) {
    if (z.size() != mask.count()) throw std::invalid_argument("vdamp: residual length mismatch");
    if (pmap.probs.size() != mask.total()) throw std::invalid_argument("vdamp: pmap size mismatch");
    if (spectra.layout.total() != mask.total()) {
        throw std::invalid_argument("vdamp: spectra do not match the mask grid");
    }
    const auto& idx = mask.centered_indices();
    // Per-measurement weight p^-1 [(p^-1 - 1)|z|^2 + sigma^2].
    std::vector<double> weight(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double p = pmap.probs[idx[i]];
        if (!(p > 0.0)) throw std::domain_error("vdamp: sampled position with zero probability");
        const double inv_p = 1.0 / p;
        weight[i] = inv_p * ((inv_p - 1.0) * std::norm(z[i]) + noise_var);
    }
    SubbandVector tau(spectra.profiles.size(), 0.0);
    for (std::size_t j = 0; j < tau.size(); ++j) {
        const auto& m = spectra.profiles[j];
        double acc = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i) acc += m[idx[i]] * weight[i];
        tau[j] = acc;
    }
    return tau;
}

State initial_state(const SubbandLayout& layout) {
    State s;
    s.r_tilde = WaveletCoeffs(layout);
    s.r = WaveletCoeffs(layout);
    s.w_hat = WaveletCoeffs(layout);
    s.tau.assign(layout.count(), 0.0);
    s.alpha.assign(layout.count(), 0.0);
    s.lambda.assign(layout.count(), 0.0);
    s.threshold.assign(layout.count(), 0.0);
    return s;
}

State iterate(State state, const KSpaceData& y, const SamplingMask& mask,
              const ProbabilityMap& pmap, const SubbandSpectra& spectra) {
    check_problem(y, mask, pmap);
    const SubbandLayout& layout = state.r_tilde.layout;

    // z = y - Phi Psi^H r~
    const std::vector<cplx> predicted = forward(idwt(state.r_tilde), mask);
    state.z.resize(y.values.size());
    for (std::size_t i = 0; i < state.z.size(); ++i) state.z[i] = y.values[i] - predicted[i];

    // r = r~ + Psi Phi^H P^-1 z
    const auto& idx = mask.centered_indices();
    std::vector<cplx> compensated(state.z.size());
    for (std::size_t i = 0; i < compensated.size(); ++i) {
        compensated[i] = state.z[i] / pmap.probs[idx[i]];
    }
    state.r = dwt(adjoint(compensated, mask), layout.scales());
    for (std::size_t i = 0; i < state.r.size(); ++i) state.r.values[i] += state.r_tilde.values[i];

    state.tau = tau_update(state.z, mask, pmap, y.noise_var, spectra);

    DenoiseResult den = denoise_colored(state.r, state.tau);
    state.w_hat = std::move(den.w);
    state.lambda = std::move(den.lambda);
    state.threshold = std::move(den.threshold);
    state.alpha = std::move(den.alpha);

    state.alpha_clamped = false;
    for (double& a : state.alpha) {
        if (a >= kAlphaCeiling) {
            a = kAlphaCeiling;
            state.alpha_clamped = true;
        }
    }

    // Onsager correction, alpha broadcast per subband.
    for (std::size_t j = 0; j < layout.count(); ++j) {
        const double a = state.alpha[j];
        const double inv = 1.0 / (1.0 - a);
        auto out = subband_view(state.r_tilde, j);
        auto w = subband_view(state.w_hat, j);
        auto r = subband_view(state.r, j);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (w[i] - a * r[i]) * inv;
    }
    ++state.k;
    return state;
}

ComplexImage finalize(const WaveletCoeffs& w_hat, const KSpaceData& y, const SamplingMask& mask) {
    if (y.values.size() != mask.count()) {
        throw std::invalid_argument("vdamp: measurement length does not match the mask");
    }
    ComplexImage x = idwt(w_hat);
    const std::vector<cplx> predicted = forward(x, mask);
    std::vector<cplx> residual(predicted.size());
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = y.values[i] - predicted[i];
    const ComplexImage correction = adjoint(residual, mask);
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] += correction.data[i];
    return x;
}

Result run(const KSpaceData& y, const SamplingMask& mask, const ProbabilityMap& pmap,
           const Options& options) {
    if (options.iterations < 1) throw std::invalid_argument("vdamp: iterations must be >= 1");
    check_problem(y, mask, pmap);
    const SubbandLayout layout(mask.height(), mask.width(), options.scales);

    Result result;
    result.trace.algorithm = "vdamp";
    auto start = std::chrono::steady_clock::now();
    const SubbandSpectra spectra = compute_spectra(layout);
    result.trace.precompute_seconds = seconds_since(start);

    std::optional<WaveletCoeffs> w0;
    if (options.ground_truth) {
        if (options.ground_truth->height != mask.height() ||
            options.ground_truth->width != mask.width()) {
            throw std::invalid_argument("vdamp: ground truth shape does not match the mask");
        }
        w0 = dwt(*options.ground_truth, options.scales);
    }

    State state = initial_state(layout);
    for (int k = 0; k < options.iterations; ++k) {
        start = std::chrono::steady_clock::now();
        state = iterate(std::move(state), y, mask, pmap, spectra);
        IterationRecord rec;
        rec.seconds = seconds_since(start);
        rec.iter = k;
        rec.tau = state.tau;
        rec.threshold = state.threshold;
        rec.alpha = state.alpha;
        rec.alpha_clamped = state.alpha_clamped;
        if (w0) {
            rec.nmse_db = nmse_db(finalize(state.w_hat, y, mask), *options.ground_truth);
            rec.subband_nmse_db = subband_nmse(state.r, *w0);
            rec.tau_nmse_db = predicted_subband_nmse(state.tau, *w0);
        }
        result.trace.records.push_back(std::move(rec));
        if (options.on_iteration) options.on_iteration(state);
    }
    result.image = finalize(state.w_hat, y, mask);
    return result;
}

}  // namespace csmri::vdamp
