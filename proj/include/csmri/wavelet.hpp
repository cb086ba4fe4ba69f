#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "csmri/image.hpp"

namespace csmri {

// Detail orientation naming follows the edge direction a subband responds to:
// horizontal = highpass down the columns (lowpass along rows), vertical = the
// transpose, diagonal = highpass in both directions.
enum class Orientation { approx, horizontal, vertical, diagonal };

std::string to_string(Orientation o);

struct Subband {
    int scale = 0;  // 1 is finest, s is coarsest
    Orientation orientation = Orientation::approx;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t length() const { return rows * cols; }
    std::string label() const;  // e.g. "s1_diagonal"

    bool operator==(const Subband&) const = default;
};

// Index map of a 2D Haar decomposition into 1 + 3s contiguous subbands.
// Storage order: coarse approximation first, then (horizontal, vertical,
// diagonal) for scale s down to scale 1. Each subband is row-major.
class SubbandLayout {
public:
    SubbandLayout() = default;
    // Throws std::invalid_argument unless both dimensions are divisible by 2^scales.
    SubbandLayout(std::size_t height, std::size_t width, int scales);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    int scales() const { return scales_; }
    std::size_t total() const { return height_ * width_; }
    std::size_t count() const { return subbands_.size(); }
    const Subband& operator[](std::size_t j) const { return subbands_[j]; }
    const Subband& at(std::size_t j) const;
    const std::vector<Subband>& subbands() const { return subbands_; }

    // Subband index owning flat coefficient position `pos`.
    std::size_t subband_of(std::size_t pos) const;

    bool operator==(const SubbandLayout&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    int scales_ = 0;
    std::vector<Subband> subbands_;
};

struct WaveletCoeffs {
    SubbandLayout layout;
    std::vector<cplx> values;

    WaveletCoeffs() = default;
    explicit WaveletCoeffs(SubbandLayout l) : layout(std::move(l)), values(layout.total()) {}

    std::size_t size() const { return values.size(); }
};

// Throws std::out_of_range for a bad subband index.
std::span<cplx> subband_view(WaveletCoeffs& coeffs, std::size_t j);
std::span<const cplx> subband_view(const WaveletCoeffs& coeffs, std::size_t j);

// Orthonormal Haar analysis at `scales` levels.
WaveletCoeffs dwt(const ComplexImage& image, int scales);
// Synthesis; exact inverse (and adjoint) of dwt.
ComplexImage idwt(const WaveletCoeffs& coeffs);

// Coefficients arranged in the usual pyramid picture (approximation top-left).
ComplexImage pyramid_image(const WaveletCoeffs& coeffs);

}  // namespace csmri
