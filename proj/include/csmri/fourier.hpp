#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csmri/image.hpp"

namespace csmri {

// Sampled k-space positions on a centered (DC at (H/2, W/2)) grid. The
// measurement ordering is row-major over the centered grid.
class SamplingMask {
public:
    SamplingMask() = default;
    // `sampled` is row-major over the centered grid. Throws if no position is sampled.
    SamplingMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> sampled);

    static SamplingMask full(std::size_t height, std::size_t width);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t count() const { return centered_.size(); }  // n
    std::size_t total() const { return height_ * width_; }  // N
    bool sampled(std::size_t centered_index) const { return grid_[centered_index] != 0; }
    const std::vector<std::uint8_t>& grid() const { return grid_; }
    // Centered linear index of measurement i.
    const std::vector<std::size_t>& centered_indices() const { return centered_; }
    // Unshifted (FFT-native) linear index of measurement i.
    const std::vector<std::size_t>& native_indices() const { return native_; }

    bool operator==(const SamplingMask& o) const {
        return height_ == o.height_ && width_ == o.width_ && grid_ == o.grid_;
    }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::uint8_t> grid_;
    std::vector<std::size_t> centered_;
    std::vector<std::size_t> native_;
};

struct KSpaceData {
    std::vector<cplx> values;  // aligned with SamplingMask ordering
    double noise_var = 0.0;    // sigma_eps^2
};

// Map between centered and FFT-native linear indices (even dimensions).
std::size_t centered_to_native(std::size_t centered, std::size_t height, std::size_t width);

// Full unitary 2D DFT, output on the centered grid.
ComplexImage fft2c(const ComplexImage& image);
// Inverse of fft2c.
ComplexImage ifft2c(const ComplexImage& kspace);

// Phi x = M_Omega F x with unitary F.
std::vector<cplx> forward(const ComplexImage& image, const SamplingMask& mask);
// Phi^H y: zero-fill then unitary inverse FFT.
ComplexImage adjoint(std::span<const cplx> measurements, const SamplingMask& mask);

}  // namespace csmri
