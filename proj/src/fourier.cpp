#include "csmri/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

namespace csmri {

namespace {

// FFTW planning is not thread-safe but executing an existing plan on new
// arrays is, so plans are created once under a lock and never destroyed.
class PlanCache {
public:
    fftw_plan get(std::size_t h, std::size_t w, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(h, w, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        auto* scratch = fftw_alloc_complex(h * w);
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), scratch, scratch,
                                          sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (plan == nullptr) throw std::runtime_error("fourier: FFTW plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

// In-place unitary transform of a native-ordered buffer.
void fft_inplace(std::vector<cplx>& data, std::size_t h, std::size_t w, int sign) {
    fftw_plan plan = plan_cache().get(h, w, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(h * w));
    for (auto& z : data) z *= scale;
}

void check_even(std::size_t h, std::size_t w) {
    if (h == 0 || w == 0 || h % 2 != 0 || w % 2 != 0) {
        throw std::invalid_argument("fourier: dimensions must be positive and even");
    }
}

}  // namespace

std::size_t centered_to_native(std::size_t centered, std::size_t height, std::size_t width) {
    const std::size_t r = centered / width;
    const std::size_t c = centered % width;
    return ((r + height / 2) % height) * width + (c + width / 2) % width;
}

SamplingMask::SamplingMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> sampled)
    : height_(height), width_(width), grid_(std::move(sampled)) {
    check_even(height, width);
    if (grid_.size() != height * width) {
        throw std::invalid_argument("fourier: mask grid size does not match dimensions");
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (grid_[i] != 0) {
            grid_[i] = 1;
            centered_.push_back(i);
            native_.push_back(centered_to_native(i, height, width));
        }
    }
    if (centered_.empty()) throw std::invalid_argument("fourier: mask samples no positions");
}

SamplingMask SamplingMask::full(std::size_t height, std::size_t width) {
    return SamplingMask(height, width, std::vector<std::uint8_t>(height * width, 1));
}

ComplexImage fft2c(const ComplexImage& image) {
    check_even(image.height, image.width);
    std::vector<cplx> buf = image.data;
    fft_inplace(buf, image.height, image.width, FFTW_FORWARD);
    ComplexImage out(image.height, image.width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data[i] = buf[centered_to_native(i, image.height, image.width)];
    }
    return out;
}

ComplexImage ifft2c(const ComplexImage& kspace) {
    check_even(kspace.height, kspace.width);
    ComplexImage out(kspace.height, kspace.width);
    for (std::size_t i = 0; i < kspace.size(); ++i) {
        out.data[centered_to_native(i, kspace.height, kspace.width)] = kspace.data[i];
    }
    fft_inplace(out.data, out.height, out.width, FFTW_BACKWARD);
    return out;
}

std::vector<cplx> forward(const ComplexImage& image, const SamplingMask& mask) {
    if (image.height != mask.height() || image.width != mask.width()) {
        throw std::invalid_argument("fourier: image shape " + std::to_string(image.height) + "x" +
                                    std::to_string(image.width) + " does not match mask");
    }
    std::vector<cplx> buf = image.data;
    fft_inplace(buf, image.height, image.width, FFTW_FORWARD);
    const auto& idx = mask.native_indices();
    std::vector<cplx> y(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) y[i] = buf[idx[i]];
    return y;
}

ComplexImage adjoint(std::span<const cplx> measurements, const SamplingMask& mask) {
    if (measurements.size() != mask.count()) {
        throw std::invalid_argument("fourier: measurement length " +
                                    std::to_string(measurements.size()) + " != mask count " +
                                    std::to_string(mask.count()));
    }
    ComplexImage out(mask.height(), mask.width());
    const auto& idx = mask.native_indices();
    for (std::size_t i = 0; i < idx.size(); ++i) out.data[idx[i]] = measurements[i];
    fft_inplace(out.data, out.height, out.width, FFTW_BACKWARD);
    return out;
}

}  // namespace csmri
