#include "csmri/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmri {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Position of a subband inside the Mallat-arranged square of the full image.
std::size_t block_row(const Subband& b) {
    return (b.orientation == Orientation::horizontal || b.orientation == Orientation::diagonal)
               ? b.rows
               : 0;
}
std::size_t block_col(const Subband& b) {
    return (b.orientation == Orientation::vertical || b.orientation == Orientation::diagonal)
               ? b.cols
               : 0;
}

// One analysis level on the top-left h x w block of a row-major buffer with
// row stride `stride`.
void analyze_level(std::vector<cplx>& buf, std::size_t stride, std::size_t h, std::size_t w,
                   std::vector<cplx>& tmp) {
    const std::size_t hw = w / 2;
    tmp.resize(std::max(h, w));
    for (std::size_t r = 0; r < h; ++r) {
        cplx* row = buf.data() + r * stride;
        for (std::size_t c = 0; c < hw; ++c) {
            const cplx a = row[2 * c];
            const cplx b = row[2 * c + 1];
            tmp[c] = (a + b) * kInvSqrt2;
            tmp[hw + c] = (a - b) * kInvSqrt2;
        }
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(w), row);
    }
    // Columns: combine row pairs so the inner loop runs along contiguous memory.
    const std::size_t hh = h / 2;
    tmp.resize(h * w);
    for (std::size_t r = 0; r < hh; ++r) {
        const cplx* even = buf.data() + (2 * r) * stride;
        const cplx* odd = even + stride;
        cplx* lo = tmp.data() + r * w;
        cplx* hi = tmp.data() + (hh + r) * w;
        for (std::size_t c = 0; c < w; ++c) {
            lo[c] = (even[c] + odd[c]) * kInvSqrt2;
            hi[c] = (even[c] - odd[c]) * kInvSqrt2;
        }
    }
    for (std::size_t r = 0; r < h; ++r) {
        std::copy(tmp.data() + r * w, tmp.data() + (r + 1) * w, buf.data() + r * stride);
    }
}

void synthesize_level(std::vector<cplx>& buf, std::size_t stride, std::size_t h, std::size_t w,
                      std::vector<cplx>& tmp) {
    const std::size_t hh = h / 2;
    tmp.resize(h * w);
    for (std::size_t r = 0; r < hh; ++r) {
        const cplx* lo = buf.data() + r * stride;
        const cplx* hi = buf.data() + (hh + r) * stride;
        cplx* even = tmp.data() + (2 * r) * w;
        cplx* odd = even + w;
        for (std::size_t c = 0; c < w; ++c) {
            even[c] = (lo[c] + hi[c]) * kInvSqrt2;
            odd[c] = (lo[c] - hi[c]) * kInvSqrt2;
        }
    }
    for (std::size_t r = 0; r < h; ++r) {
        std::copy(tmp.data() + r * w, tmp.data() + (r + 1) * w, buf.data() + r * stride);
    }
    const std::size_t hw = w / 2;
    for (std::size_t r = 0; r < h; ++r) {
        cplx* row = buf.data() + r * stride;
        for (std::size_t c = 0; c < hw; ++c) {
            const cplx lo = row[c];
            const cplx hi = row[hw + c];
            tmp[2 * c] = (lo + hi) * kInvSqrt2;
            tmp[2 * c + 1] = (lo - hi) * kInvSqrt2;
        }
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(w), row);
    }
}

}  // namespace

std::string to_string(Orientation o) {
    switch (o) {
        case Orientation::approx: return "approx";
        case Orientation::horizontal: return "horizontal";
        case Orientation::vertical: return "vertical";
        case Orientation::diagonal: return "diagonal";
    }
    return "unknown";
}

std::string Subband::label() const {
    return "s" + std::to_string(scale) + "_" + to_string(orientation);
}

SubbandLayout::SubbandLayout(std::size_t height, std::size_t width, int scales)
    : height_(height), width_(width), scales_(scales) {
    if (scales < 1) throw std::invalid_argument("wavelet: scales must be >= 1");
    if (scales >= 30) throw std::invalid_argument("wavelet: too many scales");
    const std::size_t factor = std::size_t{1} << scales;
    if (height == 0 || width == 0 || height % factor != 0 || width % factor != 0) {
        throw std::invalid_argument("wavelet: image dimensions " + std::to_string(height) + "x" +
                                    std::to_string(width) + " are not divisible by 2^" +
                                    std::to_string(scales));
    }
    std::size_t offset = 0;
    auto push = [&](int scale, Orientation o) {
        Subband b;
        b.scale = scale;
        b.orientation = o;
        b.offset = offset;
        b.rows = height >> scale;
        b.cols = width >> scale;
        offset += b.length();
        subbands_.push_back(b);
    };
    push(scales, Orientation::approx);
    for (int scale = scales; scale >= 1; --scale) {
        push(scale, Orientation::horizontal);
        push(scale, Orientation::vertical);
        push(scale, Orientation::diagonal);
    }
}

const Subband& SubbandLayout::at(std::size_t j) const {
    if (j >= subbands_.size()) {
        throw std::out_of_range("wavelet: subband index " + std::to_string(j) + " out of range");
    }
    return subbands_[j];
}

std::size_t SubbandLayout::subband_of(std::size_t pos) const {
    if (pos >= total()) throw std::out_of_range("wavelet: coefficient index out of range");
    auto it = std::upper_bound(subbands_.begin(), subbands_.end(), pos,
                               [](std::size_t p, const Subband& b) { return p < b.offset; });
    return static_cast<std::size_t>(std::distance(subbands_.begin(), it)) - 1;
}

std::span<cplx> subband_view(WaveletCoeffs& coeffs, std::size_t j) {
    const Subband& b = coeffs.layout.at(j);
    return std::span<cplx>(coeffs.values).subspan(b.offset, b.length());
}

std::span<const cplx> subband_view(const WaveletCoeffs& coeffs, std::size_t j) {
    const Subband& b = coeffs.layout.at(j);
    return std::span<const cplx>(coeffs.values).subspan(b.offset, b.length());
}

WaveletCoeffs dwt(const ComplexImage& image, int scales) {
    SubbandLayout layout(image.height, image.width, scales);
    if (image.data.size() != layout.total()) {
        throw std::invalid_argument("wavelet: image buffer does not match its dimensions");
    }
    std::vector<cplx> buf = image.data;
    std::vector<cplx> tmp;
    const std::size_t stride = image.width;
    for (int level = 1; level <= scales; ++level) {
        analyze_level(buf, stride, image.height >> (level - 1), image.width >> (level - 1), tmp);
    }

    WaveletCoeffs out(std::move(layout));
    for (const Subband& b : out.layout.subbands()) {
        const std::size_t r0 = block_row(b);
        const std::size_t c0 = block_col(b);
        cplx* dst = out.values.data() + b.offset;
        for (std::size_t r = 0; r < b.rows; ++r) {
            const cplx* src = buf.data() + (r0 + r) * stride + c0;
            std::copy(src, src + b.cols, dst + r * b.cols);
        }
    }
    return out;
}

ComplexImage pyramid_image(const WaveletCoeffs& coeffs) {
    const SubbandLayout& layout = coeffs.layout;
    if (coeffs.values.size() != layout.total() || layout.count() == 0) {
        throw std::invalid_argument("wavelet: coefficient vector does not match its layout");
    }
    ComplexImage img(layout.height(), layout.width());
    const std::size_t stride = layout.width();
    for (const Subband& b : layout.subbands()) {
        const std::size_t r0 = block_row(b);
        const std::size_t c0 = block_col(b);
        const cplx* src = coeffs.values.data() + b.offset;
        for (std::size_t r = 0; r < b.rows; ++r) {
            std::copy(src + r * b.cols, src + (r + 1) * b.cols,
                      img.data.data() + (r0 + r) * stride + c0);
        }
    }
    return img;
}

ComplexImage idwt(const WaveletCoeffs& coeffs) {
    ComplexImage img = pyramid_image(coeffs);
    const SubbandLayout& layout = coeffs.layout;
    const std::size_t stride = layout.width();
    std::vector<cplx> tmp;
    for (int level = layout.scales(); level >= 1; --level) {
        synthesize_level(img.data, stride, layout.height() >> (level - 1),
                         layout.width() >> (level - 1), tmp);
    }
    return img;
}

}  // namespace csmri
