#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace csmri {

using cplx = std::complex<double>;

// Dense row-major complex image.
struct ComplexImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<cplx> data;

    ComplexImage() = default;
    ComplexImage(std::size_t h, std::size_t w) : height(h), width(w), data(h * w) {}

    std::size_t size() const { return data.size(); }
    cplx& operator()(std::size_t row, std::size_t col) { return data[row * width + col]; }
    const cplx& operator()(std::size_t row, std::size_t col) const { return data[row * width + col]; }
    bool same_shape(const ComplexImage& other) const {
        return height == other.height && width == other.width;
    }
};

double squared_norm(std::span<const cplx> v);
cplx inner_product(std::span<const cplx> a, std::span<const cplx> b);  // sum conj(a_i) b_i

}  // namespace csmri
