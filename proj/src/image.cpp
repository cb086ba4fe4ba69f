#include "csmri/image.hpp"

#include <stdexcept>

namespace csmri {

double squared_norm(std::span<const cplx> v) {
    double acc = 0.0;
    for (const auto& z : v) acc += std::norm(z);
    return acc;
}

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw std::invalid_argument("inner_product: length mismatch");
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

}  // namespace csmri
