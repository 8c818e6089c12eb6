#pragma once

// Split-storage complex vectors and matrices. All frequency-domain
// quantities in the engine are represented as planar re/im arrays.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace unidyg {

using Vec = std::vector<double>;

struct ComplexVector {
    Vec re;
    Vec im;

    ComplexVector() = default;
    explicit ComplexVector(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
    ComplexVector(Vec r, Vec i) : re(std::move(r)), im(std::move(i)) {
        if (re.size() != im.size())
            throw std::invalid_argument("ComplexVector: re/im length mismatch");
    }

    std::size_t size() const { return re.size(); }
};

struct ComplexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec re;
    Vec im;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), re(r * c, 0.0), im(r * c, 0.0) {}
};

// Element-wise complex product.
inline ComplexVector cmul(const ComplexVector& a, const ComplexVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cmul: length mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.re[i] = a.re[i] * b.re[i] - a.im[i] * b.im[i];
        out.im[i] = a.re[i] * b.im[i] + a.im[i] * b.re[i];
    }
    return out;
}

// Per-element magnitude sqrt(Re^2 + Im^2).
inline Vec magnitude(const ComplexVector& a) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = std::sqrt(a.re[i] * a.re[i] + a.im[i] * a.im[i]);
    return out;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const ComplexVector& v) {
    return all_finite(v.re) && all_finite(v.im);
}

}  // namespace unidyg
