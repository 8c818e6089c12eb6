#pragma once

// Forward/inverse discrete Fourier transforms. Power-of-two lengths go
// through an iterative radix-2 FFT with cached twiddle tables; other
// lengths fall back to the O(n^2) direct sum.

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>

#include "unidyg/complex.hpp"

namespace unidyg {

inline bool is_power_of_two(std::size_t n) {
    return n > 0 && (n & (n - 1)) == 0;
}

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace detail {

struct TwiddleTable {
    Vec cos_fwd, sin_fwd;  // e^{-i 2 pi k / n} for k < n/2
};

inline const TwiddleTable& twiddles(std::size_t n) {
    static std::map<std::size_t, TwiddleTable> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    TwiddleTable t;
    t.cos_fwd.resize(n / 2);
    t.sin_fwd.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        double ang = -2.0 * std::numbers::pi * double(k) / double(n);
        t.cos_fwd[k] = std::cos(ang);
        t.sin_fwd[k] = std::sin(ang);
    }
    return cache.emplace(n, std::move(t)).first->second;
}

// In-place iterative radix-2 FFT. inverse=true conjugates the twiddles
// but does not apply the 1/n factor.
inline void fft_pow2_inplace(Vec& re, Vec& im, bool inverse) {
    const std::size_t n = re.size();
    if (n == 1) return;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    const TwiddleTable& tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t step = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const double wr = tw.cos_fwd[k * step];
                const double wi = inverse ? -tw.sin_fwd[k * step] : tw.sin_fwd[k * step];
                const std::size_t a = base + k;
                const std::size_t b = a + half;
                const double xr = re[b] * wr - im[b] * wi;
                const double xi = re[b] * wi + im[b] * wr;
                re[b] = re[a] - xr;
                im[b] = im[a] - xi;
                re[a] += xr;
                im[a] += xi;
            }
        }
    }
}

inline void dft_direct(const Vec& xre, const Vec& xim, Vec& Xre, Vec& Xim, bool inverse) {
    const std::size_t n = xre.size();
    Xre.assign(n, 0.0);
    Xim.assign(n, 0.0);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t f = 0; f < n; ++f) {
        double sr = 0.0, si = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double ang = sign * 2.0 * std::numbers::pi * double(f) * double(k) / double(n);
            double c = std::cos(ang), s = std::sin(ang);
            sr += xre[k] * c - xim[k] * s;
            si += xre[k] * s + xim[k] * c;
        }
        Xre[f] = sr;
        Xim[f] = si;
    }
}

// Unnormalized transform dispatcher shared by dft/idft and the autograd
// adjoints (the adjoint of the forward DFT is the unnormalized inverse).
inline ComplexVector transform(const ComplexVector& x, bool inverse) {
    if (x.size() == 0)
        throw std::invalid_argument("dft: empty input");
    ComplexVector out;
    if (is_power_of_two(x.size())) {
        out = x;
        fft_pow2_inplace(out.re, out.im, inverse);
    } else {
        out = ComplexVector(x.size());
        dft_direct(x.re, x.im, out.re, out.im, inverse);
    }
    return out;
}

}  // namespace detail

// X(f) = sum_n x(n) e^{-i 2 pi f n / N}
inline ComplexVector dft(const ComplexVector& x) {
    return detail::transform(x, false);
}

inline ComplexVector dft(const Vec& x) {
    return dft(ComplexVector(x, Vec(x.size(), 0.0)));
}

// x(n) = (1/N) sum_f X(f) e^{+i 2 pi f n / N}
inline ComplexVector idft(const ComplexVector& X) {
    ComplexVector out = detail::transform(X, true);
    const double inv = 1.0 / double(X.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.re[i] *= inv;
        out.im[i] *= inv;
    }
    return out;
}

// Zero-pad a real signal to length n (n >= x.size()).
inline Vec zero_pad(const Vec& x, std::size_t n) {
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
    return out;
}

}  // namespace unidyg
