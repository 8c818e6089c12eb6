#pragma once

// Fixed cosine time encoding phi(dt). Frequencies follow a geometric
// ladder omega_i = c^{-(i-1)*2/d}, base c = 10, non-trainable.

#include <cmath>
#include <stdexcept>

#include "unidyg/complex.hpp"

namespace unidyg {

class TimeEncoder {
  public:
    explicit TimeEncoder(std::size_t dim, double base = 10.0) : omega_(dim) {
        if (dim == 0) throw std::invalid_argument("TimeEncoder: dim must be positive");
        for (std::size_t i = 0; i < dim; ++i)
            omega_[i] = std::pow(base, -double(i) * 2.0 / double(dim));
    }

    std::size_t dim() const { return omega_.size(); }
    const Vec& frequencies() const { return omega_; }

    Vec encode(double dt) const {
        if (!(dt >= 0.0) || !std::isfinite(dt))
            throw std::invalid_argument("encode_time: dt must be finite and non-negative");
        Vec out(omega_.size());
        for (std::size_t i = 0; i < omega_.size(); ++i)
            out[i] = std::cos(dt * omega_[i]);
        return out;
    }

  private:
    Vec omega_;
};

}  // namespace unidyg
