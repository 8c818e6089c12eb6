#pragma once

// Adam optimizer over flat real parameters. Re/im parts of complex
// parameters are independent real coordinates.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "unidyg/autograd.hpp"

namespace unidyg {

class Adam {
  public:
    explicit Adam(std::vector<Parameter*> params, double lr = 1e-4, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
        if (lr <= 0.0) throw std::invalid_argument("Adam: lr must be positive");
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i]->value.size(), 0.0);
            v_[i].assign(params_[i]->value.size(), 0.0);
        }
    }

    void step() {
        for (auto* p : params_)
            for (double gr : p->grad)
                if (!std::isfinite(gr)) throw std::runtime_error("Adam: non-finite gradient");
        ++t_;
        const double bc1 = 1.0 - std::pow(b1_, double(t_));
        const double bc2 = 1.0 - std::pow(b2_, double(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Parameter& p = *params_[i];
            for (std::size_t k = 0; k < p.value.size(); ++k) {
                const double gr = p.grad[k];
                m_[i][k] = b1_ * m_[i][k] + (1.0 - b1_) * gr;
                v_[i][k] = b2_ * v_[i][k] + (1.0 - b2_) * gr * gr;
                const double mh = m_[i][k] / bc1;
                const double vh = v_[i][k] / bc2;
                p.value[k] -= lr_ * mh / (std::sqrt(vh) + eps_);
            }
            p.zero_grad();
        }
    }

    double lr() const { return lr_; }
    long steps_taken() const { return t_; }

  private:
    std::vector<Parameter*> params_;
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<Vec> m_, v_;
};

}  // namespace unidyg
