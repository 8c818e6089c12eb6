#pragma once

// Fourier graph attention: spectral Q/K/V projections with per-frequency
// complex weights, magnitude-based softmax, and complex selective
// aggregation. FGAT_N routes every spectral projection through the
// energy-gated unit. A time-domain GAT baseline backs the ablations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "unidyg/autograd.hpp"
#include "unidyg/complex.hpp"
#include "unidyg/fft.hpp"

namespace unidyg {

// ---------------------------------------------------------------------
// Complex pairs of tape nodes.

struct CVar {
    Var re, im;
    std::size_t n = 0;
};

inline CVar cv_dft(Tape& t, Var re_part, Var im_part = Var{}) {
    const std::size_t n = t.val(re_part).size();
    Var packed = t.dft_pair(re_part, im_part);
    return {t.slice(packed, 0, n), t.slice(packed, n, n), n};
}

inline CVar cv_idft(Tape& t, const CVar& x) {
    Var packed = t.idft_pair(x.re, x.im);
    return {t.slice(packed, 0, x.n), t.slice(packed, x.n, x.n), x.n};
}

inline CVar cv_mul(Tape& t, const CVar& a, const CVar& b) {
    Var re = t.sub(t.mul(a.re, b.re), t.mul(a.im, b.im));
    Var im = t.add(t.mul(a.re, b.im), t.mul(a.im, b.re));
    return {re, im, a.n};
}

inline CVar cv_add(Tape& t, const CVar& a, const CVar& b) {
    return {t.add(a.re, b.re), t.add(a.im, b.im), a.n};
}

inline CVar cv_mask(Tape& t, const CVar& a, const Vec& mask) {
    return {t.mul_const(a.re, mask), t.mul_const(a.im, mask), a.n};
}

inline CVar cv_scale_by(Tape& t, const CVar& a, Var s) {
    return {t.mul_scalar_var(a.re, s), t.mul_scalar_var(a.im, s), a.n};
}

// Scalar attention score: sum of per-frequency magnitudes.
inline Var cv_mag_sum(Tape& t, const CVar& a) { return t.sum(t.magnitude(a.re, a.im)); }

inline Var pad_to(Tape& t, Var x, std::size_t n) {
    const std::size_t len = t.val(x).size();
    if (len == n) return x;
    if (len > n) throw std::invalid_argument("pad_to: input longer than transform length");
    return t.concat({x, t.zeros(n - len)});
}

// ---------------------------------------------------------------------
// Parameters.

struct ComplexParam {
    Parameter re, im;

    ComplexParam() = default;
    ComplexParam(const std::string& name, std::size_t n)
        : re(name + ".re", Vec(n, 0.0)), im(name + ".im", Vec(n, 0.0)) {}

    std::size_t size() const { return re.value.size(); }
    ComplexVector as_complex() const { return ComplexVector(re.value, im.value); }
    CVar on_tape(Tape& t) { return {t.param(re), t.param(im), re.value.size()}; }
};

// Uniform init with the real-Glorot bound shrunk by 1/sqrt(2) so the
// complex variance matches.
inline void init_complex_uniform(ComplexParam& p, std::mt19937& rng) {
    const double bound = std::sqrt(1.5 / double(p.size()));
    std::uniform_real_distribution<double> d(-bound, bound);
    for (auto& v : p.re.value) v = d(rng);
    for (auto& v : p.im.value) v = d(rng);
}

inline void init_real_uniform(Parameter& p, std::size_t fan_in, std::size_t fan_out,
                              std::mt19937& rng) {
    const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
    std::uniform_real_distribution<double> d(-bound, bound);
    for (auto& v : p.value) v = d(rng);
}

struct FgatParams {
    std::size_t n_freq = 0;
    ComplexParam w_q, w_k, w_v;

    FgatParams() = default;
    FgatParams(const std::string& name, std::size_t n)
        : n_freq(n), w_q(name + ".wq", n), w_k(name + ".wk", n), w_v(name + ".wv", n) {}

    void init(std::mt19937& rng) {
        init_complex_uniform(w_q, rng);
        init_complex_uniform(w_k, rng);
        init_complex_uniform(w_v, rng);
    }

    std::vector<Parameter*> parameters() {
        return {&w_q.re, &w_q.im, &w_k.re, &w_k.im, &w_v.re, &w_v.im};
    }
};

enum class GateRule {
    KeepHighEnergy,  // keep components with relative energy >= theta
    KeepLowEnergy,   // mask = 1 iff absolute energy |P_f|^2 < theta
};

struct GateParams {
    ComplexParam w_g, b;
    double theta = 0.2;
    GateRule rule = GateRule::KeepHighEnergy;

    GateParams() = default;
    GateParams(const std::string& name, std::size_t n, double th = 0.2,
               GateRule r = GateRule::KeepHighEnergy)
        : w_g(name + ".wg", n), b(name + ".b", n), theta(th), rule(r) {
        if (th < 0.0) throw std::invalid_argument("GateParams: theta must be >= 0");
    }

    void init(std::mt19937& rng) {
        init_complex_uniform(w_g, rng);
        // bias starts at zero
    }

    std::vector<Parameter*> parameters() { return {&w_g.re, &w_g.im, &b.re, &b.im}; }
};

// The gate mask is a function of the forward spectrum only; it is
// treated as piecewise constant under differentiation.
inline Vec gate_mask(const Vec& pre, const Vec& pim, double theta, GateRule rule) {
    const std::size_t n = pre.size();
    Vec energy(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        energy[i] = pre[i] * pre[i] + pim[i] * pim[i];
        mean += energy[i];
    }
    mean /= double(n);
    Vec mask(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (rule == GateRule::KeepLowEnergy) {
            mask[i] = energy[i] < theta ? 1.0 : 0.0;
        } else {
            const double rel = mean > 0.0 ? energy[i] / mean : 0.0;
            mask[i] = rel >= theta ? 1.0 : 0.0;
        }
    }
    return mask;
}

// L_G(P) = W_G (.) (P (.) M) + B
inline CVar energy_gate(Tape& t, const CVar& p, GateParams& gate) {
    if (p.n != gate.w_g.size()) throw std::invalid_argument("energy_gate: length mismatch");
    Vec mask = gate_mask(t.val(p.re), t.val(p.im), gate.theta, gate.rule);
    CVar masked = cv_mask(t, p, mask);
    CVar wg = gate.w_g.on_tape(t);
    CVar b = gate.b.on_tape(t);
    return cv_add(t, cv_mul(t, wg, masked), b);
}

// Value-level convenience wrapper (no gradients).
inline ComplexVector energy_gate(const ComplexVector& p, GateParams& gate) {
    Tape t;
    CVar pv{t.leaf(p.re), t.leaf(p.im), p.size()};
    CVar out = energy_gate(t, pv, gate);
    return ComplexVector(t.val(out.re), t.val(out.im));
}

// ---------------------------------------------------------------------
// Magnitude-based softmax.

// Tape form over per-neighbor scalar scores. Invalid entries get an
// absent (invalid) Var; the caller skips them during aggregation.
inline std::vector<Var> magnitude_softmax_vars(Tape& t, const std::vector<Var>& scores,
                                               const std::vector<bool>& valid) {
    std::vector<Var> out(scores.size());
    double maxv = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scores.size(); ++j)
        if (valid[j]) maxv = std::max(maxv, t.val(scores[j])[0]);
    if (!std::isfinite(maxv)) return out;  // all invalid

    std::vector<Var> exps;
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (!valid[j]) continue;
        exps.push_back(t.exp(t.add_scalar(scores[j], -maxv)));
        idx.push_back(j);
    }
    Var total = t.sum(t.concat(exps));
    for (std::size_t k = 0; k < exps.size(); ++k)
        out[idx[k]] = t.div_scalar_var(exps[k], total);
    return out;
}

// Value-level form: weights over valid entries, zeros elsewhere.
inline Vec magnitude_softmax(const std::vector<ComplexVector>& a,
                             const std::vector<bool>& valid) {
    if (a.size() != valid.size())
        throw std::invalid_argument("magnitude_softmax: mask length mismatch");
    Vec score(a.size(), 0.0);
    double maxv = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!valid[j]) continue;
        double s = 0.0;
        for (double m : magnitude(a[j])) s += m;
        score[j] = s;
        maxv = std::max(maxv, s);
    }
    Vec out(a.size(), 0.0);
    if (!std::isfinite(maxv)) return out;
    double total = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (valid[j]) total += (out[j] = std::exp(score[j] - maxv));
    for (double& w : out) w /= total;
    return out;
}

// ---------------------------------------------------------------------
// Attention layers.

struct AttentionVars {
    Var query;
    std::vector<Var> keys;    // keys[j] may alias values[j]
    std::vector<Var> values;
    std::vector<bool> valid;
};

struct AttentionInput {
    Vec query;
    std::vector<Vec> keys;
    std::vector<Vec> values;
    std::vector<bool> valid;
};

namespace detail {

// Shared FGAT/FGAT_N pipeline; `project` maps a raw spectrum to its
// projected form (complex-weight multiply or energy gate).
template <typename ProjectQ, typename ProjectK, typename ProjectV>
Var spectral_attention(Tape& t, const AttentionVars& in, std::size_t n_freq,
                       std::size_t out_dim, ProjectQ project_q, ProjectK project_k,
                       ProjectV project_v) {
    if (in.keys.size() != in.values.size() || in.keys.size() != in.valid.size())
        throw std::invalid_argument("attention: ragged input");
    bool any_valid = false;
    for (bool v : in.valid) any_valid |= v;
    if (!any_valid) return t.zeros(out_dim);

    CVar q_spec = project_q(cv_dft(t, pad_to(t, in.query, n_freq)));

    const std::size_t n = in.keys.size();
    std::vector<Var> scores(n);
    std::vector<CVar> v_specs(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!in.valid[j]) continue;
        CVar k_raw = cv_dft(t, pad_to(t, in.keys[j], n_freq));
        CVar k_spec = project_k(k_raw);
        scores[j] = cv_mag_sum(t, cv_mul(t, q_spec, k_spec));
        CVar v_raw = (in.values[j].id == in.keys[j].id)
                         ? k_raw
                         : cv_dft(t, pad_to(t, in.values[j], n_freq));
        v_specs[j] = project_v(v_raw);
    }

    std::vector<Var> alpha = magnitude_softmax_vars(t, scores, in.valid);

    CVar agg{};
    bool first = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (!in.valid[j]) continue;
        CVar term = cv_scale_by(t, v_specs[j], alpha[j]);
        agg = first ? term : cv_add(t, agg, term);
        first = false;
    }
    CVar out = cv_idft(t, agg);
    return t.slice(out.re, 0, out_dim);
}

}  // namespace detail

inline Var fgat_layer(Tape& t, const AttentionVars& in, FgatParams& p, std::size_t out_dim) {
    CVar wq = p.w_q.on_tape(t), wk = p.w_k.on_tape(t), wv = p.w_v.on_tape(t);
    return detail::spectral_attention(
        t, in, p.n_freq, out_dim,
        [&](const CVar& s) { return cv_mul(t, wq, s); },
        [&](const CVar& s) { return cv_mul(t, wk, s); },
        [&](const CVar& s) { return cv_mul(t, wv, s); });
}

struct GateTriple {
    GateParams q, k, v;

    GateTriple() = default;
    GateTriple(const std::string& name, std::size_t n, double theta,
               GateRule rule = GateRule::KeepHighEnergy)
        : q(name + ".gq", n, theta, rule),
          k(name + ".gk", n, theta, rule),
          v(name + ".gv", n, theta, rule) {}

    void init(std::mt19937& rng) {
        q.init(rng);
        k.init(rng);
        v.init(rng);
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        for (auto* g : {&q, &k, &v})
            for (auto* p : g->parameters()) out.push_back(p);
        return out;
    }
};

inline Var fgat_n_layer(Tape& t, const AttentionVars& in, GateTriple& g, std::size_t n_freq,
                        std::size_t out_dim) {
    return detail::spectral_attention(
        t, in, n_freq, out_dim,
        [&](const CVar& s) { return energy_gate(t, s, g.q); },
        [&](const CVar& s) { return energy_gate(t, s, g.k); },
        [&](const CVar& s) { return energy_gate(t, s, g.v); });
}

// Time-domain baseline: scaled dot-product attention, no transform.
struct GatParams {
    std::size_t dim = 0, q_dim = 0, k_dim = 0;
    Parameter w_q, w_k, w_v;

    GatParams() = default;
    GatParams(const std::string& name, std::size_t d, std::size_t qd, std::size_t kd)
        : dim(d),
          q_dim(qd),
          k_dim(kd),
          w_q(name + ".wq", Vec(d * qd, 0.0)),
          w_k(name + ".wk", Vec(d * kd, 0.0)),
          w_v(name + ".wv", Vec(d * kd, 0.0)) {}

    void init(std::mt19937& rng) {
        init_real_uniform(w_q, q_dim, dim, rng);
        init_real_uniform(w_k, k_dim, dim, rng);
        init_real_uniform(w_v, k_dim, dim, rng);
    }

    std::vector<Parameter*> parameters() { return {&w_q, &w_k, &w_v}; }
};

inline Var gat_layer(Tape& t, const AttentionVars& in, GatParams& p) {
    if (in.keys.size() != in.values.size() || in.keys.size() != in.valid.size())
        throw std::invalid_argument("attention: ragged input");
    bool any_valid = false;
    for (bool v : in.valid) any_valid |= v;
    if (!any_valid) return t.zeros(p.dim);

    Var wq = t.param(p.w_q), wk = t.param(p.w_k), wv = t.param(p.w_v);
    Var q = t.matvec(wq, in.query, p.dim, p.q_dim);
    const double inv_sqrt_d = 1.0 / std::sqrt(double(p.dim));

    const std::size_t n = in.keys.size();
    std::vector<Var> scores(n), projected(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!in.valid[j]) continue;
        Var k = t.matvec(wk, in.keys[j], p.dim, p.k_dim);
        scores[j] = t.scale(t.dot(q, k), inv_sqrt_d);
        projected[j] = t.matvec(wv, in.values[j], p.dim, p.k_dim);
    }
    std::vector<Var> alpha = magnitude_softmax_vars(t, scores, in.valid);
    Var agg{};
    bool first = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (!in.valid[j]) continue;
        Var term = t.mul_scalar_var(projected[j], alpha[j]);
        agg = first ? term : t.add(agg, term);
        first = false;
    }
    return agg;
}

// Value-level wrappers over a scratch tape.
inline AttentionVars to_vars(Tape& t, const AttentionInput& in) {
    AttentionVars v;
    v.query = t.leaf(in.query);
    for (std::size_t j = 0; j < in.keys.size(); ++j) {
        v.keys.push_back(t.leaf(in.keys[j]));
        v.values.push_back(in.values[j] == in.keys[j] ? v.keys.back()
                                                      : t.leaf(in.values[j]));
    }
    v.valid = in.valid;
    return v;
}

inline Vec fgat_layer(const AttentionInput& in, FgatParams& p, std::size_t out_dim) {
    Tape t;
    return t.val(fgat_layer(t, to_vars(t, in), p, out_dim));
}

inline Vec fgat_n_layer(const AttentionInput& in, GateTriple& g, std::size_t n_freq,
                        std::size_t out_dim) {
    Tape t;
    return t.val(fgat_n_layer(t, to_vars(t, in), g, n_freq, out_dim));
}

inline Vec gat_layer(const AttentionInput& in, GatParams& p) {
    Tape t;
    return t.val(gat_layer(t, to_vars(t, in), p));
}

}  // namespace unidyg
