#pragma once

// Divided temporal message passing. Each layer runs two attention
// branches over a node's most recent neighbors -- a time branch over
// encoded inter-event gaps and an attribute branch over edge features
// concatenated with neighbor states -- then fuses them through a
// two-layer feed-forward block with a residual connection.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "unidyg/autograd.hpp"
#include "unidyg/fgat.hpp"
#include "unidyg/graph.hpp"
#include "unidyg/state.hpp"
#include "unidyg/time_encoding.hpp"

namespace unidyg {

enum class AttentionKind {
    FgatN,  // spectral attention with energy-gated projections (default)
    Fgat,   // spectral attention, plain complex-weight projections
    Gat,    // time-domain scaled dot-product baseline
};

struct EncoderConfig {
    std::size_t d = 100;           // embedding dimension
    std::size_t d_t = 100;         // time-encoding dimension
    std::size_t d_e = 0;           // edge-feature dimension
    std::size_t d_s = 100;         // node-state dimension
    std::size_t layers = 1;
    std::size_t n_neighbors = 12;
    double theta = 0.2;
    AttentionKind attention = AttentionKind::FgatN;
    GateRule gate_rule = GateRule::KeepHighEnergy;

    std::size_t time_n_freq() const { return next_power_of_two(d_t); }
    std::size_t attr_query_dim() const { return d + d_s; }
    std::size_t attr_key_dim() const { return d_e + d_s; }
    std::size_t attr_n_freq() const {
        return next_power_of_two(std::max(attr_query_dim(), attr_key_dim()));
    }
};

struct EncoderLayerParams {
    AttentionKind kind = AttentionKind::FgatN;

    // time branch
    FgatParams time_fgat;
    GatParams time_gat;

    // attribute branch (one of the three, per `kind`)
    GateTriple attr_gate;
    FgatParams attr_fgat;
    GatParams attr_gat;

    // fusion: 2d -> 2d -> d with ReLU activations, residual on top
    Parameter ffn_w1, ffn_b1, ffn_w2, ffn_b2;

    EncoderLayerParams() = default;
    EncoderLayerParams(const std::string& name, const EncoderConfig& cfg)
        : kind(cfg.attention),
          ffn_w1(name + ".ffn.w1", Vec(2 * cfg.d * 2 * cfg.d, 0.0)),
          ffn_b1(name + ".ffn.b1", Vec(2 * cfg.d, 0.0)),
          ffn_w2(name + ".ffn.w2", Vec(cfg.d * 2 * cfg.d, 0.0)),
          ffn_b2(name + ".ffn.b2", Vec(cfg.d, 0.0)) {
        if (kind == AttentionKind::Gat) {
            time_gat = GatParams(name + ".time", cfg.d, cfg.d_t, cfg.d_t);
            attr_gat = GatParams(name + ".attr", cfg.d, cfg.attr_query_dim(),
                                 cfg.attr_key_dim());
        } else {
            time_fgat = FgatParams(name + ".time", cfg.time_n_freq());
            if (kind == AttentionKind::FgatN)
                attr_gate = GateTriple(name + ".attr", cfg.attr_n_freq(), cfg.theta,
                                       cfg.gate_rule);
            else
                attr_fgat = FgatParams(name + ".attr", cfg.attr_n_freq());
        }
    }

    void init(std::mt19937& rng, const EncoderConfig& cfg) {
        if (kind == AttentionKind::Gat) {
            time_gat.init(rng);
            attr_gat.init(rng);
        } else {
            time_fgat.init(rng);
            if (kind == AttentionKind::FgatN) attr_gate.init(rng);
            else attr_fgat.init(rng);
        }
        init_real_uniform(ffn_w1, 2 * cfg.d, 2 * cfg.d, rng);
        init_real_uniform(ffn_w2, 2 * cfg.d, cfg.d, rng);
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        auto append = [&](std::vector<Parameter*> ps) {
            out.insert(out.end(), ps.begin(), ps.end());
        };
        if (kind == AttentionKind::Gat) {
            append(time_gat.parameters());
            append(attr_gat.parameters());
        } else {
            append(time_fgat.parameters());
            if (kind == AttentionKind::FgatN) append(attr_gate.parameters());
            else append(attr_fgat.parameters());
        }
        append({&ffn_w1, &ffn_b1, &ffn_w2, &ffn_b2});
        return out;
    }
};

struct EncoderParams {
    EncoderConfig cfg;
    std::vector<EncoderLayerParams> layers;

    EncoderParams() = default;
    explicit EncoderParams(const EncoderConfig& c) : cfg(c) {
        if (c.layers == 0) throw std::invalid_argument("EncoderParams: need >= 1 layer");
        for (std::size_t l = 0; l < c.layers; ++l)
            layers.emplace_back("enc.l" + std::to_string(l), c);
    }

    void init(std::mt19937& rng) {
        for (auto& l : layers) l.init(rng, cfg);
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        for (auto& l : layers) {
            auto ps = l.parameters();
            out.insert(out.end(), ps.begin(), ps.end());
        }
        return out;
    }
};

// Zero-pad or truncate a tape vector to length n.
inline Var fit_to(Tape& t, Var x, std::size_t n) {
    const std::size_t len = t.val(x).size();
    if (len == n) return x;
    if (len < n) return t.concat({x, t.zeros(n - len)});
    return t.slice(x, 0, n);
}

// Everything an embedding pass reads besides the node itself: the
// interaction history (neighbor sampling), the pre-batch node states
// (read detached), and the time encoder.
struct EmbedContext {
    const InteractionStore* history = nullptr;
    const StateStore* states = nullptr;
    const TimeEncoder* time_enc = nullptr;
    AuditedStore* audit = nullptr;  // optional leakage auditing wrapper

    NeighborBatch sample(NodeId node, double t, std::size_t n) const {
        return audit ? audit->sample_recent(node, t, n)
                     : history->sample_recent(node, t, n);
    }
};

namespace detail {

inline Var encoder_layer(Tape& t, EncoderLayerParams& p, const EncoderConfig& cfg,
                         Var z_prev, Var s_i, const NeighborBatch& nbrs,
                         double t_query, const EmbedContext& ctx) {
    const std::size_t n = nbrs.capacity();

    // Time branch: query phi(0), keys = values = phi(t - t_j). Equal
    // gaps share one node so their spectra are computed once.
    AttentionVars time_in;
    time_in.query = t.leaf(ctx.time_enc->encode(0.0));
    time_in.valid = nbrs.valid;
    std::map<double, Var> gap_nodes;
    for (std::size_t j = 0; j < n; ++j) {
        Var k{};
        if (nbrs.valid[j]) {
            const double gap = t_query - nbrs.timestamps[j];
            auto it = gap_nodes.find(gap);
            if (it != gap_nodes.end()) {
                k = it->second;
            } else {
                k = t.leaf(ctx.time_enc->encode(gap));
                gap_nodes.emplace(gap, k);
            }
        }
        time_in.keys.push_back(k);
        time_in.values.push_back(k);
    }

    // Attribute branch: query [Z_prev || S_i], keys = values = [e_ij || S_j].
    AttentionVars attr_in;
    attr_in.query = t.concat({z_prev, s_i});
    attr_in.valid = nbrs.valid;
    for (std::size_t j = 0; j < n; ++j) {
        Var k{};
        if (nbrs.valid[j]) {
            Vec key = nbrs.features[j];
            key.resize(cfg.d_e, 0.0);
            const Vec& s_j = ctx.states->get(nbrs.ids[j]).s;  // detached
            key.insert(key.end(), s_j.begin(), s_j.end());
            k = t.leaf(key);
        }
        attr_in.keys.push_back(k);
        attr_in.values.push_back(k);
    }

    Var z_time, z_attr;
    switch (p.kind) {
        case AttentionKind::FgatN:
            z_time = fgat_layer(t, time_in, p.time_fgat, cfg.d);
            z_attr = fgat_n_layer(t, attr_in, p.attr_gate, cfg.attr_n_freq(), cfg.d);
            break;
        case AttentionKind::Fgat:
            z_time = fgat_layer(t, time_in, p.time_fgat, cfg.d);
            z_attr = fgat_layer(t, attr_in, p.attr_fgat, cfg.d);
            break;
        case AttentionKind::Gat:
            z_time = gat_layer(t, time_in, p.time_gat);
            z_attr = gat_layer(t, attr_in, p.attr_gat);
            break;
    }

    Var cat = t.concat({z_time, z_attr});
    Var h = t.relu(t.add(t.matvec(t.param(p.ffn_w1), cat, 2 * cfg.d, 2 * cfg.d),
                         t.param(p.ffn_b1)));
    Var fused = t.relu(t.add(t.matvec(t.param(p.ffn_w2), h, cfg.d, 2 * cfg.d),
                             t.param(p.ffn_b2)));
    return t.add(z_prev, fused);
}

}  // namespace detail

// Embedding of `node` at query time `t_query`. `s_i` is the node's own
// state on the tape (a leaf for inference, or a rematerialized update
// during training so gradients reach the dynamics weights); neighbor
// states are always read detached from the store.
inline Var embed_node_var(Tape& t, NodeId node, double t_query, Var s_i,
                          EncoderParams& params, const EmbedContext& ctx) {
    if (!ctx.history || !ctx.states || !ctx.time_enc)
        throw std::invalid_argument("embed_node_var: incomplete context");
    const EncoderConfig& cfg = params.cfg;
    NeighborBatch nbrs = ctx.sample(node, t_query, cfg.n_neighbors);
    Var z = fit_to(t, s_i, cfg.d);
    for (auto& layer : params.layers)
        z = detail::encoder_layer(t, layer, cfg, z, s_i, nbrs, t_query, ctx);
    return z;
}

// Inference-path embedding: state read from the store, no gradients.
inline Vec embed_node(NodeId node, double t_query, EncoderParams& params,
                      const EmbedContext& ctx) {
    Tape t;
    Var s_i = t.leaf(ctx.states->get(node).s);
    return t.val(embed_node_var(t, node, t_query, s_i, params, ctx));
}

}  // namespace unidyg
