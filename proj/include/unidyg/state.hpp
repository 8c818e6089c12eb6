#pragma once

// Per-node temporal state S_i(t): CTDG message extraction, the
// frequency-enhanced update function, the time-linear ablation route,
// and TGN-style deferred batch flushing (embeddings always read the
// pre-batch store).

#include <map>
#include <stdexcept>

#include "unidyg/autograd.hpp"
#include "unidyg/fgat.hpp"
#include "unidyg/graph.hpp"
#include "unidyg/time_encoding.hpp"

namespace unidyg {

struct StateConfig {
    std::size_t d_s = 100;  // state dimension (= embedding dim d)
    std::size_t d_t = 100;  // time-encoding dimension
    std::size_t d_e = 0;    // edge-feature dimension
    std::size_t d_x = 0;    // node-feature dimension (0: datasets without attributes)
    GraphMode mode = GraphMode::Ctdg;

    std::size_t message_dim() const { return d_s + d_t + d_e; }
    std::size_t update_input_dim() const { return d_s + message_dim() + d_t + d_x; }
    std::size_t n_freq() const { return next_power_of_two(update_input_dim()); }
};

struct NodeState {
    Vec s;                  // in (0,1)^d_s after any update
    double last_update = 0.0;
    Vec pending_message;    // CTDG only
    bool has_pending = false;
};

enum class DynamicsKind { Frequency, TimeLinear };

struct DynamicsParams {
    DynamicsKind kind = DynamicsKind::Frequency;
    ComplexParam w_d;       // per-frequency weights, length n_freq
    Parameter w_lin, b_lin; // time-linear ablation: d_s x input, d_s

    DynamicsParams() = default;
    DynamicsParams(const std::string& name, const StateConfig& cfg, DynamicsKind k)
        : kind(k),
          w_d(name + ".wd", cfg.n_freq()),
          w_lin(name + ".wlin", Vec(cfg.d_s * cfg.update_input_dim(), 0.0)),
          b_lin(name + ".blin", Vec(cfg.d_s, 0.0)) {}

    void init(std::mt19937& rng, const StateConfig& cfg) {
        init_complex_uniform(w_d, rng);
        init_real_uniform(w_lin, cfg.update_input_dim(), cfg.d_s, rng);
    }

    std::vector<Parameter*> parameters() {
        if (kind == DynamicsKind::Frequency) return {&w_d.re, &w_d.im};
        return {&w_lin, &b_lin};
    }
};

// Tape-level update: S(t) = sigma(Re(IDFT(W_d (.) F([S || m || phi || x]))))
// truncated to d_s, or the time-linear route under the ablation.
inline Var update_state_var(Tape& t, Var prev_s, Var message, const Vec& phi_dt,
                            const Vec& node_features, DynamicsParams& p,
                            const StateConfig& cfg) {
    std::vector<Var> parts{prev_s, message, t.leaf(phi_dt)};
    if (cfg.d_x > 0) parts.push_back(t.leaf(node_features));
    Var u = t.concat(parts);
    if (p.kind == DynamicsKind::Frequency) {
        Var padded = pad_to(t, u, cfg.n_freq());
        CVar spec = cv_dft(t, padded);
        CVar mixed = cv_mul(t, p.w_d.on_tape(t), spec);
        CVar back = cv_idft(t, mixed);
        return t.sigmoid(t.slice(back.re, 0, cfg.d_s));
    }
    Var lin = t.add(t.matvec(t.param(p.w_lin), u, cfg.d_s, cfg.update_input_dim()),
                    t.param(p.b_lin));
    return t.sigmoid(lin);
}

// CTDG message: [S_i(t-) || phi(t - t-) || e_ij(t)].
inline Vec compute_message(const NodeState& state, double t, const Vec& edge_features,
                           const TimeEncoder& enc, const StateConfig& cfg) {
    if (cfg.mode == GraphMode::Dtdg)
        throw std::logic_error("compute_message: message function is disabled in DTDG mode");
    if (t < state.last_update)
        throw std::invalid_argument("compute_message: event time precedes node clock");
    Vec m;
    m.reserve(cfg.message_dim());
    m.insert(m.end(), state.s.begin(), state.s.end());
    Vec phi = enc.encode(t - state.last_update);
    m.insert(m.end(), phi.begin(), phi.end());
    m.insert(m.end(), edge_features.begin(), edge_features.end());
    if (m.size() != cfg.message_dim())
        throw std::invalid_argument("compute_message: edge feature dimension mismatch");
    return m;
}

inline NodeState update_state(const NodeState& state, const Vec& message, double t,
                              const Vec& node_features, DynamicsParams& p,
                              const TimeEncoder& enc, const StateConfig& cfg) {
    if (t < state.last_update)
        throw std::invalid_argument("update_state: temporal order violated");
    Tape tape;
    Var prev = tape.leaf(state.s);
    Var msg = tape.leaf(message);
    Var out = update_state_var(tape, prev, msg, enc.encode(t - state.last_update),
                               node_features, p, cfg);
    NodeState next;
    next.s = tape.val(out);
    next.last_update = t;
    return next;
}

// ---------------------------------------------------------------------
// State store. Reading an unseen node returns the default state (zero
// vector, clock 0) without mutating the store.

class StateStore {
  public:
    explicit StateStore(const StateConfig& cfg) : cfg_(cfg) {}

    NodeState get(NodeId node) const {
        auto it = states_.find(node);
        if (it != states_.end()) return it->second;
        NodeState def;
        def.s.assign(cfg_.d_s, 0.0);
        return def;
    }

    void put(NodeId node, NodeState state) { states_[node] = std::move(state); }

    // Inputs of the node's last committed update, for on-tape
    // rematerialization during training.
    struct UpdateRecord {
        Vec prev_s, message, phi, node_features;
    };

    const UpdateRecord* last_update_inputs(NodeId node) const {
        auto it = records_.find(node);
        return it == records_.end() ? nullptr : &it->second;
    }

    void put_record(NodeId node, UpdateRecord rec) { records_[node] = std::move(rec); }

    const StateConfig& config() const { return cfg_; }
    std::size_t size() const { return states_.size(); }
    const std::map<NodeId, NodeState>& all() const { return states_; }

  private:
    StateConfig cfg_;
    std::map<NodeId, NodeState> states_;
    std::map<NodeId, UpdateRecord> records_;
};

// Applies one batch of events to the store, strictly after embedding
// computation. CTDG: pending messages computed against pre-batch
// states, most recent message per node wins. DTDG: message-free
// updates at the event time.
inline void flush_batch_updates(StateStore& store, const std::vector<Event>& batch,
                                DynamicsParams& params, const TimeEncoder& enc) {
    const StateConfig& cfg = store.config();
    struct Pending {
        double t;
        Vec message;
    };
    std::map<NodeId, Pending> pending;  // ordered for deterministic application
    for (const auto& e : batch) {
        for (NodeId node : {e.src, e.dst}) {
            NodeState st = store.get(node);
            Vec m;
            if (cfg.mode == GraphMode::Ctdg)
                m = compute_message(st, e.t, e.features, enc, cfg);
            else
                m.assign(cfg.message_dim(), 0.0);
            // later events in the batch overwrite earlier ones
            pending[node] = Pending{e.t, std::move(m)};
        }
    }
    const Vec node_features(cfg.d_x, 0.0);
    for (auto& [node, p] : pending) {
        NodeState st = store.get(node);
        StateStore::UpdateRecord rec;
        rec.prev_s = st.s;
        rec.message = p.message;
        rec.phi = enc.encode(p.t - st.last_update);
        rec.node_features = node_features;
        NodeState next = update_state(st, p.message, p.t, node_features, params, enc, cfg);
        store.put(node, std::move(next));
        store.put_record(node, std::move(rec));
    }
}

}  // namespace unidyg
