#pragma once

// Link-prediction training and evaluation: an MLP edge decoder over
// concatenated endpoint embeddings, seeded negative sampling, the
// numerically stable logistic loss, a streaming mini-batch training
// loop with deferred state flushes and early stopping, and forward-only
// streaming evaluation (ROC-AUC / AP / MRR).

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "unidyg/adam.hpp"
#include "unidyg/encoder.hpp"
#include "unidyg/metrics.hpp"
#include "unidyg/state.hpp"

namespace unidyg {

// ---------------------------------------------------------------------
// Edge decoder: [z_u || z_v] -> d (ReLU) -> scalar logit.

struct DecoderParams {
    std::size_t d = 0;
    Parameter w1, b1, w2, b2;

    DecoderParams() = default;
    explicit DecoderParams(std::size_t dim)
        : d(dim),
          w1("dec.w1", Vec(dim * 2 * dim, 0.0)),
          b1("dec.b1", Vec(dim, 0.0)),
          w2("dec.w2", Vec(dim, 0.0)),
          b2("dec.b2", Vec(1, 0.0)) {}

    void init(std::mt19937& rng) {
        init_real_uniform(w1, 2 * d, d, rng);
        init_real_uniform(w2, d, 1, rng);
    }

    std::vector<Parameter*> parameters() { return {&w1, &b1, &w2, &b2}; }
};

inline Var decode_link_var(Tape& t, Var z_u, Var z_v, DecoderParams& p) {
    Var cat = t.concat({z_u, z_v});
    Var h = t.relu(t.add(t.matvec(t.param(p.w1), cat, p.d, 2 * p.d), t.param(p.b1)));
    return t.add(t.matvec(t.param(p.w2), h, 1, p.d), t.param(p.b2));
}

inline double decode_link(const Vec& z_u, const Vec& z_v, DecoderParams& p) {
    Tape t;
    return t.val(decode_link_var(t, t.leaf(z_u), t.leaf(z_v), p))[0];
}

// Stable binary cross-entropy from a logit: softplus(-x) for a positive
// pair, softplus(x) for a negative one.
inline Var bce_from_logit(Tape& t, Var logit, bool positive) {
    return t.softplus(positive ? t.scale(logit, -1.0) : logit);
}

// k destination replacements, rejection-sampled to differ from both
// true endpoints.
inline std::vector<NodeId> sample_negatives(std::mt19937_64& rng,
                                            const std::vector<NodeId>& universe,
                                            NodeId src, NodeId dst, std::size_t k) {
    if (universe.size() < 3)
        throw std::invalid_argument("sample_negatives: universe too small");
    std::uniform_int_distribution<std::size_t> pick(0, universe.size() - 1);
    std::vector<NodeId> out;
    out.reserve(k);
    while (out.size() < k) {
        NodeId cand = universe[pick(rng)];
        if (cand != src && cand != dst) out.push_back(cand);
    }
    return out;
}

// ---------------------------------------------------------------------
// Model bundle.

struct ModelConfig {
    GraphMode mode = GraphMode::Ctdg;
    EncoderConfig encoder;
    DynamicsKind dynamics = DynamicsKind::Frequency;

    StateConfig state_config() const {
        StateConfig sc;
        sc.d_s = encoder.d_s;
        sc.d_t = encoder.d_t;
        sc.d_e = encoder.d_e;
        sc.mode = mode;
        return sc;
    }
};

struct Model {
    ModelConfig cfg;
    TimeEncoder time_enc;
    EncoderParams encoder;
    DynamicsParams dynamics;
    DecoderParams decoder;

    explicit Model(const ModelConfig& c)
        : cfg(c),
          time_enc(c.encoder.d_t),
          encoder(c.encoder),
          dynamics("dyn", c.state_config(), c.dynamics),
          decoder(c.encoder.d) {}

    void init(std::uint64_t seed) {
        std::mt19937 rng(static_cast<unsigned>(seed));
        encoder.init(rng);
        dynamics.init(rng, cfg.state_config());
        decoder.init(rng);
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out = encoder.parameters();
        for (auto* p : dynamics.parameters()) out.push_back(p);
        for (auto* p : decoder.parameters()) out.push_back(p);
        return out;
    }
};

// The evolving stream context a pass maintains as it consumes events.
struct StreamState {
    InteractionStore history;
    StateStore states;
    std::optional<AuditedStore> audit;  // engaged: all sampling is audited

    explicit StreamState(const StateConfig& cfg) : states(cfg) {}

    void enable_audit() { audit.emplace(history); }

    EmbedContext context(const TimeEncoder& enc) {
        return {&history, &states, &enc, audit ? &*audit : nullptr};
    }
};

// Node state on the tape. When the store holds the inputs of the
// node's last update, that update is re-run on the tape so gradients
// reach the dynamics weights; otherwise the stored value enters as a
// constant leaf.
inline Var state_on_tape(Tape& t, NodeId node, const StateStore& store,
                         DynamicsParams& dyn, const StateConfig& cfg) {
    const auto* rec = store.last_update_inputs(node);
    if (!rec) return t.leaf(store.get(node).s);
    return update_state_var(t, t.leaf(rec->prev_s), t.leaf(rec->message), rec->phi,
                            rec->node_features, dyn, cfg);
}

// ---------------------------------------------------------------------
// Training.

struct TrainConfig {
    std::size_t batch_size = 600;
    double lr = 1e-4;
    std::size_t max_epochs = 50;
    std::size_t patience = 5;
    std::uint64_t seed = 0;
    std::size_t grad_chunk = 100;      // events per tape before a step
    std::size_t mrr_negatives = 100;   // candidate-set size for MRR
    std::string log_path;              // optional JSON-lines metric log
    bool audit = false;                // route all neighbor sampling
                                       // through the leakage auditor
    double time_budget_s = 0.0;        // stop after this wall time (0: unlimited)
};

struct EvalResult {
    double auc = 0.0;
    double ap = 0.0;
    double mrr = 0.0;

    double selection_metric(GraphMode mode) const {
        return mode == GraphMode::Ctdg ? ap : mrr;
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    EvalResult val;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    EvalResult best_val;
    std::uint64_t audit_samples = 0;     // populated when auditing is on
    std::uint64_t audit_violations = 0;
};

namespace detail {

// Embedding with a per-batch cache; only cacheable for detached
// states, i.e. the forward-only paths.
struct EmbedCache {
    std::map<std::pair<NodeId, double>, Vec> cache;

    const Vec& get(NodeId node, double t, Model& model, const EmbedContext& ctx) {
        auto key = std::make_pair(node, t);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        return cache.emplace(key, embed_node(node, t, model.encoder, ctx)).first->second;
    }
};

inline void commit_batch(StreamState& ss, const std::vector<Event>& batch, Model& model) {
    flush_batch_updates(ss.states, batch, model.dynamics, model.time_enc);
    ss.history.ingest_all(batch);
}

}  // namespace detail

// One training pass over pre-batched events. Returns the mean per-pair
// loss. Throws if the loss goes non-finite.
inline double train_epoch(Model& model, StreamState& ss,
                          const std::vector<std::vector<Event>>& batches,
                          const std::vector<NodeId>& universe, Adam& opt,
                          const TrainConfig& cfg, std::mt19937_64& neg_rng) {
    const StateConfig sc = model.cfg.state_config();
    double total_loss = 0.0;
    std::size_t total_pairs = 0;

    for (const auto& batch : batches) {
        EmbedContext ctx = ss.context(model.time_enc);
        for (std::size_t start = 0; start < batch.size(); start += cfg.grad_chunk) {
            const std::size_t end = std::min(start + cfg.grad_chunk, batch.size());
            Tape t;
            std::vector<Var> losses;
            // Within one chunk neither states nor history change, so an
            // embedding is fully determined by (node, query time); reuse
            // the tape subgraph when the same pair recurs.
            std::map<std::pair<NodeId, double>, Var> embeds;
            auto embed = [&](NodeId node, double tq) {
                auto it = embeds.find({node, tq});
                if (it != embeds.end()) return it->second;
                Var s = state_on_tape(t, node, ss.states, model.dynamics, sc);
                Var z = embed_node_var(t, node, tq, s, model.encoder, ctx);
                embeds.emplace(std::make_pair(node, tq), z);
                return z;
            };
            for (std::size_t i = start; i < end; ++i) {
                const Event& e = batch[i];
                NodeId neg = sample_negatives(neg_rng, universe, e.src, e.dst, 1)[0];
                Var z_u = embed(e.src, e.t);
                Var z_v = embed(e.dst, e.t);
                Var z_n = embed(neg, e.t);
                losses.push_back(bce_from_logit(t, decode_link_var(t, z_u, z_v, model.decoder), true));
                losses.push_back(bce_from_logit(t, decode_link_var(t, z_u, z_n, model.decoder), false));
            }
            Var loss = t.scale(t.sum(t.concat(losses)), 1.0 / double(losses.size()));
            const double loss_val = t.val(loss)[0];
            if (!std::isfinite(loss_val))
                throw std::runtime_error("train_epoch: non-finite loss");
            total_loss += loss_val * double(losses.size());
            total_pairs += losses.size();
            t.backward(loss);
            opt.step();
        }
        detail::commit_batch(ss, batch, model);
    }
    return total_pairs ? total_loss / double(total_pairs) : 0.0;
}

// Forward-only pass over `events`: scores every positive against
// sampled negatives with pre-batch states, then applies the batch.
// Used for validation and test; also advances the stream.
inline EvalResult evaluate_stream(Model& model, StreamState& ss,
                                  const std::vector<Event>& events,
                                  const std::vector<NodeId>& universe,
                                  const TrainConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Vec pos_scores, neg_scores;
    Vec mrr_pos;
    std::vector<Vec> mrr_negs;

    auto batches = make_minibatches(events, cfg.batch_size);
    for (const auto& batch : batches) {
        EmbedContext ctx = ss.context(model.time_enc);
        detail::EmbedCache cache;
        for (const Event& e : batch) {
            const Vec& z_u = cache.get(e.src, e.t, model, ctx);
            const Vec& z_v = cache.get(e.dst, e.t, model, ctx);
            double pos = decode_link(z_u, z_v, model.decoder);
            pos_scores.push_back(pos);

            NodeId neg1 = sample_negatives(rng, universe, e.src, e.dst, 1)[0];
            neg_scores.push_back(
                decode_link(z_u, cache.get(neg1, e.t, model, ctx), model.decoder));

            auto cands = sample_negatives(rng, universe, e.src, e.dst, cfg.mrr_negatives);
            Vec cand_scores;
            cand_scores.reserve(cands.size());
            for (NodeId n : cands)
                cand_scores.push_back(
                    decode_link(z_u, cache.get(n, e.t, model, ctx), model.decoder));
            mrr_pos.push_back(pos);
            mrr_negs.push_back(std::move(cand_scores));
        }
        detail::commit_batch(ss, batch, model);
    }

    EvalResult out;
    if (!pos_scores.empty()) {
        out.auc = auc(pos_scores, neg_scores);
        out.ap = ap(pos_scores, neg_scores);
        out.mrr = mrr(mrr_pos, mrr_negs);
    }
    return out;
}

// Forward-only replay that just advances states and history (no scores).
inline void warm_stream(Model& model, StreamState& ss, const std::vector<Event>& events,
                        std::size_t batch_size) {
    if (events.empty()) return;
    for (const auto& batch : make_minibatches(events, batch_size))
        detail::commit_batch(ss, batch, model);
}

// Full training run with early stopping on the validation selection
// metric (AP for continuous streams, MRR for snapshot streams). The
// best parameters are restored before returning.
inline TrainResult train(Model& model, const SplitResult& split,
                         const TrainConfig& cfg) {
    auto params = model.parameters();
    Adam opt(params, cfg.lr);
    std::mt19937_64 neg_rng(cfg.seed);
    const std::vector<NodeId> universe = node_universe(split.train);
    auto batches = make_minibatches(split.train, cfg.batch_size);

    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path);
        if (!log) throw std::runtime_error("cannot write " + cfg.log_path);
    }

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result;
    std::vector<Vec> best_values;
    double best_metric = -1.0;
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        StreamState ss(model.cfg.state_config());
        if (cfg.audit) ss.enable_audit();
        double loss = train_epoch(model, ss, batches, universe, opt, cfg, neg_rng);
        EvalResult val =
            evaluate_stream(model, ss, split.val, universe, cfg, cfg.seed + epoch);
        if (ss.audit) {
            result.audit_samples += ss.audit->samples();
            result.audit_violations += ss.audit->violations();
        }

        result.history.push_back({epoch, loss, val});
        if (log) {
            log << "{\"epoch\":" << epoch << ",\"train_loss\":" << loss
                << ",\"val_auc\":" << val.auc << ",\"val_ap\":" << val.ap
                << ",\"val_mrr\":" << val.mrr << "}\n"
                << std::flush;
        }

        const double metric = val.selection_metric(model.cfg.mode);
        if (metric > best_metric) {
            best_metric = metric;
            result.best_epoch = epoch;
            result.best_val = val;
            best_values.clear();
            for (auto* p : params) best_values.push_back(p->value);
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
        if (cfg.time_budget_s > 0.0) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            if (elapsed > cfg.time_budget_s) break;
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
    return result;
}

// Test-set evaluation: replays train+val forward-only, then scores test.
inline EvalResult evaluate_test(Model& model, const SplitResult& split,
                                const TrainConfig& cfg) {
    StreamState ss(model.cfg.state_config());
    const std::vector<NodeId> universe = node_universe(split.train);
    warm_stream(model, ss, split.train, cfg.batch_size);
    warm_stream(model, ss, split.val, cfg.batch_size);
    return evaluate_stream(model, ss, split.test, universe, cfg, cfg.seed + 9999);
}

}  // namespace unidyg
