#pragma once

// Unified event storage for CTDGs and DTDGs: snapshot-to-event
// conversion, leakage-safe most-recent-N neighbor sampling over
// per-node append-only interaction logs, chronological splits,
// inductive node masking, and mini-batch construction.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "unidyg/complex.hpp"

namespace unidyg {

using NodeId = std::int64_t;

enum class GraphMode { Ctdg, Dtdg };

struct Event {
    NodeId src = 0;
    NodeId dst = 0;
    double t = 0.0;
    Vec features;
};

struct SnapshotEdge {
    NodeId src = 0;
    NodeId dst = 0;
    Vec features;
};

struct SnapshotGraph {
    std::int64_t index = 0;
    std::vector<SnapshotEdge> edges;
};

struct NeighborBatch {
    std::vector<NodeId> ids;
    std::vector<double> timestamps;
    std::vector<Vec> features;
    std::vector<bool> valid;

    explicit NeighborBatch(std::size_t n = 0)
        : ids(n, -1), timestamps(n, 0.0), features(n), valid(n, false) {}

    std::size_t capacity() const { return ids.size(); }
    std::size_t valid_count() const {
        std::size_t c = 0;
        for (bool v : valid) c += v ? 1 : 0;
        return c;
    }
};

struct SplitConfig {
    double train_fraction = 0.70;
    double val_fraction = 0.15;
    double test_fraction = 0.15;
    double inductive_mask_fraction = 0.10;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------
// DTDG -> unified event stream (Def. 2 snapshots become co-occurring
// events stamped with the snapshot index).

inline std::vector<Event> dtdg_to_events(const std::vector<SnapshotGraph>& snapshots) {
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        if (snapshots[i].index <= snapshots[i - 1].index)
            throw std::invalid_argument("dtdg_to_events: snapshot indices must strictly increase");
    }
    std::vector<Event> out;
    for (const auto& g : snapshots)
        for (const auto& e : g.edges)
            out.push_back(Event{e.src, e.dst, double(g.index), e.features});
    return out;
}

// ---------------------------------------------------------------------
// Interaction store: per-node append-only logs, binary search on t.
// Undirected treatment: each event grows both endpoints' histories.

class InteractionStore {
  public:
    void ingest(const Event& e) {
        const std::uint64_t order = counter_++;
        logs_[e.src].push_back({e.dst, e.t, order, e.features});
        logs_[e.dst].push_back({e.src, e.t, order, e.features});
        if (e.t < last_t_) sorted_ = false;
        last_t_ = std::max(last_t_, e.t);
    }

    void ingest_all(const std::vector<Event>& events) {
        for (const auto& e : events) ingest(e);
    }

    // N most recent interactions strictly before t, most recent first;
    // ties on timestamp resolved by later ingestion order.
    NeighborBatch sample_recent(NodeId node, double t, std::size_t n) const {
        NeighborBatch batch(n);
        auto it = logs_.find(node);
        if (it == logs_.end()) return batch;
        const auto& log = it->second;
        auto cut = std::lower_bound(log.begin(), log.end(), t,
                                    [](const Rec& r, double q) { return r.t < q; });
        std::size_t avail = std::size_t(cut - log.begin());
        std::size_t take = std::min(n, avail);
        for (std::size_t k = 0; k < take; ++k) {
            const Rec& r = log[avail - 1 - k];
            batch.ids[k] = r.neighbor;
            batch.timestamps[k] = r.t;
            batch.features[k] = r.features;
            batch.valid[k] = true;
        }
        return batch;
    }

    bool sorted() const { return sorted_; }
    std::size_t degree(NodeId node) const {
        auto it = logs_.find(node);
        return it == logs_.end() ? 0 : it->second.size();
    }

  private:
    struct Rec {
        NodeId neighbor;
        double t;
        std::uint64_t order;
        Vec features;
    };
    std::unordered_map<NodeId, std::vector<Rec>> logs_;
    std::uint64_t counter_ = 0;
    double last_t_ = -std::numeric_limits<double>::infinity();
    bool sorted_ = true;
};

// Auditing wrapper: forwards every query and records any sampled
// timestamp that is not strictly earlier than the query time.
class AuditedStore {
  public:
    explicit AuditedStore(InteractionStore& inner) : inner_(&inner) {}

    NeighborBatch sample_recent(NodeId node, double t, std::size_t n) {
        NeighborBatch b = inner_->sample_recent(node, t, n);
        for (std::size_t k = 0; k < b.capacity(); ++k) {
            if (!b.valid[k]) continue;
            ++samples_;
            if (!(b.timestamps[k] < t)) ++violations_;
        }
        ++queries_;
        return b;
    }

    std::uint64_t queries() const { return queries_; }
    std::uint64_t samples() const { return samples_; }
    std::uint64_t violations() const { return violations_; }

  private:
    InteractionStore* inner_;
    std::uint64_t queries_ = 0;
    std::uint64_t samples_ = 0;
    std::uint64_t violations_ = 0;
};

// ---------------------------------------------------------------------
// Chronological splits.

struct SplitResult {
    std::vector<Event> train, val, test;
    double t1 = 0.0;  // last train timestamp boundary (T1 for DTDG)
    double t2 = 0.0;
};

inline std::size_t count_distinct_timestamps(const std::vector<Event>& stream) {
    std::set<double> ts;
    for (const auto& e : stream) ts.insert(e.t);
    return ts.size();
}

inline SplitResult chronological_split(const std::vector<Event>& stream,
                                       const SplitConfig& cfg, GraphMode mode) {
    if (count_distinct_timestamps(stream) < 3)
        throw std::invalid_argument("chronological_split: need at least 3 distinct timestamps");
    for (std::size_t i = 1; i < stream.size(); ++i)
        if (stream[i].t < stream[i - 1].t)
            throw std::invalid_argument("chronological_split: stream must be sorted");

    const std::size_t n = stream.size();
    std::size_t b1, b2;
    if (mode == GraphMode::Ctdg) {
        // Percentile boundaries; equal timestamps never straddle a
        // boundary (the boundary moves forward to the next distinct t).
        auto no_straddle = [&](std::size_t b) {
            while (b > 0 && b < n && stream[b].t == stream[b - 1].t) ++b;
            return b;
        };
        b1 = no_straddle(std::size_t(double(n) * cfg.train_fraction));
        b2 = no_straddle(std::size_t(double(n) * (cfg.train_fraction + cfg.val_fraction)));
        if (b2 < b1) b2 = b1;
    } else {
        // Snapshot boundaries with cumulative edge counts nearest to the
        // target fractions.
        std::vector<std::pair<double, std::size_t>> snap_cum;  // (snapshot t, cum count)
        for (std::size_t i = 0; i < n; ++i) {
            if (snap_cum.empty() || snap_cum.back().first != stream[i].t)
                snap_cum.push_back({stream[i].t, 0});
            snap_cum.back().second = i + 1;
        }
        auto nearest = [&](double target) {
            std::size_t best = 0;
            double best_diff = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < snap_cum.size(); ++s) {
                double diff = std::abs(double(snap_cum[s].second) - target);
                if (diff < best_diff) {
                    best_diff = diff;
                    best = s;
                }
            }
            return best;
        };
        std::size_t s1 = nearest(double(n) * cfg.train_fraction);
        std::size_t s2 = nearest(double(n) * (cfg.train_fraction + cfg.val_fraction));
        // keep all three sides non-empty at snapshot granularity
        s1 = std::min(s1, snap_cum.size() - 3);
        s2 = std::clamp(s2, s1 + 1, snap_cum.size() - 2);
        b1 = snap_cum[s1].second;
        b2 = snap_cum[s2].second;
    }

    SplitResult out;
    out.train.assign(stream.begin(), stream.begin() + long(b1));
    out.val.assign(stream.begin() + long(b1), stream.begin() + long(b2));
    out.test.assign(stream.begin() + long(b2), stream.end());
    out.t1 = b1 > 0 ? stream[b1 - 1].t : 0.0;
    out.t2 = b2 > 0 ? stream[b2 - 1].t : 0.0;
    return out;
}

// ---------------------------------------------------------------------
// Mini-batches: floor(|E|/B) full batches plus an unpadded remainder.

inline std::vector<std::vector<Event>> make_minibatches(const std::vector<Event>& events,
                                                        std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("make_minibatches: B must be >= 1");
    std::vector<std::vector<Event>> out;
    for (std::size_t i = 0; i < events.size(); i += batch_size) {
        std::size_t end = std::min(i + batch_size, events.size());
        out.emplace_back(events.begin() + long(i), events.begin() + long(end));
    }
    return out;
}

// ---------------------------------------------------------------------
// Inductive masking: remove every training event touching a sampled
// fraction of the node universe.

struct InductiveMask {
    std::vector<Event> masked_train;
    std::set<NodeId> held_out;
};

inline std::vector<NodeId> node_universe(const std::vector<Event>& stream) {
    std::set<NodeId> s;
    for (const auto& e : stream) {
        s.insert(e.src);
        s.insert(e.dst);
    }
    return {s.begin(), s.end()};
}

inline InductiveMask mask_inductive_nodes(const std::vector<Event>& train,
                                          const std::vector<NodeId>& universe,
                                          double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("mask_inductive_nodes: fraction must lie in (0,1)");
    std::vector<NodeId> pool = universe;
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t k = std::size_t(fraction * double(universe.size()));
    InductiveMask out;
    out.held_out.insert(pool.begin(), pool.begin() + long(k));
    for (const auto& e : train)
        if (!out.held_out.count(e.src) && !out.held_out.count(e.dst))
            out.masked_train.push_back(e);
    return out;
}

}  // namespace unidyg
