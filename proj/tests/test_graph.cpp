#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <random>

#include "unidyg/graph.hpp"

using namespace unidyg;

namespace {

std::vector<SnapshotGraph> random_dtdg(std::mt19937& rng, int snapshots, int max_edges) {
    std::vector<SnapshotGraph> out;
    std::uniform_int_distribution<int> ecount(1, max_edges);
    std::uniform_int_distribution<NodeId> node(0, 30);
    for (int s = 0; s < snapshots; ++s) {
        SnapshotGraph g;
        g.index = s + 1;
        int m = ecount(rng);
        for (int e = 0; e < m; ++e)
            g.edges.push_back({node(rng), node(rng), Vec{double(e)}});
        out.push_back(g);
    }
    return out;
}

}  // namespace

TEST_CASE("dtdg_to_events") {
    SECTION("empty snapshot list") {
        CHECK(dtdg_to_events({}).empty());
    }
    SECTION("edge counting and stamping") {
        std::vector<SnapshotGraph> snaps(2);
        snaps[0].index = 1;
        snaps[0].edges = {{1, 2, {}}, {2, 3, {}}, {3, 4, {}}};
        snaps[1].index = 2;
        snaps[1].edges = {{1, 3, {}}, {4, 5, {}}};
        auto events = dtdg_to_events(snaps);
        REQUIRE(events.size() == 5);
        Vec ts;
        for (const auto& e : events) ts.push_back(e.t);
        CHECK(ts == Vec{1, 1, 1, 2, 2});
    }
    SECTION("duplicate snapshot index rejected") {
        std::vector<SnapshotGraph> snaps(2);
        snaps[0].index = 3;
        snaps[1].index = 3;
        CHECK_THROWS_AS(dtdg_to_events(snaps), std::invalid_argument);
    }
    SECTION("grouping the stream by t reconstructs every snapshot multiset") {
        std::mt19937 rng(1);
        auto snaps = random_dtdg(rng, 6, 10);
        auto events = dtdg_to_events(snaps);
        std::map<double, std::multiset<std::pair<NodeId, NodeId>>> grouped;
        for (const auto& e : events) grouped[e.t].insert({e.src, e.dst});
        REQUIRE(grouped.size() == snaps.size());
        for (const auto& g : snaps) {
            std::multiset<std::pair<NodeId, NodeId>> expect;
            for (const auto& e : g.edges) expect.insert({e.src, e.dst});
            REQUIRE(grouped.at(double(g.index)) == expect);
        }
    }
}

TEST_CASE("chronological_split") {
    SplitConfig cfg;

    SECTION("ten equal snapshots put snapshots 1..7 in train") {
        std::vector<Event> stream;
        for (int s = 1; s <= 10; ++s)
            for (int e = 0; e < 4; ++e) stream.push_back({e, e + 1, double(s), {}});
        auto split = chronological_split(stream, cfg, GraphMode::Dtdg);
        CHECK(split.train.size() == 28);
        CHECK(split.train.back().t == 7.0);
        CHECK(split.val.size() == 4);   // snapshot 8
        CHECK(split.test.size() == 8);  // snapshots 9, 10
        CHECK(split.t1 == 7.0);
    }

    SECTION("equal timestamps never straddle a CTDG boundary") {
        std::vector<Event> stream;
        for (int i = 0; i < 69; ++i) stream.push_back({0, 1, double(i), {}});
        for (int i = 0; i < 4; ++i) stream.push_back({0, 1, 69.0, {}});  // 69..72%
        for (int i = 73; i < 100; ++i) stream.push_back({0, 1, double(i), {}});
        auto split = chronological_split(stream, cfg, GraphMode::Ctdg);
        // the shared timestamp lands entirely on one side
        double boundary = split.train.back().t;
        for (const auto& e : split.val) CHECK(e.t != boundary);
    }

    SECTION("split is a disjoint ordered cover") {
        std::mt19937 rng(2);
        std::vector<Event> stream;
        double t = 0.0;
        for (int i = 0; i < 500; ++i) {
            t += std::uniform_real_distribution<double>(0.0, 2.0)(rng);
            stream.push_back({NodeId(i % 17), NodeId(i % 13), t, {}});
        }
        auto split = chronological_split(stream, cfg, GraphMode::Ctdg);
        CHECK(split.train.size() + split.val.size() + split.test.size() == stream.size());
        std::vector<Event> rejoined = split.train;
        rejoined.insert(rejoined.end(), split.val.begin(), split.val.end());
        rejoined.insert(rejoined.end(), split.test.begin(), split.test.end());
        for (std::size_t i = 0; i < stream.size(); ++i) {
            REQUIRE(rejoined[i].src == stream[i].src);
            REQUIRE(rejoined[i].t == stream[i].t);
        }
    }

    SECTION("DTDG boundary matches a brute-force cumulative scan") {
        std::mt19937 rng(3);
        auto snaps = random_dtdg(rng, 28, 50);
        auto stream = dtdg_to_events(snaps);
        auto split = chronological_split(stream, cfg, GraphMode::Dtdg);

        // brute force: cumulative counts at snapshot ends, nearest to 70%
        std::map<double, std::size_t> cum;
        std::size_t run = 0;
        for (const auto& e : stream) cum[e.t] = ++run;
        double best_t = 0;
        double best_diff = 1e18;
        for (auto& [t, c] : cum) {
            double diff = std::abs(double(c) - 0.7 * double(stream.size()));
            if (diff < best_diff) {
                best_diff = diff;
                best_t = t;
            }
        }
        CHECK(split.t1 == best_t);
        // boundary falls on a snapshot edge: no train timestamp appears in val
        for (const auto& e : split.val) CHECK(e.t > split.t1);
    }

    SECTION("fewer than 3 distinct timestamps rejected") {
        std::vector<Event> stream{{0, 1, 1.0, {}}, {1, 2, 2.0, {}}};
        CHECK_THROWS_AS(chronological_split(stream, cfg, GraphMode::Ctdg),
                        std::invalid_argument);
    }
}

TEST_CASE("sample_recent_neighbors") {
    SECTION("unseen node gives all-invalid batch") {
        InteractionStore store;
        auto b = store.sample_recent(42, 10.0, 4);
        CHECK(b.valid_count() == 0);
    }

    SECTION("strict inequality excludes the query time") {
        InteractionStore store;
        store.ingest({7, 1, 1.0, {}});
        store.ingest({7, 2, 3.0, {}});
        store.ingest({7, 3, 5.0, {}});
        auto b = store.sample_recent(7, 5.0, 2);
        REQUIRE(b.valid_count() == 2);
        CHECK(b.timestamps[0] == 3.0);
        CHECK(b.ids[0] == 2);
        CHECK(b.timestamps[1] == 1.0);
        CHECK(b.ids[1] == 1);
    }

    SECTION("random stream matches brute-force filter-sort-truncate oracle") {
        std::mt19937 rng(5);
        std::uniform_int_distribution<NodeId> node(0, 19);
        std::uniform_real_distribution<double> dt(0.0, 1.0);
        InteractionStore store;
        struct Raw {
            NodeId a, b;
            double t;
            std::size_t order;
        };
        std::vector<Raw> raws;
        double t = 0.0;
        for (std::size_t i = 0; i < 200; ++i) {
            if (i % 3 != 0) t += dt(rng);  // frequent timestamp ties
            NodeId a = node(rng), b = node(rng);
            store.ingest({a, b, t, {}});
            raws.push_back({a, b, t, i});
        }
        std::uniform_real_distribution<double> qt(0.0, t + 1.0);
        for (int q = 0; q < 50; ++q) {
            NodeId n = node(rng);
            double query = qt(rng);
            auto batch = store.sample_recent(n, query, 6);

            // oracle: all interactions of n strictly before query, sorted by
            // (t, ingestion order) descending, truncated to 6
            struct Hit {
                NodeId nbr;
                double t;
                std::size_t order;
            };
            std::vector<Hit> hits;
            for (const auto& r : raws) {
                if (r.t >= query) continue;
                // self-loops enter the node's log twice, once per endpoint
                if (r.a == n) hits.push_back({r.b, r.t, r.order});
                if (r.b == n) hits.push_back({r.a, r.t, r.order});
            }
            std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
                return x.t != y.t ? x.t > y.t : x.order > y.order;
            });
            hits.resize(std::min<std::size_t>(hits.size(), 6));
            REQUIRE(batch.valid_count() == hits.size());
            for (std::size_t k = 0; k < hits.size(); ++k) {
                REQUIRE(batch.ids[k] == hits[k].nbr);
                REQUIRE(batch.timestamps[k] == hits[k].t);
            }
        }
    }

    SECTION("auditing wrapper sees no violations on well-formed queries") {
        InteractionStore store;
        store.ingest({1, 2, 1.0, {}});
        store.ingest({1, 3, 2.0, {}});
        AuditedStore audit(store);
        audit.sample_recent(1, 3.0, 4);
        audit.sample_recent(1, 2.0, 4);
        CHECK(audit.violations() == 0);
        CHECK(audit.samples() == 3);
    }
}

TEST_CASE("make_minibatches") {
    auto mk = [](std::size_t n) {
        std::vector<Event> ev(n);
        for (std::size_t i = 0; i < n; ++i) ev[i].t = double(i);
        return ev;
    };
    SECTION("1500 events, B=600 gives sizes 600,600,300") {
        auto batches = make_minibatches(mk(1500), 600);
        REQUIRE(batches.size() == 3);
        CHECK(batches[0].size() == 600);
        CHECK(batches[1].size() == 600);
        CHECK(batches[2].size() == 300);
    }
    SECTION("exact fit") {
        auto batches = make_minibatches(mk(600), 600);
        REQUIRE(batches.size() == 1);
        CHECK(batches[0].size() == 600);
    }
    SECTION("single short batch, unpadded") {
        auto batches = make_minibatches(mk(599), 600);
        REQUIRE(batches.size() == 1);
        CHECK(batches[0].size() == 599);
    }
    SECTION("B=0 rejected") {
        CHECK_THROWS_AS(make_minibatches(mk(5), 0), std::invalid_argument);
    }
    SECTION("concatenation preserves the input in order") {
        std::mt19937 rng(6);
        for (int trial = 0; trial < 50; ++trial) {
            std::size_t n = std::uniform_int_distribution<std::size_t>(1, 2000)(rng);
            std::size_t b = std::uniform_int_distribution<std::size_t>(1, 700)(rng);
            auto ev = mk(n);
            auto batches = make_minibatches(ev, b);
            std::size_t total = 0;
            for (std::size_t bi = 0; bi < batches.size(); ++bi) {
                if (bi + 1 < batches.size()) REQUIRE(batches[bi].size() == b);
                for (const auto& e : batches[bi]) {
                    REQUIRE(e.t == double(total));
                    ++total;
                }
            }
            REQUIRE(total == n);
        }
    }
}

TEST_CASE("mask_inductive_nodes") {
    std::mt19937 rng(7);
    std::vector<Event> train;
    std::uniform_int_distribution<NodeId> node(0, 1898);
    for (int i = 0; i < 3000; ++i) train.push_back({node(rng), node(rng), double(i), {}});
    std::vector<NodeId> universe(1899);
    for (NodeId i = 0; i < 1899; ++i) universe[std::size_t(i)] = i;

    SECTION("10 percent of 1899 nodes is 189") {
        auto masked = mask_inductive_nodes(train, universe, 0.10, 123);
        CHECK(masked.held_out.size() == 189);
    }
    SECTION("same seed gives identical node sets") {
        auto a = mask_inductive_nodes(train, universe, 0.10, 9);
        auto b = mask_inductive_nodes(train, universe, 0.10, 9);
        CHECK(a.held_out == b.held_out);
    }
    SECTION("no surviving training event touches a masked node") {
        auto masked = mask_inductive_nodes(train, universe, 0.10, 11);
        for (const auto& e : masked.masked_train) {
            REQUIRE(masked.held_out.count(e.src) == 0);
            REQUIRE(masked.held_out.count(e.dst) == 0);
        }
    }
    SECTION("fraction outside (0,1) rejected") {
        CHECK_THROWS_AS(mask_inductive_nodes(train, universe, 0.0, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(mask_inductive_nodes(train, universe, 1.0, 1),
                        std::invalid_argument);
    }
}
