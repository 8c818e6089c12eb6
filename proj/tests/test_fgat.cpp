#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "unidyg/fgat.hpp"
#include "unidyg/time_encoding.hpp"

using namespace unidyg;

namespace {

Vec random_vec(std::mt19937& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

ComplexVector scalar_c(double re, double im = 0.0) {
    return ComplexVector(Vec{re}, Vec{im});
}

double norm_diff(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("magnitude softmax basics") {
    SECTION("equal magnitudes split evenly") {
        Vec a = magnitude_softmax({scalar_c(2.0), scalar_c(0.0, 2.0)}, {true, true});
        CHECK(a[0] == Catch::Approx(0.5));
        CHECK(a[1] == Catch::Approx(0.5));
    }
    SECTION("single valid neighbor takes all weight") {
        Vec a = magnitude_softmax({scalar_c(3.0), scalar_c(9.0)}, {true, false});
        CHECK(a[0] == Catch::Approx(1.0));
        CHECK(a[1] == 0.0);
    }
    SECTION("exp ratio 1:3") {
        Vec a = magnitude_softmax({scalar_c(0.0), scalar_c(std::log(3.0))}, {true, true});
        CHECK(a[0] == Catch::Approx(0.25));
        CHECK(a[1] == Catch::Approx(0.75));
    }
    SECTION("all-invalid mask yields zero weights") {
        Vec a = magnitude_softmax({scalar_c(1.0), scalar_c(2.0)}, {false, false});
        CHECK(a[0] == 0.0);
        CHECK(a[1] == 0.0);
    }
    SECTION("valid weights sum to one, large scores included") {
        std::mt19937 rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<ComplexVector> entries;
            std::vector<bool> valid;
            std::uniform_real_distribution<double> d(0.0, 500.0);
            for (int j = 0; j < 6; ++j) {
                entries.push_back(scalar_c(d(rng), d(rng)));
                valid.push_back(j % 5 != 0);
            }
            Vec a = magnitude_softmax(entries, valid);
            double s = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) {
                if (!valid[j]) REQUIRE(a[j] == 0.0);
                s += a[j];
            }
            REQUIRE(std::abs(s - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("energy gate") {
    std::mt19937 rng(8);
    const std::size_t n = 8;

    SECTION("theta = 0 keeps every component") {
        GateParams g("g", n, 0.0);
        g.init(rng);
        ComplexVector p(random_vec(rng, n), random_vec(rng, n));
        ComplexVector out = energy_gate(p, g);
        ComplexVector expect = cmul(g.w_g.as_complex(), p);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(out.re[i] == Catch::Approx(expect.re[i] + g.b.re.value[i]).margin(1e-12));
            CHECK(out.im[i] == Catch::Approx(expect.im[i] + g.b.im.value[i]).margin(1e-12));
        }
    }

    SECTION("theta above max relative energy masks everything") {
        GateParams g("g", n, 1e9);
        g.init(rng);
        for (auto& v : g.b.re.value) v = 0.5;
        ComplexVector p(random_vec(rng, n), random_vec(rng, n));
        ComplexVector out = energy_gate(p, g);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(out.re[i] == Catch::Approx(0.5));
            CHECK(out.im[i] == Catch::Approx(0.0).margin(1e-12));
        }
    }

    SECTION("hand-computed relative energies against threshold") {
        // energies [4, 0.01, 4, 0.01], mean ~ 2; theta 0.2 keeps 1 and 3
        Vec re{2.0, 0.1, 0.0, -0.1};
        Vec im{0.0, 0.0, 2.0, 0.0};
        Vec mask = gate_mask(re, im, 0.2, GateRule::KeepHighEnergy);
        CHECK(mask == Vec{1.0, 0.0, 1.0, 0.0});
    }

    SECTION("paper-literal rule keeps only low-energy components") {
        Vec re{2.0, 0.1, 0.0, -0.1};
        Vec im{0.0, 0.0, 2.0, 0.0};
        Vec mask = gate_mask(re, im, 0.2, GateRule::KeepLowEnergy);
        CHECK(mask == Vec{0.0, 1.0, 0.0, 1.0});
    }

    SECTION("mask application is idempotent") {
        std::mt19937 r2(99);
        Vec re = random_vec(r2, 16), im = random_vec(r2, 16);
        Vec mask = gate_mask(re, im, 0.3, GateRule::KeepHighEnergy);
        Vec re2(16), im2(16);
        for (std::size_t i = 0; i < 16; ++i) {
            re2[i] = re[i] * mask[i];
            im2[i] = im[i] * mask[i];
        }
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(re2[i] * mask[i] == re2[i]);
            CHECK(im2[i] * mask[i] == im2[i]);
        }
    }

    SECTION("length mismatch is rejected") {
        GateParams g("g", 4, 0.2);
        ComplexVector p(8);
        CHECK_THROWS_AS(energy_gate(p, g), std::invalid_argument);
    }
}

TEST_CASE("fgat layer") {
    std::mt19937 rng(15);
    const std::size_t n_freq = 16, d = 8;

    SECTION("single neighbor reduces to projected value") {
        FgatParams p("f", n_freq);
        p.init(rng);
        AttentionInput in;
        in.query = random_vec(rng, d);
        in.keys = {random_vec(rng, d)};
        in.values = in.keys;
        in.valid = {true};
        Vec z = fgat_layer(in, p, d);

        ComplexVector spec = dft(zero_pad(in.values[0], n_freq));
        ComplexVector proj = cmul(p.w_v.as_complex(), spec);
        ComplexVector back = idft(proj);
        for (std::size_t i = 0; i < d; ++i)
            CHECK(z[i] == Catch::Approx(back.re[i]).margin(1e-10));
    }

    SECTION("identity value spectrum recovers the input") {
        FgatParams p("f", n_freq);
        p.init(rng);
        for (auto& v : p.w_v.re.value) v = 1.0;
        for (auto& v : p.w_v.im.value) v = 0.0;
        AttentionInput in;
        in.query = random_vec(rng, d);
        in.keys = {random_vec(rng, d)};
        in.values = in.keys;
        in.valid = {true};
        Vec z = fgat_layer(in, p, d);
        for (std::size_t i = 0; i < d; ++i)
            CHECK(z[i] == Catch::Approx(in.values[0][i]).margin(1e-10));
    }

    SECTION("no valid neighbors yields the zero vector") {
        FgatParams p("f", n_freq);
        p.init(rng);
        AttentionInput in;
        in.query = random_vec(rng, d);
        in.keys = {random_vec(rng, d), random_vec(rng, d)};
        in.values = in.keys;
        in.valid = {false, false};
        Vec z = fgat_layer(in, p, d);
        for (double x : z) CHECK(x == 0.0);
    }

    SECTION("permutation of neighbors leaves output unchanged") {
        FgatParams p("f", n_freq);
        p.init(rng);
        AttentionInput in;
        in.query = random_vec(rng, d);
        for (int j = 0; j < 5; ++j) in.keys.push_back(random_vec(rng, d));
        in.values = in.keys;
        in.valid = {true, true, false, true, true};
        Vec z1 = fgat_layer(in, p, d);

        AttentionInput perm;
        perm.query = in.query;
        for (int j : {3, 1, 4, 0, 2}) {
            perm.keys.push_back(in.keys[std::size_t(j)]);
            perm.values.push_back(in.values[std::size_t(j)]);
            perm.valid.push_back(in.valid[std::size_t(j)]);
        }
        Vec z2 = fgat_layer(perm, p, d);
        for (std::size_t i = 0; i < d; ++i)
            REQUIRE(std::abs(z1[i] - z2[i]) < 1e-12);
    }
}

TEST_CASE("fgat_n layer") {
    std::mt19937 rng(25);
    const std::size_t n_freq = 16, d = 8;

    SECTION("theta 0 and zero bias reduce to fgat with gate weights") {
        GateTriple g("g", n_freq, 0.0);
        g.init(rng);
        FgatParams p("f", n_freq);
        p.w_q.re.value = g.q.w_g.re.value;
        p.w_q.im.value = g.q.w_g.im.value;
        p.w_k.re.value = g.k.w_g.re.value;
        p.w_k.im.value = g.k.w_g.im.value;
        p.w_v.re.value = g.v.w_g.re.value;
        p.w_v.im.value = g.v.w_g.im.value;

        AttentionInput in;
        in.query = random_vec(rng, d);
        for (int j = 0; j < 3; ++j) in.keys.push_back(random_vec(rng, d));
        in.values = in.keys;
        in.valid = {true, true, true};
        Vec zn = fgat_n_layer(in, g, n_freq, d);
        Vec zf = fgat_layer(in, p, d);
        for (std::size_t i = 0; i < d; ++i)
            CHECK(zn[i] == Catch::Approx(zf[i]).margin(1e-10));
    }

    SECTION("all-invalid mask yields zero vector") {
        GateTriple g("g", n_freq, 0.2);
        g.init(rng);
        AttentionInput in;
        in.query = random_vec(rng, d);
        in.keys = {random_vec(rng, d)};
        in.values = in.keys;
        in.valid = {false};
        Vec z = fgat_n_layer(in, g, n_freq, d);
        for (double x : z) CHECK(x == 0.0);
    }

    SECTION("gated variant damps a high-frequency low-energy spike more than fgat") {
        // Paired trials: identical weights where applicable, same inputs,
        // one copy of the values carries an injected fast oscillation.
        int wins = 0;
        double mean_gated = 0.0, mean_plain = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            std::mt19937 r(1000 + trial);
            FgatParams p("f", n_freq);
            p.init(r);
            GateTriple g("g", n_freq, 0.2);
            g.q.w_g.re.value = p.w_q.re.value;
            g.q.w_g.im.value = p.w_q.im.value;
            g.k.w_g.re.value = p.w_k.re.value;
            g.k.w_g.im.value = p.w_k.im.value;
            g.v.w_g.re.value = p.w_v.re.value;
            g.v.w_g.im.value = p.w_v.im.value;

            AttentionInput clean;
            // smooth low-frequency content
            std::uniform_real_distribution<double> ph(0.0, 6.28);
            double phase = ph(r);
            clean.query = random_vec(r, d);
            for (int j = 0; j < 4; ++j) {
                Vec v(d);
                for (std::size_t i = 0; i < d; ++i)
                    v[i] = std::sin(0.3 * double(i) + phase + j);
                clean.keys.push_back(v);
            }
            clean.values = clean.keys;
            clean.valid = {true, true, true, true};

            AttentionInput spiked = clean;
            for (auto& v : spiked.values)
                for (std::size_t i = 0; i < d; ++i)
                    v[i] += 0.08 * ((i % 2 == 0) ? 1.0 : -1.0);  // Nyquist-rate spike
            spiked.keys = spiked.values;

            double dn = norm_diff(fgat_n_layer(clean, g, n_freq, d),
                                  fgat_n_layer(spiked, g, n_freq, d));
            double df = norm_diff(fgat_layer(clean, p, d), fgat_layer(spiked, p, d));
            mean_gated += dn;
            mean_plain += df;
            if (dn < df) ++wins;
        }
        INFO("gated mean " << mean_gated / 50 << " plain mean " << mean_plain / 50
                           << " wins " << wins);
        CHECK(mean_gated < mean_plain);
    }
}

TEST_CASE("gat baseline") {
    std::mt19937 rng(35);
    const std::size_t d = 6, qd = 5, kd = 4;

    SECTION("single neighbor gives Wv * V") {
        GatParams p("g", d, qd, kd);
        p.init(rng);
        AttentionInput in;
        in.query = random_vec(rng, qd);
        in.keys = {random_vec(rng, kd)};
        in.values = in.keys;
        in.valid = {true};
        Vec z = gat_layer(in, p);
        for (std::size_t r = 0; r < d; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < kd; ++c)
                s += p.w_v.value[r * kd + c] * in.values[0][c];
            CHECK(z[r] == Catch::Approx(s).margin(1e-12));
        }
    }

    SECTION("equal keys give uniform weights") {
        GatParams p("g", d, qd, kd);
        p.init(rng);
        Vec k = random_vec(rng, kd);
        AttentionInput in;
        in.query = random_vec(rng, qd);
        in.keys = {k, k, k};
        in.values = {random_vec(rng, kd), random_vec(rng, kd), random_vec(rng, kd)};
        in.valid = {true, true, true};
        Vec z = gat_layer(in, p);
        Vec mean(kd, 0.0);
        for (auto& v : in.values)
            for (std::size_t i = 0; i < kd; ++i) mean[i] += v[i] / 3.0;
        for (std::size_t r = 0; r < d; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < kd; ++c) s += p.w_v.value[r * kd + c] * mean[c];
            CHECK(z[r] == Catch::Approx(s).margin(1e-10));
        }
    }

    SECTION("matches a hand-rolled 3-neighbor computation") {
        GatParams p("g", d, qd, kd);
        p.init(rng);
        AttentionInput in;
        in.query = random_vec(rng, qd);
        for (int j = 0; j < 3; ++j) in.keys.push_back(random_vec(rng, kd));
        in.values = in.keys;
        in.valid = {true, true, true};
        Vec z = gat_layer(in, p);

        auto matv = [&](const Parameter& w, const Vec& x, std::size_t cols) {
            Vec out(d, 0.0);
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < cols; ++c) out[r] += w.value[r * cols + c] * x[c];
            return out;
        };
        Vec q = matv(p.w_q, in.query, qd);
        Vec score(3);
        for (int j = 0; j < 3; ++j) {
            Vec k = matv(p.w_k, in.keys[std::size_t(j)], kd);
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += q[i] * k[i];
            score[std::size_t(j)] = s / std::sqrt(double(d));
        }
        double mx = std::max({score[0], score[1], score[2]});
        double tot = 0.0;
        Vec a(3);
        for (int j = 0; j < 3; ++j) tot += (a[std::size_t(j)] = std::exp(score[std::size_t(j)] - mx));
        Vec expect(d, 0.0);
        for (int j = 0; j < 3; ++j) {
            Vec pv = matv(p.w_v, in.values[std::size_t(j)], kd);
            for (std::size_t i = 0; i < d; ++i) expect[i] += a[std::size_t(j)] / tot * pv[i];
        }
        for (std::size_t i = 0; i < d; ++i)
            REQUIRE(std::abs(z[i] - expect[i]) < 1e-10);
    }
}

TEST_CASE("gradient correctness of attention layers") {
    std::mt19937 rng(45);
    const std::size_t n_freq = 8, d = 4;

    AttentionInput in;
    in.query = random_vec(rng, d);
    for (int j = 0; j < 3; ++j) in.keys.push_back(random_vec(rng, d));
    in.values = in.keys;
    in.valid = {true, true, true};
    Vec target = random_vec(rng, d);

    SECTION("fgat end-to-end") {
        FgatParams p("f", n_freq);
        p.init(rng);
        double err = grad_check(p.parameters(), [&](Tape& t) {
            Var z = fgat_layer(t, to_vars(t, in), p, d);
            Var diff = t.sub(z, t.leaf(target));
            return t.sum(t.mul(diff, diff));
        });
        CHECK(err < 1e-4);
    }

    SECTION("fgat_n end-to-end") {
        GateTriple g("g", n_freq, 0.2);
        g.init(rng);
        double err = grad_check(g.parameters(), [&](Tape& t) {
            Var z = fgat_n_layer(t, to_vars(t, in), g, n_freq, d);
            Var diff = t.sub(z, t.leaf(target));
            return t.sum(t.mul(diff, diff));
        });
        CHECK(err < 1e-4);
    }

    SECTION("gat end-to-end") {
        GatParams p("g", d, d, d);
        p.init(rng);
        double err = grad_check(p.parameters(), [&](Tape& t) {
            Var z = gat_layer(t, to_vars(t, in), p);
            Var diff = t.sub(z, t.leaf(target));
            return t.sum(t.mul(diff, diff));
        });
        CHECK(err < 1e-4);
    }
}

TEST_CASE("temporal coherence ratio shrinks under delta halving") {
    // Outputs built from time encodings should move less when the time
    // shift is halved; the mean ratio stays below 0.75.
    std::mt19937 rng(55);
    const std::size_t d_t = 16, n_freq = 32, d = 16;
    TimeEncoder enc(d_t);

    double ratio_sum = 0.0;
    int count = 0;
    for (int trial = 0; trial < 100; ++trial) {
        FgatParams p("f", n_freq);
        p.init(rng);
        std::uniform_real_distribution<double> td(1.0, 50.0);
        double t0 = td(rng);
        Vec ts(4);
        for (auto& x : ts) x = td(rng) * 0.01;

        auto output_at = [&](double t_query) {
            AttentionInput in;
            in.query = enc.encode(0.0);
            for (double dt0 : ts) {
                in.keys.push_back(enc.encode(t_query - (t0 - 1.0) + dt0));
                in.valid.push_back(true);
            }
            in.values = in.keys;
            return fgat_layer(in, p, d);
        };

        const double delta = 1.0 / 16.0;
        Vec z0 = output_at(t0);
        double move_full = norm_diff(z0, output_at(t0 + delta));
        double move_half = norm_diff(z0, output_at(t0 + delta / 2.0));
        if (move_full > 1e-12) {
            ratio_sum += move_half / move_full;
            ++count;
        }
    }
    double mean_ratio = ratio_sum / double(count);
    INFO("mean halving ratio " << mean_ratio);
    CHECK(mean_ratio <= 0.75);
}
