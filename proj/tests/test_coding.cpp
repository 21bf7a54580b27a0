#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "codedq/coding.hpp"
#include "codedq/logmath.hpp"
#include "oracles.hpp"

using namespace codedq;

namespace {

const ChannelModel kPaperGe = ChannelModel::gilbert_elliott(0.3938, 0.0202, 0.0097, 0.3713);

double bsc_binom_avg(const CodeSpec& code, double p, bool undetected) {
    double acc = 0.0;
    for (int e = 0; e <= code.n; ++e) {
        const double pe = std::exp(log_binom_pmf(code.n, e, p));
        acc += pe * (undetected ? bsc_random_undetected(code, e)
                                : bsc_random_failure(code, e));
    }
    return acc;
}

} // namespace

TEST_CASE("code spec construction") {
    CHECK_THROWS_AS(CodeSpec::random_ml(10, 10), DomainError);
    CHECK_THROWS_AS(CodeSpec::random_ml(10, 0), DomainError);
    CHECK_THROWS_AS(CodeSpec::bch(63, 40), ConfigError);   // not in the table
    CHECK_THROWS_AS(CodeSpec::bch(63, 36, 6), DomainError); // nu > t
    const CodeSpec c = CodeSpec::bch(63, 36, 1);
    CHECK(c.t == 5);
    CHECK(c.m == 6);
    CHECK(c.d_min == 11);
    CHECK(CodeSpec::bch(127, 71).t == 9);
    CHECK(CodeSpec::bch(7, 4).t == 1);
    CHECK(bch_codes_for(15).size() == 4);
    CHECK_THROWS_AS(bch_codes_for(33), ConfigError);
}

TEST_CASE("bsc random failure basics") {
    const CodeSpec c = CodeSpec::random_ml(20, 5, 2);
    // ball covers the whole space
    CHECK(bsc_random_failure(c, 18) == 1.0);
    CHECK(bsc_random_failure(c, 20) == 1.0);
    // monotone in e
    double prev = -1.0;
    for (int e = 0; e <= 20; ++e) {
        const double v = bsc_random_failure(c, e);
        CHECK(v >= prev);
        prev = v;
    }
    // undetected term vanishes inside the margin
    CHECK(bsc_random_undetected(c, 0) == 0.0);
    CHECK(bsc_random_undetected(c, 2) == 0.0);
    CHECK(bsc_random_undetected(c, 3) > 0.0);
    CHECK_THROWS_AS(bsc_random_failure(c, 21), DomainError);

    // no competitors: a single-codeword book never confuses the decoder
    CHECK(one_minus_pow_m1(-3.0, 0) == 0.0);
    // boundary sanity at full rate: finite and within [0, 1]
    const CodeSpec full = CodeSpec::random_md(16, 15, 0);
    const double v = bsc_random_failure(full, 16);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
}

TEST_CASE("paper operating point (150, 51)") {
    const double p = 0.1;
    for (const auto& [nu, expect] :
         std::array<std::pair<int, double>, 3>{{{3, 8.8110e-05}, {4, 3.6655e-05},
                                                {5, 1.4722e-05}}}) {
        const CodeSpec c = CodeSpec::random_ml(150, 51, nu);
        CHECK(bsc_binom_avg(c, p, true) == doctest::Approx(expect).epsilon(2e-4));
    }
    CHECK(bsc_binom_avg(CodeSpec::random_ml(150, 51, 4), p, true) ==
          doctest::Approx(3.67e-5).epsilon(0.02));
}

TEST_CASE("undetected bound against codebook sampling at (15, 4, nu=1)") {
    const int n = 15;
    const int k = 4;
    const int nu = 1;
    const double p = 0.1;
    const CodeSpec code = CodeSpec::random_ml(n, k, nu);
    const double bound = bsc_binom_avg(code, p, true);

    std::mt19937_64 rng(99);
    std::uniform_int_distribution<uint32_t> word(0, (1u << n) - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int trials = 1000000;
    const int m1 = (1 << k) - 1;
    long hits_ball = 0; // the bound's event: a competitor inside radius e-nu-1
    long undetected = 0;
    for (int t = 0; t < trials; ++t) {
        int e = 0;
        uint32_t y = 0;
        for (int i = 0; i < n; ++i) {
            if (u(rng) < p) {
                y |= 1u << i;
                ++e;
            }
        }
        int d1 = n + 1;
        int d2 = n + 1;
        bool in_ball = false;
        for (int j = 0; j < m1; ++j) {
            const int d = __builtin_popcount(word(rng) ^ y);
            if (d <= e - nu - 1) in_ball = true;
            if (d < d1) {
                d2 = d1;
                d1 = d;
            } else if (d < d2) {
                d2 = d;
            }
        }
        hits_ball += in_ball;
        // full margin decoder: the best competitor wins only when both the
        // transmitted word (distance e) and the runner-up stay outside d1+nu
        undetected += d1 < d2 && d1 + nu < e && d1 + nu < d2;
    }
    const double est_ball = static_cast<double>(hits_ball) / trials;
    const double sigma = std::sqrt(bound * (1 - bound) / trials);
    // the formula computes exactly the ball event
    CHECK(std::abs(est_ball - bound) < 3.5 * sigma);
    // and it upper-bounds the true undetected rate
    const double est_undet = static_cast<double>(undetected) / trials;
    CHECK(est_undet <= bound + 3.5 * sigma);
}

TEST_CASE("distance weight gamma") {
    CHECK(gec_weight_gamma(kPaperGe, Scheme::RandomMd) == 1.0);
    CHECK(gec_weight_gamma(kPaperGe, Scheme::RandomMl) ==
          doctest::Approx((std::log(0.0097) - std::log(1 - 0.0097)) /
                          (std::log(0.3713) - std::log(1 - 0.3713)))
              .epsilon(1e-14));
    CHECK(gec_weight_gamma(kPaperGe, Scheme::RandomMl) ==
          doctest::Approx(8.7837).epsilon(1e-4));
    const auto equal = ChannelModel::gilbert_elliott(0.2, 0.3, 0.05, 0.05);
    CHECK(gec_weight_gamma(equal, Scheme::RandomMl) == doctest::Approx(1.0));
    const auto degenerate = ChannelModel::gilbert_elliott(0.2, 0.3, 0.0, 0.4);
    CHECK_THROWS_AS(gec_weight_gamma(degenerate, Scheme::RandomMl), DomainError);
}

TEST_CASE("weighted ball volume") {
    // exhaustive enumeration oracle
    const auto brute = [](int ng, int nb, double d, double gamma) {
        double acc = 0.0;
        for (int i = 0; i <= ng; ++i)
            for (int j = 0; j <= nb; ++j)
                if (gamma * i + j <= d + 1e-12 * std::max(1.0, d))
                    acc += test::choose_d(ng, i) * test::choose_d(nb, j);
        return acc;
    };
    for (const auto& [ng, nb, g, d] :
         std::array<std::tuple<int, int, double, double>, 4>{
             {{4, 3, 2.5, 5.0}, {5, 2, 1.0, 3.0}, {6, 6, 8.7837, 9.0}, {3, 4, 1.0, 7.0}}}) {
        CHECK(std::exp(gec_ball_volume_log(ng, nb, d, g)) ==
              doctest::Approx(brute(ng, nb, d, g)).epsilon(1e-10));
    }
    // whole space once the radius covers it
    CHECK(std::exp(gec_ball_volume_log(4, 3, 2.5 * 4 + 3, 2.5)) ==
          doctest::Approx(128.0).epsilon(1e-12));
    CHECK(gec_ball_volume_log(3, 3, -1.0, 1.5) == kNegInf);
}

TEST_CASE("Vandermonde reduction and complement identity") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> size(0, 14);
    for (int t = 0; t < 50; ++t) {
        const int ng = size(rng);
        const int nb = size(rng);
        const int n = ng + nb;
        const int d = std::uniform_int_distribution<int>(0, n)(rng);
        // gamma = 1: single-binomial prefix sum
        double direct = kNegInf;
        for (int j = 0; j <= d; ++j) direct = log_add(direct, log_choose(n, j));
        const double vol = gec_ball_volume_log(ng, nb, d, 1.0);
        if (direct == kNegInf) {
            CHECK(vol == kNegInf);
        } else {
            CHECK(vol == doctest::Approx(direct).epsilon(1e-10));
        }
    }
    // integer gamma: ball plus complement covers the space exactly
    const int ng = 5;
    const int nb = 4;
    const double gamma = 2.0;
    for (double d : {0.0, 2.0, 5.0, 6.0, 11.0}) {
        double complement = 0.0;
        for (int i = 0; i <= ng; ++i)
            for (int j = 0; j <= nb; ++j)
                if (gamma * i + j > d + 1e-9)
                    complement += test::choose_d(ng, i) * test::choose_d(nb, j);
        const double ball = std::exp(gec_ball_volume_log(ng, nb, d, gamma));
        CHECK(ball + complement == doctest::Approx(512.0).epsilon(1e-10));
    }
}

TEST_CASE("GEC random profile reduces to the BSC pipeline under equal crossover") {
    const double p = 0.1;
    const auto ge = ChannelModel::gilbert_elliott(0.3, 0.4, p, p);
    for (int nu : {0, 1}) {
        const CodeSpec md = CodeSpec::random_md(20, 8, nu);
        const auto profile = gec_random_profile(ge, md, occupancy_distribution(ge, 20));
        CHECK(profile.avg_failure ==
              doctest::Approx(bsc_binom_avg(md, p, false)).epsilon(1e-10));
        CHECK(profile.avg_undetected ==
              doctest::Approx(bsc_binom_avg(md, p, true)).epsilon(1e-10));
        // end-state split: failure mass summed over d matches per start state
        for (int c = 0; c < 2; ++c)
            CHECK(profile.failure(c, 0) + profile.failure(c, 1) ==
                  doctest::Approx(bsc_binom_avg(md, p, false)).epsilon(1e-10));
    }
}

TEST_CASE("margin monotonicity of the GEC profile") {
    const CodeSpec base = CodeSpec::random_ml(16, 5, 0);
    const auto occ = occupancy_distribution(kPaperGe, 16);
    FailureProfile prev = gec_random_profile(kPaperGe, base, occ);
    for (int nu = 1; nu <= 5; ++nu) {
        const auto cur =
            gec_random_profile(kPaperGe, CodeSpec::random_ml(16, 5, nu), occ);
        for (int i = 0; i < 4; ++i) {
            CHECK(cur.cond_failure[i] >= prev.cond_failure[i] - 1e-15);
            CHECK(cur.cond_undetected[i] <= prev.cond_undetected[i] + 1e-15);
        }
        // bounds stay ordered
        for (int i = 0; i < 4; ++i)
            CHECK(cur.cond_undetected[i] <= cur.cond_failure[i] + 1e-15);
        prev = cur;
    }
    CHECK_THROWS_AS(
        gec_random_profile(kPaperGe, base, occupancy_distribution(kPaperGe, 12)),
        ConfigError);
}

TEST_CASE("GEC ML failure against full Monte Carlo at (12, 3)") {
    const int n = 12;
    const int k = 3;
    const CodeSpec code = CodeSpec::random_ml(n, k, 0);
    const auto profile =
        gec_random_profile(kPaperGe, code, occupancy_distribution(kPaperGe, n));
    const double gamma = gec_weight_gamma(kPaperGe, Scheme::RandomMl);

    // sample (state path, error pattern, codebook) triples
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<uint32_t> word(0, (1u << n) - 1);
    const auto w = kPaperGe.stationary();
    const int trials = 1000000;
    long fails = 0;
    for (int t = 0; t < trials; ++t) {
        int s = u(rng) < w[kBad] ? kBad : kGood;
        uint32_t good_mask = 0;
        uint32_t y = 0;
        for (int i = 0; i < n; ++i) {
            const double eps = s == kGood ? kPaperGe.eps_g : kPaperGe.eps_b;
            if (s == kGood) good_mask |= 1u << i;
            if (u(rng) < eps) y |= 1u << i;
            const double to_bad = s == kGood ? kPaperGe.beta : 1.0 - kPaperGe.alpha;
            s = u(rng) < to_bad ? kBad : kGood;
        }
        const double d_true = gamma * __builtin_popcount(y & good_mask) +
                              __builtin_popcount(y & ~good_mask & ((1u << n) - 1));
        bool fail = false;
        for (int j = 0; j < (1 << k) - 1; ++j) {
            const uint32_t x = word(rng);
            const double d = gamma * __builtin_popcount((x ^ y) & good_mask) +
                             __builtin_popcount((x ^ y) & ~good_mask & ((1u << n) - 1));
            if (d <= d_true + 1e-9) {
                fail = true;
                break;
            }
        }
        fails += fail;
    }
    const double est = static_cast<double>(fails) / trials;
    const double sigma =
        std::sqrt(profile.avg_failure * (1 - profile.avg_failure) / trials);
    CHECK(std::abs(est - profile.avg_failure) < 3.5 * sigma);
}

TEST_CASE("bch bounded distance rule") {
    const CodeSpec c0 = CodeSpec::bch(63, 36, 0);
    const CodeSpec c1 = CodeSpec::bch(63, 36, 1);
    CHECK(bch_failure(c0, 0) == 0.0);
    CHECK(bch_failure(c0, 5) == 0.0); // within radius
    CHECK(bch_failure(c0, 6) == 1.0);
    CHECK(bch_failure(c1, 5) == 1.0); // exceeds t - nu = 4
    CHECK(bch_failure(c1, 4) == 0.0);
    CHECK_THROWS_AS(bch_failure(CodeSpec::random_ml(63, 36), 3), ConfigError);
}

TEST_CASE("bch undetected weight, approximate mode") {
    const CodeSpec c = CodeSpec::bch(63, 36, 1);
    // zero inside the detection radius t + nu = 6
    CHECK(bch_undetected_weight(c, 6) == 0.0);
    double sum = 0.0;
    for (int j = 0; j <= 4; ++j) sum += test::choose_d(63, j);
    const double expect = sum * std::pow(2.0, -30);
    for (int e : {7, 20, 63})
        CHECK(bch_undetected_weight(c, e) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bch undetected weight, exact mode vs Hamming(7,4) coset counting") {
    // build the (7,4) Hamming code explicitly
    const std::array<uint32_t, 4> gen = {0b1101000, 0b0110100, 0b1110010, 0b1010001};
    std::vector<uint32_t> codewords;
    std::vector<double> enumerator(8, 0.0);
    for (uint32_t msg = 0; msg < 16; ++msg) {
        uint32_t cw = 0;
        for (int b = 0; b < 4; ++b)
            if (msg & (1u << b)) cw ^= gen[b];
        codewords.push_back(cw);
        enumerator[__builtin_popcount(cw)] += 1.0;
    }
    CHECK(enumerator[0] == 1.0);
    CHECK(enumerator[3] == 7.0);
    CHECK(enumerator[4] == 7.0);
    CHECK(enumerator[7] == 1.0);

    const CodeSpec c = CodeSpec::bch(7, 4, 0); // t = 1
    // exhaustive oracle: weight-e patterns within distance t - nu of a
    // nonzero codeword
    for (int e = 2; e <= 7; ++e) {
        long inside = 0;
        long total = 0;
        for (uint32_t v = 0; v < 128; ++v) {
            if (__builtin_popcount(v) != e) continue;
            ++total;
            for (uint32_t cw : codewords) {
                if (cw != 0 && __builtin_popcount(v ^ cw) <= 1) {
                    ++inside;
                    break;
                }
            }
        }
        const double oracle = static_cast<double>(inside) / total;
        CHECK(bch_undetected_weight(c, e, WeightMode::ExactTable, &enumerator) ==
              doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK(bch_undetected_weight(c, 1) == 0.0); // e <= t + nu
    CHECK_THROWS_AS(bch_undetected_weight(c, 3, WeightMode::ExactTable, nullptr),
                    ConfigError);
}

TEST_CASE("bch profile on the paper channel") {
    // noiseless channel: no failures at all
    const auto clean = ChannelModel::gilbert_elliott(0.3, 0.4, 0.0, 0.0);
    const CodeSpec c = CodeSpec::bch(63, 36, 1);
    const auto p0 = bch_profile(clean, c, joint_error_distribution(clean, 63));
    CHECK(p0.avg_failure == 0.0);
    CHECK(p0.avg_undetected == 0.0);

    const auto p1 = bch_profile(kPaperGe, c, joint_error_distribution(kPaperGe, 63));
    CHECK(p1.avg_undetected == doctest::Approx(8.78e-6).epsilon(0.02));

    const CodeSpec c2 = CodeSpec::bch(127, 71, 0);
    const auto p2 = bch_profile(kPaperGe, c2, joint_error_distribution(kPaperGe, 127));
    CHECK(p2.avg_undetected == doctest::Approx(3.80e-8).epsilon(0.05));

    CHECK_THROWS_AS(bch_profile(kPaperGe, c, joint_error_distribution(kPaperGe, 31)),
                    ConfigError);
}

TEST_CASE("profile dispatcher") {
    const auto bsc = ChannelModel::bsc(0.1);
    const CodeSpec rc = CodeSpec::random_ml(30, 10, 1);
    const auto p = compute_profile(bsc, rc);
    CHECK(p.states == 1);
    CHECK(p.avg_failure == doctest::Approx(bsc_binom_avg(rc, 0.1, false)).epsilon(1e-14));
    const auto pb = compute_profile(bsc, CodeSpec::bch(31, 16, 0));
    CHECK(pb.states == 1);
    const auto pg = compute_profile(kPaperGe, CodeSpec::random_md(16, 4, 1));
    CHECK(pg.states == 2);
    // undetected never exceeds failure, failure never exceeds the end-state mass
    for (int i = 0; i < 4; ++i) CHECK(pg.cond_undetected[i] <= pg.cond_failure[i]);
}

TEST_CASE("weight table parsing") {
    std::istringstream in("# Hamming(7,4)\n0 1\n3 7\n4 7\n7 1\n");
    const auto table = parse_weight_table(in, 7);
    CHECK(table[0] == 1.0);
    CHECK(table[3] == 7.0);
    CHECK(table[1] == 0.0);
    std::istringstream bad("9 4\n");
    CHECK_THROWS_AS(parse_weight_table(bad, 7), ConfigError);
}
