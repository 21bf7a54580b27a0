#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "codedq/traffic.hpp"

using namespace codedq;

namespace {

TrafficModel voip() {
    TrafficModel t;
    t.lambda = 50.0 / 28750.0;
    t.rho = 1.0 / 88.55;
    t.header_bits = 2;
    return t;
}

} // namespace

TEST_CASE("segment completion probability") {
    TrafficModel t = voip();
    const CodeSpec code = CodeSpec::bch(63, 36, 1);
    const double expected = 1.0 - std::pow(1.0 - 1.0 / 88.55, 36 - 2);
    CHECK(segment_completion_prob(t, code) == doctest::Approx(expected).epsilon(1e-14));

    // one-bit packets: every decoded codeword completes the packet
    t.rho = 1.0 - 1e-16;
    CHECK(segment_completion_prob(t, code) == doctest::Approx(1.0));

    // payload exhausted by the header
    TrafficModel bad = voip();
    bad.header_bits = 40;
    CHECK_THROWS_AS(segment_completion_prob(bad, CodeSpec::bch(63, 36)), ConfigError);
}

TEST_CASE("segment count distribution matches sampled packet lengths") {
    // E[S] = 1/rho_r against the empirical mean of ceil(L / (K-h)) for
    // geometric L (sampling oracle)
    const TrafficModel t = voip();
    const CodeSpec code = CodeSpec::bch(63, 36);
    const double rho_r = segment_completion_prob(t, code);
    const int payload = code.k - t.header_bits;

    std::mt19937_64 rng(7);
    std::geometric_distribution<long> geo(t.rho); // support {0, 1, ...}
    const int samples = 1000000;
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        const long l = geo(rng) + 1;
        acc += (l + payload - 1) / payload;
    }
    const double mean = acc / samples;
    // geometric S: std dev of the mean ~ sqrt(1-p)/p/sqrt(n)
    const double sigma = std::sqrt(1.0 - rho_r) / rho_r / std::sqrt(samples);
    CHECK(std::abs(mean - 1.0 / rho_r) < 4.0 * sigma);
}

TEST_CASE("rho_r monotone in K and h") {
    const TrafficModel t = voip();
    double prev = 0.0;
    for (int k : {10, 16, 24, 36, 45}) {
        const double r = segment_completion_prob(t, CodeSpec::bch(63, k));
        CHECK(r > prev);
        prev = r;
    }
    TrafficModel more_header = voip();
    more_header.header_bits = 10;
    CHECK(segment_completion_prob(more_header, CodeSpec::bch(63, 36)) <
          segment_completion_prob(t, CodeSpec::bch(63, 36)));
}

TEST_CASE("poisson arrivals") {
    TrafficModel t = voip();
    const int n = 63;
    const auto a = poisson_arrivals(t, n);
    const double mean = t.lambda * n;

    // exact terms
    for (int i = 0; i <= std::min(a.truncation_index(), 6); ++i) {
        const double expect = std::exp(-mean) * std::pow(mean, i) / std::tgamma(i + 1.0);
        CHECK(a.term(i) == doctest::Approx(expect).epsilon(1e-12));
    }
    // normalization with residual
    double s = 0.0;
    for (int i = 0; i <= a.truncation_index(); ++i) s += a.term(i);
    CHECK(s + a.truncation_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.truncation_mass() < 1e-12);

    // mean recovered within the truncation tolerance
    double m1 = 0.0;
    for (int i = 1; i <= a.truncation_index(); ++i) m1 += i * a.term(i);
    CHECK(std::abs(m1 - mean) < 1e-12 * n + 1e-15);

    // folded terms are exactly stochastic
    double folded = 0.0;
    for (int i = 0; i <= a.truncation_index(); ++i) folded += a.folded_term(i);
    CHECK(folded == doctest::Approx(1.0).epsilon(1e-15));

    // silent source
    t.lambda = 0.0;
    const auto z = poisson_arrivals(t, n);
    CHECK(z.term(0) == 1.0);
    CHECK(z.truncation_index() == 0);
}

TEST_CASE("mmpp arrivals") {
    TrafficModel t = voip();
    MmppSpec mm;
    mm.lambda1 = 0.001;
    mm.lambda2 = 0.01;
    mm.modulator = {{{0.9, 0.1}, {0.2, 0.8}}};
    t.mmpp = mm;
    const int n = 8;

    CHECK_THROWS_AS(mmpp_arrivals(voip(), n), UnsupportedError);

    const auto a = mmpp_arrivals(t, n);
    REQUIRE(a.mod_states() == 2);
    for (int m = 0; m < 2; ++m) {
        double s = 0.0;
        for (int i = 0; i <= a.truncation_index(); ++i)
            for (int l = 0; l < 2; ++l) s += a.term(i, m, l);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }

    // direct simulation oracle: 10^7 modulated blocks
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int blocks = 10000000;
    std::vector<std::vector<long>> counts(2); // per start state: [i*2 + l]
    counts[0].assign((a.truncation_index() + 1) * 2, 0);
    counts[1].assign((a.truncation_index() + 1) * 2, 0);
    for (int b = 0; b < blocks; ++b) {
        const int start = b & 1;
        int s = start;
        int t1 = 0;
        for (int i = 0; i < n; ++i) {
            t1 += s == 0;
            s = u(rng) < mm.modulator[s][1] ? 1 : 0;
        }
        std::poisson_distribution<int> pois(mm.lambda1 * t1 + mm.lambda2 * (n - t1));
        const int arr = pois(rng);
        if (arr <= a.truncation_index()) ++counts[start][arr * 2 + s];
    }
    const double per_start = blocks / 2.0;
    for (int m = 0; m < 2; ++m) {
        for (int i = 0; i <= std::min(a.truncation_index(), 4); ++i) {
            for (int l = 0; l < 2; ++l) {
                const double expect = a.term(i, m, l);
                const double est = counts[m][i * 2 + l] / per_start;
                const double sigma =
                    std::sqrt(std::max(expect * (1 - expect), 1e-12) / per_start);
                CHECK(std::abs(est - expect) < 3.5 * sigma + 1e-9);
            }
        }
    }
}

TEST_CASE("mmpp degeneracies") {
    TrafficModel t = voip();
    const int n = 16;

    // equal rates reduce to Poisson marginally for every start state
    MmppSpec mm;
    mm.lambda1 = t.lambda;
    mm.lambda2 = t.lambda;
    mm.modulator = {{{0.7, 0.3}, {0.4, 0.6}}};
    t.mmpp = mm;
    const auto a = mmpp_arrivals(t, n);
    const auto p = poisson_arrivals(voip(), n);
    for (int m = 0; m < 2; ++m) {
        for (int i = 0; i <= std::min(a.truncation_index(), p.truncation_index()); ++i) {
            const double marg = a.term(i, m, 0) + a.term(i, m, 1);
            CHECK(marg == doctest::Approx(p.term(i)).epsilon(1e-10));
        }
    }
    CHECK(t.mean_rate() == doctest::Approx(voip().lambda).epsilon(1e-12));

    // identity modulator, start in state one: pure Poisson(lambda1 N), l = one
    mm.lambda1 = 0.002;
    mm.lambda2 = 0.05;
    mm.modulator = {{{1.0, 0.0}, {0.0, 1.0}}};
    t.mmpp = mm;
    const auto b = mmpp_arrivals(t, n);
    const double mean1 = mm.lambda1 * n;
    for (int i = 0; i <= std::min(b.truncation_index(), 8); ++i) {
        const double expect = std::exp(-mean1) * std::pow(mean1, i) / std::tgamma(i + 1.0);
        CHECK(b.term(i, 0, 0) == doctest::Approx(expect).epsilon(1e-10));
        CHECK(b.term(i, 0, 1) == 0.0);
    }
}

TEST_CASE("traffic validation") {
    TrafficModel t = voip();
    t.rho = 1.5;
    CHECK_THROWS_AS(t.validate(), DomainError);
    t = voip();
    t.header_bits = -1;
    CHECK_THROWS_AS(t.validate(), DomainError);
    t = voip();
    MmppSpec mm;
    mm.lambda1 = 0.1;
    mm.lambda2 = 0.2;
    mm.modulator = {{{0.9, 0.2}, {0.2, 0.8}}}; // row 0 sums to 1.1
    t.mmpp = mm;
    CHECK_THROWS_AS(t.validate(), DomainError);
}
