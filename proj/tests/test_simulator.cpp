#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "codedq/simulator.hpp"

using namespace codedq;

namespace {

const ChannelModel kPaperGe = ChannelModel::gilbert_elliott(0.3938, 0.0202, 0.0097, 0.3713);

TrafficModel voip() {
    TrafficModel t;
    t.lambda = 50.0 / 28750.0;
    t.rho = 1.0 / 88.55;
    t.header_bits = 2;
    return t;
}

SimConfig quick(uint64_t slots, uint64_t seed = 1) {
    SimConfig cfg;
    cfg.slots = slots;
    cfg.warmup = slots / 20;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("reproducibility and counter bookkeeping") {
    const CodeSpec code = CodeSpec::bch(15, 5, 0);
    const auto a = simulate(kPaperGe, code, voip(), quick(200000, 42));
    const auto b = simulate(kPaperGe, code, voip(), quick(200000, 42));
    CHECK(a.ccdf == b.ccdf);
    CHECK(a.mean_queue == b.mean_queue);
    CHECK(a.n_success == b.n_success);
    CHECK(a.n_detected_fail == b.n_detected_fail);
    CHECK(a.n_undetected_fail == b.n_undetected_fail);

    const auto c = simulate(kPaperGe, code, voip(), quick(200000, 43));
    CHECK(a.n_success != c.n_success); // different stream

    CHECK(a.n_success + a.n_detected_fail + a.n_undetected_fail ==
          a.slots - a.warmup);
    for (size_t tau = 1; tau < a.ccdf.size(); ++tau)
        CHECK(a.ccdf[tau].first <= a.ccdf[tau - 1].first);
}

TEST_CASE("noiseless short packets leave the queue almost surely empty") {
    const auto clean = ChannelModel::gilbert_elliott(0.3, 0.4, 0.0, 0.0);
    TrafficModel t = voip();
    t.lambda = 1e-4;     // far below service capacity
    t.rho = 1.0 - 1e-16; // one-bit packets: rho_r = 1
    const CodeSpec code = CodeSpec::bch(63, 36, 0);
    const auto rep = simulate(clean, code, t, quick(200000));
    CHECK(rep.n_detected_fail == 0);
    CHECK(rep.n_undetected_fail == 0);
    CHECK(rep.ccdf_at(1) < 2e-4);
    CHECK(rep.mean_queue < 0.05);
}

TEST_CASE("genie simulation agrees with the analytical tail") {
    const CodeSpec code = CodeSpec::bch(63, 36, 1);
    const TrafficModel t = voip();
    const auto profile = compute_profile(kPaperGe, code);
    const auto chain = build_chain(kPaperGe, code, t, profile);
    const auto dist = solve_stationary(chain, solve_g(chain));

    const auto rep = simulate(kPaperGe, code, t, quick(2000000, 7));
    for (int tau = 0; tau <= 6; ++tau) {
        const double analytic = tail_probability(dist, tau);
        const double est = rep.ccdf_at(tau);
        const double slack = 2.0 * rep.ci_at(tau) + 2e-5;
        CHECK(std::abs(est - analytic) < slack);
    }

    // effective service rate approaches mu_N
    const auto metrics = service_rate(profile, t, code);
    CHECK(rep.effective_service_rate == doctest::Approx(metrics.mu_n).epsilon(0.05));

    // undetected outcomes are drawn from the analytical bound
    const double bound = profile.avg_undetected;
    const double n = static_cast<double>(rep.slots - rep.warmup);
    const double sigma = std::sqrt(bound / n);
    CHECK(rep.n_undetected_fail / n <= bound + 4.0 * sigma);
}

TEST_CASE("crc-late detection degrades the queue when undetected errors are common") {
    // a weak high-rate code on a noisy channel mislabels blocks often
    const auto noisy = ChannelModel::gilbert_elliott(0.3, 0.1, 0.05, 0.4);
    const CodeSpec code = CodeSpec::bch(15, 11, 0);
    TrafficModel t = voip();
    t.lambda = 0.02; // keep the queue busy
    SimConfig genie = quick(400000, 5);
    SimConfig late = genie;
    late.undetected = UndetectedMode::CrcLate;
    const auto rg = simulate(noisy, code, t, genie);
    const auto rl = simulate(noisy, code, t, late);
    CHECK(rl.n_undetected_fail > 0);
    // accepted-then-retransmitted packets can only lengthen the queue
    CHECK(rl.mean_queue > 0.9 * rg.mean_queue);
}

TEST_CASE("constant packet lengths") {
    const CodeSpec code = CodeSpec::bch(63, 36, 1);
    SimConfig cfg = quick(400000, 9);
    cfg.length_mode = PacketLengthMode::Constant;
    cfg.constant_length = 90;
    const auto rep = simulate(kPaperGe, code, voip(), cfg);
    // ceil(90 / 34) = 3 segments per packet, so service is deterministic
    CHECK(rep.mean_queue > 0.0);
    CHECK(rep.ccdf_at(0) > 0.0);
    cfg.constant_length = 0;
    CHECK_THROWS_AS(simulate(kPaperGe, code, voip(), cfg), DomainError);
}

TEST_CASE("first passage: deterministic descent gives a unit column") {
    QueueChain chain;
    chain.block_dim = 2;
    chain.b = Eigen::MatrixXd::Zero(2, 2);
    chain.b(0, 0) = 0.5;
    chain.b(1, 0) = 0.5; // descents always enter state 0
    chain.a = Eigen::MatrixXd::Zero(2, 2);
    chain.a(0, 1) = 0.2;
    chain.a(1, 0) = 0.1;
    chain.f.assign(1, Eigen::MatrixXd::Zero(2, 2));
    chain.f[0] << 0.2, 0.1, 0.3, 0.1;
    chain.a_hat = chain.a;
    chain.f_hat = chain.f;
    chain.metrics.stability_factor = 0.5;
    const auto g = first_passage_check(chain, 2000, 3);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(1, 0) == 1.0);
    CHECK(g(0, 1) == 0.0);
    CHECK(g(1, 1) == 0.0);

    chain.metrics.stability_factor = 1.2;
    CHECK_THROWS_AS(first_passage_check(chain, 10, 3), UnsupportedError);
}

TEST_CASE("first passage matches the solved G matrix") {
    const CodeSpec code = CodeSpec::bch(63, 36, 1);
    const auto profile = compute_profile(kPaperGe, code);
    const auto chain = build_chain(kPaperGe, code, voip(), profile);
    const auto g = solve_g(chain);
    const uint64_t trials = 100000;
    const auto emp = first_passage_check(chain, trials, 11);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const double p = g.g(r, c);
            const double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / trials);
            CHECK(std::abs(emp(r, c) - p) < 4.5 * sigma + 1e-9);
        }
    }
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.slots = 100;
    cfg.warmup = 100;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}
