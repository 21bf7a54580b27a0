#include "codedq/simulator.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "codedq/logmath.hpp"
#include "codedq/rng.hpp"

namespace codedq {

namespace {

struct Packet {
    int64_t segments_left = 0;
    int64_t segments_total = 0;
    bool corrupted = false;
};

// Splits large means so the Knuth product loop stays short; the sum of
// independent Poisson halves is exact.
int64_t sample_poisson(CounterRng& rng, double mean) {
    int64_t total = 0;
    while (mean > 30.0) {
        mean *= 0.5;
        total += sample_poisson(rng, mean);
    }
    if (mean <= 0.0) return total;
    const double limit = std::exp(-mean);
    double prod = 1.0;
    int64_t k = -1;
    do {
        ++k;
        prod *= 1.0 - rng.next_double();
    } while (prod > limit);
    return total + k;
}

int64_t sample_geometric(CounterRng& rng, double p) {
    // support {1, 2, ...}, success probability p
    if (p >= 1.0) return 1;
    const double u = 1.0 - rng.next_double(); // (0, 1]
    return 1 + static_cast<int64_t>(std::floor(std::log(u) / std::log1p(-p)));
}

enum class Outcome { Success, Detected, Undetected };

} // namespace

void SimConfig::validate() const {
    if (slots == 0 || slots <= warmup)
        throw DomainError("slots must exceed the warmup period");
    if (length_mode == PacketLengthMode::Constant && constant_length < 1)
        throw DomainError("constant packet length must be >= 1 bit");
}

SimReport simulate(const ChannelModel& model, const CodeSpec& code,
                   const TrafficModel& traffic, const SimConfig& sim) {
    model.validate();
    code.validate();
    traffic.validate();
    sim.validate();
    const int n = code.n;
    const int states = model.state_count();
    const double rho_r = segment_completion_prob(traffic, code);

    CounterRng rng_channel(sim.seed, RngStream::Channel);
    CounterRng rng_arrivals(sim.seed, RngStream::Arrivals);
    CounterRng rng_lengths(sim.seed, RngStream::Lengths);
    CounterRng rng_decode(sim.seed, RngStream::Decode);
    CounterRng rng_mod(sim.seed, RngStream::Modulator);

    // decode laws
    std::vector<double> bch_w; // W(e) for BCH
    if (code.scheme == Scheme::Bch) {
        bch_w.assign(n + 1, 0.0);
        for (int e = code.t + code.nu + 1; e <= n; ++e)
            bch_w[e] = bch_undetected_weight(code, e);
    }
    std::unordered_map<int64_t, std::pair<double, double>> random_memo;
    const double gamma = code.scheme == Scheme::RandomMl
                             ? gec_weight_gamma(model, code.scheme)
                             : 1.0;
    const double log_2n = n * kLn2;
    const auto random_probs = [&](int ng, int eg, int eb) {
        const int64_t key = (static_cast<int64_t>(ng) * (n + 1) + eg) * (n + 1) + eb;
        const auto it = random_memo.find(key);
        if (it != random_memo.end()) return it->second;
        std::pair<double, double> pr;
        if (states == 1) {
            const int e = eg + eb;
            pr = {bsc_random_failure(code, e), bsc_random_undetected(code, e)};
        } else {
            const double dist = gamma * eg + eb;
            pr.first = one_minus_pow_m1(
                gec_ball_volume_log(ng, n - ng, dist + code.nu, gamma) - log_2n, code.k);
            pr.second =
                dist - code.nu <= 0.0
                    ? 0.0
                    : one_minus_pow_m1(gec_ball_volume_log(ng, n - ng, dist - code.nu,
                                                           gamma, true) -
                                           log_2n,
                                       code.k);
        }
        random_memo.emplace(key, pr);
        return pr;
    };

    const int64_t seg_constant =
        sim.length_mode == PacketLengthMode::Constant
            ? (sim.constant_length + (code.k - traffic.header_bits) - 1) /
                  (code.k - traffic.header_bits)
            : 0;
    const auto sample_segments = [&]() {
        return sim.length_mode == PacketLengthMode::Constant
                   ? seg_constant
                   : sample_geometric(rng_lengths, rho_r);
    };

    // channel state starts in the stationary law
    int ch_state = 0;
    if (states == 2) {
        const std::vector<double> w = model.stationary();
        ch_state = rng_channel.next_double() < w[kBad] ? kBad : kGood;
    }
    int mod_state = 0; // modulator starts in state one

    std::deque<Packet> queue;
    std::vector<uint64_t> hist;
    const uint64_t tallied = sim.slots - sim.warmup;
    const int kTauTrack = 64;
    const int batches = static_cast<int>(std::min<uint64_t>(50, tallied));
    const uint64_t batch_len = tallied / batches;
    std::vector<std::vector<uint64_t>> batch_exceed(
        batches, std::vector<uint64_t>(kTauTrack, 0));
    std::vector<uint64_t> batch_count(batches, 0);

    uint64_t n_success = 0;
    uint64_t n_detected = 0;
    uint64_t n_undetected = 0;
    uint64_t departures = 0;
    uint64_t busy_slots = 0;
    long double queue_sum = 0.0;

    for (uint64_t slot = 0; slot < sim.slots; ++slot) {
        // channel: N uses, errors per state
        int e_good = 0;
        int e_bad = 0;
        int n_good = 0;
        if (states == 1) {
            for (int i = 0; i < n; ++i)
                e_bad += rng_channel.next_double() < model.p;
        } else {
            for (int i = 0; i < n; ++i) {
                if (ch_state == kGood) {
                    ++n_good;
                    e_good += rng_channel.next_double() < model.eps_g;
                    ch_state = rng_channel.next_double() < model.beta ? kBad : kGood;
                } else {
                    e_bad += rng_channel.next_double() < model.eps_b;
                    ch_state = rng_channel.next_double() < model.alpha ? kGood : kBad;
                }
            }
        }
        const int e = e_good + e_bad;

        // decode outcome (tallied every slot; applied only when transmitting)
        Outcome outcome;
        if (code.scheme == Scheme::Bch) {
            if (e <= code.t - code.nu) {
                outcome = Outcome::Success;
            } else if (e > code.t + code.nu &&
                       rng_decode.next_double() < bch_w[e]) {
                outcome = Outcome::Undetected;
            } else {
                outcome = Outcome::Detected;
            }
        } else {
            const auto [pf, pu] = random_probs(n_good, e_good, e_bad);
            const double u = rng_decode.next_double();
            outcome = u < pu ? Outcome::Undetected
                             : (u < pf ? Outcome::Detected : Outcome::Success);
        }

        // arrivals
        double mean = traffic.lambda * n;
        if (traffic.mmpp) {
            int t1 = 0;
            for (int i = 0; i < n; ++i) {
                t1 += mod_state == 0;
                mod_state =
                    rng_mod.next_double() < traffic.mmpp->modulator[mod_state][1] ? 1 : 0;
            }
            mean = traffic.mmpp->lambda1 * t1 + traffic.mmpp->lambda2 * (n - t1);
        }
        const int64_t arriving = sample_poisson(rng_arrivals, mean);

        // departure rule on the head packet present at the slot start
        const bool busy = !queue.empty();
        if (busy) {
            Packet& head = queue.front();
            const bool accepted =
                outcome == Outcome::Success ||
                (outcome == Outcome::Undetected && sim.undetected == UndetectedMode::CrcLate);
            if (accepted) {
                if (outcome == Outcome::Undetected) head.corrupted = true;
                if (--head.segments_left == 0) {
                    if (head.corrupted) {
                        // CRC reveals the corruption: whole packet again
                        head.segments_left = head.segments_total;
                        head.corrupted = false;
                    } else {
                        queue.pop_front();
                        if (slot >= sim.warmup) ++departures;
                    }
                }
            }
        }
        for (int64_t i = 0; i < arriving; ++i) {
            const int64_t s = sample_segments();
            queue.push_back(Packet{s, s, false});
        }

        if (slot >= sim.warmup) {
            switch (outcome) {
                case Outcome::Success: ++n_success; break;
                case Outcome::Detected: ++n_detected; break;
                case Outcome::Undetected: ++n_undetected; break;
            }
            busy_slots += busy;
            const uint64_t q = queue.size();
            if (q >= hist.size()) hist.resize(q + 1, 0);
            ++hist[q];
            queue_sum += static_cast<long double>(q);
            const int b = std::min<int>(batches - 1,
                                        static_cast<int>((slot - sim.warmup) / batch_len));
            ++batch_count[b];
            for (int tau = 0; tau < kTauTrack; ++tau)
                batch_exceed[b][tau] += q > static_cast<uint64_t>(tau);
        }
    }

    SimReport rep;
    rep.slots = sim.slots;
    rep.warmup = sim.warmup;
    rep.seed = sim.seed;
    rep.n_success = n_success;
    rep.n_detected_fail = n_detected;
    rep.n_undetected_fail = n_undetected;
    rep.mean_queue = static_cast<double>(queue_sum / tallied);
    rep.effective_service_rate =
        busy_slots > 0 ? static_cast<double>(departures) / busy_slots : 0.0;

    const int tau_max = static_cast<int>(hist.size()); // ccdf reaches 0 here
    uint64_t above = tallied;
    rep.ccdf.resize(tau_max);
    for (int tau = 0; tau < tau_max; ++tau) {
        above -= hist[tau];
        // batch-means CI: sample variance of per-batch CCDF estimates
        double ci = 0.0;
        if (tau < kTauTrack && batches > 1) {
            double mean_b = 0.0;
            std::vector<double> est(batches);
            for (int b = 0; b < batches; ++b) {
                est[b] = static_cast<double>(batch_exceed[b][tau]) / batch_count[b];
                mean_b += est[b];
            }
            mean_b /= batches;
            double var = 0.0;
            for (int b = 0; b < batches; ++b)
                var += (est[b] - mean_b) * (est[b] - mean_b);
            var /= batches - 1;
            ci = 1.96 * std::sqrt(var / batches);
        }
        rep.ccdf[tau] = {static_cast<double>(above) / tallied, ci};
    }
    return rep;
}

Eigen::MatrixXd first_passage_check(const QueueChain& chain, uint64_t trials,
                                    uint64_t seed) {
    if (chain.metrics.stability_factor >= 1.0)
        throw UnsupportedError("first passage need not terminate on an unstable chain");
    const int dim = chain.block_dim;
    const int ta = static_cast<int>(chain.f.size());

    // per-row cumulative over (level shift, end state); shifts -1, 0, +1..+ta
    const int cols = dim * (2 + ta);
    std::vector<std::vector<double>> cdf(dim, std::vector<double>(cols, 0.0));
    for (int r = 0; r < dim; ++r) {
        double acc = 0.0;
        int idx = 0;
        for (int shift = -1; shift <= ta; ++shift) {
            const Eigen::MatrixXd& blk =
                shift == -1 ? chain.b : (shift == 0 ? chain.a : chain.f[shift - 1]);
            for (int d = 0; d < dim; ++d) {
                acc += blk(r, d);
                cdf[r][idx++] = acc;
            }
        }
        // rows are stochastic after residual folding; pin the last entry
        cdf[r][cols - 1] = 1.0;
    }

    CounterRng rng(seed, RngStream::FirstPassage);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(dim, dim);
    constexpr uint64_t kStepCap = 100000000ull;
    for (int r = 0; r < dim; ++r) {
        for (uint64_t trial = 0; trial < trials; ++trial) {
            int64_t depth = 1; // start one level above the target
            int state = r;
            uint64_t steps = 0;
            while (depth > 0) {
                if (++steps > kStepCap)
                    throw NumericalError("first-passage trajectory exceeded step cap");
                const double u = rng.next_double();
                const auto& row = cdf[state];
                int lo = 0;
                int hi = cols - 1;
                while (lo < hi) {
                    const int mid = (lo + hi) / 2;
                    if (row[mid] > u) hi = mid;
                    else lo = mid + 1;
                }
                depth += lo / dim - 1;
                state = lo % dim;
            }
            counts(r, state) += 1.0;
        }
    }
    return counts / static_cast<double>(trials);
}

} // namespace codedq
