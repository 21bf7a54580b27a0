#pragma once

// Monte Carlo validation of the analytical pipeline: slot-by-slot channel
// evolution, decoding outcomes, arrivals and queue dynamics, with the CCDF
// of the queue occupancy and batch-means confidence intervals.

#include <cstdint>
#include <vector>

#include "codedq/queueing.hpp"

namespace codedq {

enum class PacketLengthMode { Geometric, Constant };
enum class UndetectedMode { Genie, CrcLate };

struct SimConfig {
    uint64_t slots = 0;
    uint64_t warmup = 0;
    uint64_t seed = 1;
    PacketLengthMode length_mode = PacketLengthMode::Geometric;
    int constant_length = 0; // bits; required in Constant mode
    UndetectedMode undetected = UndetectedMode::Genie;

    void validate() const;
};

struct SimReport {
    // ccdf[tau] = (P(queue > tau) estimate, 95% CI half-width), tau = 0..max
    std::vector<std::pair<double, double>> ccdf;
    double mean_queue = 0.0;
    uint64_t n_success = 0;
    uint64_t n_detected_fail = 0;
    uint64_t n_undetected_fail = 0;
    double effective_service_rate = 0.0; // departures per busy slot
    uint64_t slots = 0;
    uint64_t warmup = 0;
    uint64_t seed = 0;

    double ccdf_at(int tau) const {
        if (tau < 0) return 1.0;
        return tau < static_cast<int>(ccdf.size()) ? ccdf[tau].first : 0.0;
    }
    double ci_at(int tau) const {
        return tau >= 0 && tau < static_cast<int>(ccdf.size()) ? ccdf[tau].second : 0.0;
    }
};

/// Per slot: advance the channel N uses with per-state Bernoulli errors,
/// resolve the decode outcome (BCH by error-count thresholds plus the W(e)
/// Bernoulli; random codes from the analytical conditional probabilities of
/// the realized (n_g, e_g, e_b)), apply arrivals and the departure rule.
/// Genie converts undetected errors to detected ones instantly; CrcLate
/// accepts the block and retransmits the whole packet once its CRC check
/// fails at completion.
SimReport simulate(const ChannelModel& model, const CodeSpec& code,
                   const TrafficModel& traffic, const SimConfig& sim);

/// Empirical G: start at level 3 in each state, record the entry state on
/// first passage into level 2. Refuses unstable chains.
Eigen::MatrixXd first_passage_check(const QueueChain& chain, uint64_t trials,
                                    uint64_t seed = 1);

} // namespace codedq
