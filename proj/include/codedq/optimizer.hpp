#pragma once

// Two-stage parameter selection: per (N, K) find the smallest safety margin
// nu meeting the undetected-error constraint, then minimize the queue tail
// probability at tau over the candidate grid.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codedq/queueing.hpp"

namespace codedq {

struct SweepSpec {
    ChannelModel channel;
    TrafficModel traffic;
    Scheme scheme = Scheme::Bch;
    std::vector<int> candidate_n;
    // per-N candidate K; an absent/empty entry means "all embedded BCH K"
    // for BCH, and is an error for random schemes
    std::map<int, std::vector<int>> candidate_k;
    double ue_threshold = 0.0;
    int tau = 0;
    double tail_eps = 1e-12;
    double horizon_eps = 1e-10;
    unsigned threads = 0; // 0: hardware concurrency

    void validate() const;
    std::vector<int> k_candidates(int n) const;
};

enum class RowStatus { Ok, Infeasible, Unstable, Error };

const char* to_string(RowStatus s);

struct SweepRow {
    int n = 0;
    int k = 0;
    int nu = -1; // -1: no feasible margin
    double p_ue = std::numeric_limits<double>::quiet_NaN();
    double p_f = std::numeric_limits<double>::quiet_NaN();
    double mu_n = std::numeric_limits<double>::quiet_NaN();
    double stability = std::numeric_limits<double>::quiet_NaN();
    double tail = std::numeric_limits<double>::quiet_NaN();
    RowStatus status = RowStatus::Error;
    std::string note;
};

struct SweepResult {
    std::vector<SweepRow> rows; // sorted by (N, K)
    int best_index = -1;        // argmin tail among feasible stable rows
};

/// Smallest nu >= 0 with avg_undetected(N, K, nu) <= ue_threshold; the
/// search is bounded by t for BCH and by N for random codes. Empty when no
/// margin satisfies the constraint.
std::optional<int> find_min_nu(const ChannelModel& channel, Scheme scheme, int n,
                               int k, double ue_threshold);

/// Stage-1 margin selection, profile, chain solve and tail evaluation per
/// row. Row failures are recorded in the row status and never abort the
/// sweep. Ties break to smaller N, then larger K.
SweepResult run_sweep(const SweepSpec& spec);

/// Failure profile for (channel, scheme, n, k, nu), memoized process-wide:
/// stage-1 searches revisit the same profiles and sweeps repeat them.
FailureProfile cached_profile(const ChannelModel& channel, Scheme scheme, int n,
                              int k, int nu);

} // namespace codedq
