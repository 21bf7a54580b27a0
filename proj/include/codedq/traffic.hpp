#pragma once

// Packet arrivals (Poisson or two-state MMPP) and packet-length statistics.
// All rates are per channel use; the CLI converts human units at ingestion.

#include <array>
#include <optional>
#include <vector>

#include "codedq/coding.hpp"
#include "codedq/errors.hpp"

namespace codedq {

struct MmppSpec {
    double lambda1 = 0.0; // rate while the modulator sits in state one
    double lambda2 = 0.0;
    // row-stochastic modulator transition matrix, states (one, two) = (0, 1),
    // stepped once per channel use
    std::array<std::array<double, 2>, 2> modulator{};
};

struct TrafficModel {
    double lambda = 0.0;  // packets per channel use; zero models a silent source
    double rho = 0.0;     // geometric packet-length parameter, mean 1/rho bits
    int header_bits = 0;  // h bits of every segment spent on the header
    std::optional<MmppSpec> mmpp;

    void validate() const;
    /// long-run arrival rate per channel use (modulator-averaged for MMPP)
    double mean_rate() const;
};

/// rho_r = 1 - (1 - rho)^(K - h): probability that a successfully decoded
/// codeword carries the final segment of the head-of-line packet.
double segment_completion_prob(const TrafficModel& traffic, const CodeSpec& code);

/// Per-codeword arrival law, truncated at the smallest index T whose
/// residual upper tail falls below tail_eps. Terms are exact; the residual
/// is reported separately and folded into the last forward block when the
/// queue chain is assembled.
class ArrivalDistribution {
  public:
    int block_length() const { return n_; }
    int truncation_index() const { return t_; }
    double truncation_mass() const { return residual_; }
    /// 1 for Poisson, 2 for MMPP
    int mod_states() const { return mod_states_; }

    /// P(i arrivals, modulator m -> l); Poisson ignores (m, l)
    double term(int i, int m = 0, int l = 0) const {
        return terms_[(static_cast<size_t>(i) * mod_states_ + m) * mod_states_ + l];
    }
    /// term with the row residual folded into index T, so that
    /// sum_i,l folded_term(i, m, l) = 1 exactly
    double folded_term(int i, int m = 0, int l = 0) const;
    /// P(modulator m -> l over one codeword); 1 for Poisson
    double mod_end_state(int m, int l) const {
        return end_state_[static_cast<size_t>(m) * mod_states_ + l];
    }

    friend ArrivalDistribution poisson_arrivals(const TrafficModel&, int, double);
    friend ArrivalDistribution mmpp_arrivals(const TrafficModel&, int, double);

  private:
    int n_ = 0;
    int t_ = 0;
    int mod_states_ = 1;
    double residual_ = 0.0;
    std::vector<double> terms_;     // [i][m][l]
    std::vector<double> end_state_; // [m][l]
};

ArrivalDistribution poisson_arrivals(const TrafficModel& traffic, int block_length,
                                     double tail_eps = 1e-12);

/// Joint law of (arrival count, modulator end state | start state): the
/// modulator occupancy over the block composed with the two-rate Poisson
/// mixture. Requires an MMPP configuration.
ArrivalDistribution mmpp_arrivals(const TrafficModel& traffic, int block_length,
                                  double tail_eps = 1e-12);

} // namespace codedq
