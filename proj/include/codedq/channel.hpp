#pragma once

// Binary symmetric and Gilbert-Elliott channels, and the exact joint laws
// of (error count, end state | start state) and (good-state occupancy,
// end state | start state) over a block of N channel uses.

#include <vector>

#include "codedq/errors.hpp"

namespace codedq {

// State ordering is fixed as (bad, good) everywhere.
inline constexpr int kBad = 0;
inline constexpr int kGood = 1;

enum class ChannelKind { Bsc, GilbertElliott };

struct ChannelModel {
    ChannelKind kind = ChannelKind::GilbertElliott;
    double p = 0.0;     // BSC crossover
    double alpha = 0.0; // bad -> good transition probability
    double beta = 0.0;  // good -> bad transition probability
    double eps_g = 0.0; // good-state crossover
    double eps_b = 0.0; // bad-state crossover

    static ChannelModel bsc(double p);
    static ChannelModel gilbert_elliott(double alpha, double beta, double eps_g,
                                        double eps_b);

    /// Derives a Gilbert-Elliott model from a Rayleigh-fading link: the state
    /// chain comes from level-crossing statistics at the SNR threshold, the
    /// per-state crossover probabilities from integrating the QPSK
    /// symbol-error rate against the SNR density over each region.
    static ChannelModel from_fading(double doppler_symbol_product,
                                    double snr_threshold_db, double mean_snr_db);

    int state_count() const { return kind == ChannelKind::Bsc ? 1 : 2; }
    double crossover(int state) const;
    /// one-step state transition probability [c][d]; {1} for a BSC
    double transition(int c, int d) const;
    /// stationary state distribution, indexed (bad, good); {1} for a BSC
    std::vector<double> stationary() const;

    void validate() const;
};

/// Joint law table(c, d, e) = P(E = e, C_{N+1} = d | C_1 = c) over a block
/// of N uses. C_1 is the state during the first channel use. For a BSC the
/// chain has a single state and the error marginal is Binomial(N, p).
class JointErrorDistribution {
  public:
    JointErrorDistribution(int states, int block_length)
        : states_(states), n_(block_length),
          table_(static_cast<size_t>(states) * states * (block_length + 1), 0.0) {}

    int states() const { return states_; }
    int block_length() const { return n_; }

    double prob(int c, int d, int e) const { return table_[idx(c, d, e)]; }
    double& at(int c, int d, int e) { return table_[idx(c, d, e)]; }

    /// P(C_{N+1} = d | C_1 = c)
    double end_state(int c, int d) const;
    /// P(E = e | C_1 = c), summed over end states
    std::vector<double> error_marginal(int c) const;

  private:
    size_t idx(int c, int d, int e) const {
        return (static_cast<size_t>(c) * states_ + d) * (n_ + 1) + e;
    }

    int states_;
    int n_;
    std::vector<double> table_;
};

/// Joint law table(c, d, n_g) = P(N_g = n_g, C_{N+1} = d | C_1 = c), where
/// N_g counts channel uses spent in the good state.
class OccupancyDistribution {
  public:
    OccupancyDistribution(int block_length)
        : n_(block_length), table_(4 * static_cast<size_t>(block_length + 1), 0.0) {}

    int block_length() const { return n_; }

    double prob(int c, int d, int ng) const { return table_[idx(c, d, ng)]; }
    double& at(int c, int d, int ng) { return table_[idx(c, d, ng)]; }

  private:
    size_t idx(int c, int d, int ng) const {
        return (static_cast<size_t>(c) * 2 + d) * (n_ + 1) + ng;
    }

    int n_;
    std::vector<double> table_;
};

/// Coefficients of [P_x^N]_{c,d}: exact distribution of the block error
/// count jointly with the boundary states.
JointErrorDistribution joint_error_distribution(const ChannelModel& model, int block_length);

/// Coefficients of [G(x)^N]_{c,d} with x marking each use spent in the good
/// state. Defined for Gilbert-Elliott models only.
OccupancyDistribution occupancy_distribution(const ChannelModel& model, int block_length);

/// P(E_g = e_g, E_b = e_b | N_g = n_g, N_b = n_b): product of the per-state
/// binomial laws (error counts in the two states are independent given the
/// channel state type).
double conditional_state_errors(int n_g, int n_b, int e_g, int e_b,
                                const ChannelModel& model);

} // namespace codedq
