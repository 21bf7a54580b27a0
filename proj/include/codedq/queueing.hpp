#pragma once

// Level-structured M/G/1-type chain over (channel state [, modulator state],
// queue length), and its stationary distribution via the matrix-geometric
// method. Composite states are ordered channel-major: index =
// channel_state * mod_states + mod_state; levels are queue lengths in
// packets.

#include <Eigen/Dense>
#include <vector>

#include "codedq/coding.hpp"
#include "codedq/errors.hpp"
#include "codedq/traffic.hpp"

namespace codedq {

struct ServiceMetrics {
    double rho_r = 0.0;            // segment-completion probability
    double mu_n = 0.0;             // packets served per codeword
    double lambda_n = 0.0;         // packets arriving per codeword
    double stability_factor = 0.0; // lambda_n / mu_n; < 1 for positive recurrence
};

ServiceMetrics service_rate(const FailureProfile& profile, const TrafficModel& traffic,
                            const CodeSpec& code);

struct QueueChain {
    int block_dim = 0;
    Eigen::MatrixXd a_hat; // empty-queue local block
    Eigen::MatrixXd a;     // local block
    Eigen::MatrixXd b;     // backward block (skip-free to the left)
    std::vector<Eigen::MatrixXd> f_hat; // f_hat[i-1]: 0 -> i
    std::vector<Eigen::MatrixXd> f;     // f[i-1]: q -> q+i
    double truncation_mass = 0.0;       // arrival residual folded into f.back()
    ServiceMetrics metrics;
};

/// Assembles the transition blocks from the decoding profile, the
/// segment-completion probability and the per-codeword arrival law
/// (Poisson, or MMPP when configured). Stability is not required to build.
QueueChain build_chain(const ChannelModel& model, const CodeSpec& code,
                       const TrafficModel& traffic, const FailureProfile& profile,
                       double tail_eps = 1e-12);

struct GMatrix {
    Eigen::MatrixXd g; // [r][c]: first passage one level down, entering in c
    int iterations = 0;
    double residual = 0.0; // fixed-point defect at termination
};

/// Fixed-point iteration G <- -L^{-1}(B + sum_j F^(j) G^(j+1)), L = A - I,
/// from G = 0. Refuses unstable chains unless force is set.
GMatrix solve_g(const QueueChain& chain, double tol = 1e-12, int max_iter = 100000,
                bool force = false);

struct StationaryDistribution {
    int block_dim = 0;
    std::vector<Eigen::VectorXd> levels; // pi_0, pi_1, ...
    double residual_mass = 0.0;          // mass beyond the computed horizon
    bool normalizable = true;            // false only for forced unstable solves
};

/// Ramaswami-style recursion: pi_0 from the bordered boundary system, then
/// levels until cumulative mass reaches 1 - horizon_eps (the level buffer
/// grows geometrically on demand).
StationaryDistribution solve_stationary(const QueueChain& chain, const GMatrix& g,
                                        double horizon_eps = 1e-10);

/// P(queue length > tau), counting the residual beyond the horizon as tail
/// mass (a conservative upper inclusion).
double tail_probability(const StationaryDistribution& dist, int tau);

} // namespace codedq
