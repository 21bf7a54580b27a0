#pragma once

// Decoding failure and undetected-error probabilities for random codes
// (maximum-likelihood or minimum-distance decoding) and primitive binary
// BCH codes (bounded-distance decoding), over BSC and Gilbert-Elliott
// channels, with a safety margin nu that trades detected failures for a
// smaller undetected-error probability.

#include <utility>
#include <vector>

#include "codedq/channel.hpp"
#include "codedq/errors.hpp"

namespace codedq {

enum class Scheme { RandomMl, RandomMd, Bch };

struct CodeSpec {
    Scheme scheme = Scheme::RandomMl;
    int n = 0;  // block length
    int k = 0;  // information bits, M = 2^k codewords
    int nu = 0; // safety margin
    // BCH only: n = 2^m - 1, correction radius t, designed distance d_min
    int m = 0;
    int t = 0;
    int d_min = 0;

    static CodeSpec random_ml(int n, int k, int nu = 0);
    static CodeSpec random_md(int n, int k, int nu = 0);
    /// looks (n, k) up in the embedded primitive-BCH table; rejects unknown
    /// pairs and margins nu > t
    static CodeSpec bch(int n, int k, int nu = 0);

    double rate() const { return static_cast<double>(k) / n; }
    void validate() const;
};

/// Embedded primitive narrow-sense binary BCH parameters for
/// N in {7, 15, 31, 63, 127, 255}: returns (k, t) pairs sorted by k.
const std::vector<std::pair<int, int>>& bch_codes_for(int n);
bool bch_lookup(int n, int k, int* t_out);

/// Decoding failure / undetected-error joint with the channel end state.
/// Undetected entries are upper bounds by construction.
struct FailureProfile {
    int states = 0;
    std::vector<double> cond_failure;    // (c,d) -> P(failure, C_{N+1}=d | C_1=c)
    std::vector<double> cond_undetected; // same shape, upper bound
    double avg_failure = 0.0;            // averaged over the stationary start state
    double avg_undetected = 0.0;

    double failure(int c, int d) const { return cond_failure[c * states + d]; }
    double undetected(int c, int d) const { return cond_undetected[c * states + d]; }
};

/// P(decoding failure | E = e) for a random code on a BSC: the competing
/// codeword falls inside the ball of radius e + nu around the received word.
/// nu = 0 recovers the classical random-coding expression.
double bsc_random_failure(const CodeSpec& code, int e);

/// Upper-bound summand for undetected failure: a competitor inside the
/// shrunken ball of radius e - nu - 1. Zero for e <= nu.
double bsc_random_undetected(const CodeSpec& code, int e);

/// Distance weight of a good-state error under the decoding rule:
/// ML weights good-state errors by ln(eps_g/(1-eps_g)) / ln(eps_b/(1-eps_b));
/// MD treats both states alike (gamma = 1).
double gec_weight_gamma(const ChannelModel& model, Scheme scheme);

/// log of V(n_g, n_b, d) = sum of C(n_g,i)C(n_b,j) over the weighted ball
/// {gamma*i + j <= d}, or {< d} when the boundary is open. Computed with
/// per-i prefix sums of C(n_b, .); membership uses a relative slack of
/// 1e-12 on the boundary. The undetected-error side uses the open ball:
/// a competitor exactly on the margin boundary still triggers a detected
/// failure.
double gec_ball_volume_log(int n_g, int n_b, double d, double gamma,
                           bool open_boundary = false);

/// Failure/undetected profile for a random code over a Gilbert-Elliott
/// channel, averaging the conditional laws over the channel state type.
FailureProfile gec_random_profile(const ChannelModel& model, const CodeSpec& code,
                                  const OccupancyDistribution& occupancy);

/// Bounded-distance rule with margin: failure iff e > t - nu.
double bch_failure(const CodeSpec& code, int e);

enum class WeightMode {
    ApproxConstant,  // 2^{-mt} * sum_{j<=t-nu} C(N,j), independent of e
    ExactBinomialAl, // exact combinatorial sum with the binomial-like A_l
    ExactTable,      // exact sum with a caller-supplied weight enumerator
};

/// W(e): probability that a weight-e error pattern lands within distance
/// t - nu of a wrong codeword. Zero for e <= t + nu (detection radius).
/// ExactTable requires weight_table[l] = A_l for l = 0..N.
double bch_undetected_weight(const CodeSpec& code, int e,
                             WeightMode mode = WeightMode::ApproxConstant,
                             const std::vector<double>* weight_table = nullptr);

/// BCH profile over the given block error law.
FailureProfile bch_profile(const ChannelModel& model, const CodeSpec& code,
                           const JointErrorDistribution& joint_err,
                           WeightMode mode = WeightMode::ApproxConstant,
                           const std::vector<double>* weight_table = nullptr);

/// Random-coding profile on a BSC (single-state pipeline; the error count
/// is Binomial(N, p)).
FailureProfile bsc_random_profile(const ChannelModel& model, const CodeSpec& code);

/// Dispatches to the right pipeline for (model.kind, code.scheme).
FailureProfile compute_profile(const ChannelModel& model, const CodeSpec& code);

/// Parses a weight-enumerator file: plain text, one "l A_l" pair per line,
/// '#' comments allowed. Missing weights default to zero.
std::vector<double> parse_weight_table(std::istream& in, int n);

} // namespace codedq
