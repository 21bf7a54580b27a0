#include "codedq/coding.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "codedq/logmath.hpp"

namespace codedq {

namespace {

// Primitive narrow-sense binary BCH codes, m = 3..8 (Lin & Costello tables).
const std::map<int, std::vector<std::pair<int, int>>> kBchTable = {
    {7, {{1, 3}, {4, 1}}},
    {15, {{1, 7}, {5, 3}, {7, 2}, {11, 1}}},
    {31, {{1, 15}, {6, 7}, {11, 5}, {16, 3}, {21, 2}, {26, 1}}},
    {63,
     {{1, 31}, {7, 15}, {10, 13}, {16, 11}, {18, 10}, {24, 7}, {30, 6},
      {36, 5}, {39, 4}, {45, 3}, {51, 2}, {57, 1}}},
    {127,
     {{1, 63},  {8, 31},  {15, 27}, {22, 23}, {29, 21}, {36, 15}, {43, 14},
      {50, 13}, {57, 11}, {64, 10}, {71, 9},  {78, 7},  {85, 6},  {92, 5},
      {99, 4},  {106, 3}, {113, 2}, {120, 1}}},
    {255,
     {{1, 127},  {9, 63},   {13, 59},  {21, 55},  {29, 47},  {37, 45},
      {45, 43},  {47, 42},  {55, 31},  {63, 30},  {71, 29},  {79, 27},
      {87, 26},  {91, 25},  {99, 23},  {107, 22}, {115, 21}, {123, 19},
      {131, 18}, {139, 15}, {147, 14}, {155, 13}, {163, 12}, {171, 11},
      {179, 10}, {187, 9},  {191, 8},  {199, 7},  {207, 6},  {215, 5},
      {223, 4},  {231, 3},  {239, 2},  {247, 1}}},
};

void check_block(int n, int k) {
    if (n < 2 || k < 1 || k >= n) throw DomainError("code requires 1 <= K < N");
}

double stationary_average(const ChannelModel& model, const std::vector<double>& cond,
                          int states) {
    const std::vector<double> w = model.stationary();
    double acc = 0.0;
    for (int c = 0; c < states; ++c)
        for (int d = 0; d < states; ++d) acc += w[c] * cond[c * states + d];
    return acc;
}

void finalize_profile(const ChannelModel& model, FailureProfile& p) {
    p.avg_failure = stationary_average(model, p.cond_failure, p.states);
    p.avg_undetected = stationary_average(model, p.cond_undetected, p.states);
}

} // namespace

const std::vector<std::pair<int, int>>& bch_codes_for(int n) {
    const auto it = kBchTable.find(n);
    if (it == kBchTable.end()) {
        std::ostringstream os;
        os << "no primitive BCH codes of length " << n
           << " (supported N: 7, 15, 31, 63, 127, 255)";
        throw ConfigError(os.str());
    }
    return it->second;
}

bool bch_lookup(int n, int k, int* t_out) {
    const auto it = kBchTable.find(n);
    if (it == kBchTable.end()) return false;
    for (const auto& [kk, tt] : it->second) {
        if (kk == k) {
            if (t_out) *t_out = tt;
            return true;
        }
    }
    return false;
}

CodeSpec CodeSpec::random_ml(int n, int k, int nu) {
    check_block(n, k);
    if (nu < 0) throw DomainError("nu must be >= 0");
    CodeSpec c;
    c.scheme = Scheme::RandomMl;
    c.n = n;
    c.k = k;
    c.nu = nu;
    return c;
}

CodeSpec CodeSpec::random_md(int n, int k, int nu) {
    CodeSpec c = random_ml(n, k, nu);
    c.scheme = Scheme::RandomMd;
    return c;
}

CodeSpec CodeSpec::bch(int n, int k, int nu) {
    check_block(n, k);
    int t = 0;
    if (!bch_lookup(n, k, &t)) {
        std::ostringstream os;
        os << "(" << n << ", " << k << ") is not an embedded primitive BCH code";
        throw ConfigError(os.str());
    }
    if (nu < 0 || nu > t) {
        std::ostringstream os;
        os << "nu = " << nu << " must lie in [0, t] = [0, " << t
           << "] so the correction radius stays nonnegative";
        throw DomainError(os.str());
    }
    CodeSpec c;
    c.scheme = Scheme::Bch;
    c.n = n;
    c.k = k;
    c.nu = nu;
    c.t = t;
    c.d_min = 2 * t + 1;
    int m = 0;
    while ((1 << (m + 1)) - 1 <= n) ++m;
    c.m = m;
    return c;
}

void CodeSpec::validate() const {
    check_block(n, k);
    if (nu < 0) throw DomainError("nu must be >= 0");
    if (scheme == Scheme::Bch) {
        int t_chk = 0;
        if (!bch_lookup(n, k, &t_chk) || t_chk != t || nu > t)
            throw ConfigError("inconsistent BCH parameters");
    }
}

double bsc_random_failure(const CodeSpec& code, int e) {
    if (e < 0 || e > code.n) throw DomainError("error count outside [0, N]");
    const int radius = std::min(e + code.nu, code.n);
    // log of 2^-N * sum_{i<=radius} C(N,i)
    double acc = kNegInf;
    for (int i = 0; i <= radius; ++i) acc = log_add(acc, log_choose(code.n, i));
    return one_minus_pow_m1(acc - code.n * kLn2, code.k);
}

double bsc_random_undetected(const CodeSpec& code, int e) {
    if (e < 0 || e > code.n) throw DomainError("error count outside [0, N]");
    const int radius = e - code.nu - 1;
    if (radius < 0) return 0.0;
    double acc = kNegInf;
    for (int i = 0; i <= std::min(radius, code.n); ++i)
        acc = log_add(acc, log_choose(code.n, i));
    return one_minus_pow_m1(acc - code.n * kLn2, code.k);
}

double gec_weight_gamma(const ChannelModel& model, Scheme scheme) {
    if (scheme == Scheme::RandomMd || scheme == Scheme::Bch) return 1.0;
    const double eg = model.crossover(kGood);
    const double eb = model.crossover(kBad);
    if (eg <= 0.0 || eg >= 1.0 || eb <= 0.0 || eb >= 1.0)
        throw DomainError("ML weight diverges for eps in {0,1}; clamp the "
                          "crossover probabilities or use MD decoding");
    return (std::log(eg) - std::log1p(-eg)) / (std::log(eb) - std::log1p(-eb));
}

double gec_ball_volume_log(int n_g, int n_b, double d, double gamma,
                           bool open_boundary) {
    if (n_g < 0 || n_b < 0) throw DomainError("state occupancies must be >= 0");
    if (d < 0.0) return kNegInf;
    const double slack = 1e-12 * std::max(1.0, std::abs(d));
    const std::vector<double> pref_b = log_choose_prefix(n_b);
    double acc = kNegInf;
    for (int i = 0; i <= n_g; ++i) {
        const double rem = d - gamma * i;
        if (rem < -slack) break; // gamma >= 0: later i only shrink rem
        // closed: j <= rem; open: j < rem
        const int cap = open_boundary
                            ? static_cast<int>(std::ceil(rem - slack)) - 1
                            : static_cast<int>(std::floor(rem + slack));
        const int jmax = std::min(n_b, cap);
        if (jmax < 0) continue;
        acc = log_add(acc, log_choose(n_g, i) + pref_b[jmax]);
    }
    return acc;
}

FailureProfile gec_random_profile(const ChannelModel& model, const CodeSpec& code,
                                  const OccupancyDistribution& occupancy) {
    if (code.scheme != Scheme::RandomMl && code.scheme != Scheme::RandomMd)
        throw ConfigError("gec_random_profile requires a random-coding scheme");
    if (occupancy.block_length() != code.n)
        throw ConfigError("occupancy block length does not match the code");
    const int n = code.n;
    const double gamma = gec_weight_gamma(model, code.scheme);
    const double eg = model.crossover(kGood);
    const double eb = model.crossover(kBad);
    const double log_2n = n * kLn2;

    FailureProfile out;
    out.states = 2;
    out.cond_failure.assign(4, 0.0);
    out.cond_undetected.assign(4, 0.0);

    // The failure term depends on (n_g, weighted radius) only; radii repeat
    // heavily across (e_g, e_b), so bucket them at 1e-9.
    std::unordered_map<long long, double> memo;
    const auto term = [&](int ng, int nb, double radius) {
        const long long key = llround(radius * 1e9);
        const auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        const double v =
            one_minus_pow_m1(gec_ball_volume_log(ng, nb, radius, gamma) - log_2n, code.k);
        memo.emplace(key, v);
        return v;
    };

    for (int ng = 0; ng <= n; ++ng) {
        const int nb = n - ng;
        double occ_mass = 0.0;
        for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) occ_mass += occupancy.prob(c, d, ng);
        if (occ_mass == 0.0) continue;
        memo.clear();

        double p_fail = 0.0;
        double p_undet = 0.0;
        for (int egc = 0; egc <= ng; ++egc) {
            const double lg = log_binom_pmf(ng, egc, eg);
            if (lg == kNegInf) continue;
            for (int ebc = 0; ebc <= nb; ++ebc) {
                const double lw = lg + log_binom_pmf(nb, ebc, eb);
                if (lw == kNegInf) continue;
                const double w = std::exp(lw);
                const double dist = gamma * egc + ebc;
                p_fail += w * term(ng, nb, dist + code.nu);
                const double du = dist - code.nu;
                if (du > 0.0)
                    p_undet += w * one_minus_pow_m1(
                                       gec_ball_volume_log(ng, nb, du, gamma, true) -
                                           log_2n,
                                       code.k);
            }
        }
        for (int c = 0; c < 2; ++c) {
            for (int d = 0; d < 2; ++d) {
                const double occ = occupancy.prob(c, d, ng);
                out.cond_failure[c * 2 + d] += p_fail * occ;
                out.cond_undetected[c * 2 + d] += p_undet * occ;
            }
        }
    }
    finalize_profile(model, out);
    return out;
}

double bch_failure(const CodeSpec& code, int e) {
    if (code.scheme != Scheme::Bch) throw ConfigError("bch_failure requires a BCH code");
    if (e < 0 || e > code.n) throw DomainError("error count outside [0, N]");
    return e > code.t - code.nu ? 1.0 : 0.0;
}

double bch_undetected_weight(const CodeSpec& code, int e, WeightMode mode,
                             const std::vector<double>* weight_table) {
    if (code.scheme != Scheme::Bch)
        throw ConfigError("bch_undetected_weight requires a BCH code");
    if (e < 0 || e > code.n) throw DomainError("error count outside [0, N]");
    if (e <= code.t + code.nu) return 0.0; // inside the detection radius

    const int n = code.n;
    const int t = code.t;
    const int nu = code.nu;

    if (mode == WeightMode::ApproxConstant) {
        double acc = kNegInf;
        for (int j = 0; j <= t - nu; ++j) acc = log_add(acc, log_choose(n, j));
        return std::exp(acc - code.m * t * kLn2);
    }
    if (mode == WeightMode::ExactTable &&
        (weight_table == nullptr || static_cast<int>(weight_table->size()) != n + 1))
        throw ConfigError("exact mode requires a weight table with N+1 entries");

    // log A_l, either from the table or the binomial-like approximation
    // (E_l taken as zero).
    const auto log_al = [&](int l) -> double {
        if (mode == WeightMode::ExactTable) {
            const double a = (*weight_table)[l];
            return a > 0.0 ? std::log(a) : kNegInf;
        }
        const int lo = std::min(l, n - l);
        if (lo == l) { // lower half
            if (l == 0) return 0.0;
            if (l < code.d_min) return kNegInf;
            return log_choose(n, l) - code.m * t * kLn2;
        }
        const int mirror = n - l;
        if (mirror == 0) return 0.0;
        if (mirror < code.d_min) return kNegInf;
        return log_choose(n, mirror) - code.m * t * kLn2;
    };

    // count of weight-e words within distance t - nu of some codeword,
    // over C(N, e)
    double acc = kNegInf;
    for (int j = 0; j <= t - nu; ++j) {
        for (int l = std::max(0, e - j); l <= std::min(n, e + j); ++l) {
            if ((j + e - l) % 2 != 0) continue;
            const int add = (j + e - l) / 2; // zeros of the codeword flipped
            const int del = (j - e + l) / 2; // ones of the codeword flipped
            if (add < 0 || del < 0) continue;
            const double la = log_al(l);
            if (la == kNegInf) continue;
            const double lc = log_choose(n - l, add) + log_choose(l, del);
            if (lc == kNegInf) continue;
            acc = log_add(acc, la + lc);
        }
    }
    if (acc == kNegInf) return 0.0;
    return std::exp(acc - log_choose(n, e));
}

FailureProfile bch_profile(const ChannelModel& model, const CodeSpec& code,
                           const JointErrorDistribution& joint_err, WeightMode mode,
                           const std::vector<double>* weight_table) {
    if (code.scheme != Scheme::Bch) throw ConfigError("bch_profile requires a BCH code");
    if (joint_err.block_length() != code.n)
        throw ConfigError("joint error distribution block length does not match the code");
    const int states = joint_err.states();
    if (states != model.state_count())
        throw ConfigError("joint error distribution does not match the channel");

    std::vector<double> w_of_e(code.n + 1, 0.0);
    for (int e = code.t + code.nu + 1; e <= code.n; ++e)
        w_of_e[e] = bch_undetected_weight(code, e, mode, weight_table);

    FailureProfile out;
    out.states = states;
    out.cond_failure.assign(states * states, 0.0);
    out.cond_undetected.assign(states * states, 0.0);
    for (int c = 0; c < states; ++c) {
        for (int d = 0; d < states; ++d) {
            double pf = 0.0;
            double pu = 0.0;
            for (int e = 0; e <= code.n; ++e) {
                const double pr = joint_err.prob(c, d, e);
                if (e > code.t - code.nu) pf += pr;
                pu += w_of_e[e] * pr;
            }
            out.cond_failure[c * states + d] = pf;
            out.cond_undetected[c * states + d] = pu;
        }
    }
    finalize_profile(model, out);
    return out;
}

FailureProfile bsc_random_profile(const ChannelModel& model, const CodeSpec& code) {
    if (model.kind != ChannelKind::Bsc)
        throw ConfigError("bsc_random_profile requires a BSC");
    if (code.scheme == Scheme::Bch)
        throw ConfigError("bsc_random_profile requires a random-coding scheme");
    FailureProfile out;
    out.states = 1;
    out.cond_failure.assign(1, 0.0);
    out.cond_undetected.assign(1, 0.0);
    for (int e = 0; e <= code.n; ++e) {
        const double pe = std::exp(log_binom_pmf(code.n, e, model.p));
        out.cond_failure[0] += pe * bsc_random_failure(code, e);
        out.cond_undetected[0] += pe * bsc_random_undetected(code, e);
    }
    finalize_profile(model, out);
    return out;
}

FailureProfile compute_profile(const ChannelModel& model, const CodeSpec& code) {
    if (code.scheme == Scheme::Bch)
        return bch_profile(model, code, joint_error_distribution(model, code.n));
    if (model.kind == ChannelKind::Bsc) return bsc_random_profile(model, code);
    return gec_random_profile(model, code, occupancy_distribution(model, code.n));
}

std::vector<double> parse_weight_table(std::istream& in, int n) {
    std::vector<double> table(n + 1, 0.0);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long l = 0;
        double a = 0.0;
        if (!(ls >> l)) continue; // blank line
        if (!(ls >> a) || l < 0 || l > n) {
            std::ostringstream os;
            os << "weight table line " << lineno << ": expected 'l A_l' with 0 <= l <= "
               << n;
            throw ConfigError(os.str());
        }
        table[static_cast<size_t>(l)] = a;
    }
    return table;
}

} // namespace codedq
