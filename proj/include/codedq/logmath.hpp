#pragma once

// Log-domain combinatorics. Probabilities of the form
// 1 - (1 - q)^(M-1) with q ~ 2^-N and M = 2^K appear throughout the
// decoding analysis; they are only computable when q is assembled in
// log space.

#include <cmath>
#include <limits>
#include <vector>

namespace codedq {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline const double kLn2 = std::log(2.0);

/// log C(n, k); -inf outside the support.
inline double log_choose(int n, int k) {
    if (k < 0 || k > n) return kNegInf;
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

/// pref[j] = log sum_{i<=j} C(n, i), for j = 0..n.
inline std::vector<double> log_choose_prefix(int n) {
    std::vector<double> pref(n + 1);
    double acc = kNegInf;
    for (int j = 0; j <= n; ++j) {
        acc = log_add(acc, log_choose(n, j));
        pref[j] = acc;
    }
    return pref;
}

/// log of the binomial pmf C(n,e) p^e (1-p)^(n-e).
inline double log_binom_pmf(int n, int e, double p) {
    if (e < 0 || e > n) return kNegInf;
    if (p <= 0.0) return e == 0 ? 0.0 : kNegInf;
    if (p >= 1.0) return e == n ? 0.0 : kNegInf;
    return log_choose(n, e) + e * std::log(p) + (n - e) * std::log1p(-p);
}

/// 1 - (1 - q)^(M-1) for M = 2^k codewords, with q given as log(q).
///
/// For q below 2^-60 the expansion is dominated by its first term and the
/// union bound (M-1)q is used; this also covers q too small for exp().
inline double one_minus_pow_m1(double log_q, int k) {
    if (log_q >= 0.0) return k >= 1 ? 1.0 : 0.0;
    if (k < 1) return 0.0; // single-codeword book: no competitors
    const double log_m1 =
        k * kLn2 + (k < 50 ? std::log1p(-std::pow(2.0, -k)) : 0.0);
    if (log_q < -60.0 * kLn2) {
        const double v = log_m1 + log_q;
        return v < 0.0 ? std::exp(v) : 1.0;
    }
    const double q = std::exp(log_q);
    if (q >= 1.0) return 1.0;
    return -std::expm1(std::exp(log_m1) * std::log1p(-q));
}

} // namespace codedq
