#include "codedq/traffic.hpp"

#include <cmath>
#include <sstream>

#include "codedq/logmath.hpp"
#include "codedq/polymat.hpp"

namespace codedq {

namespace {

// pmf[i] for i = 0..t by the stable upward recurrence; switches to
// lgamma-based evaluation when exp(-mean) underflows.
std::vector<double> poisson_pmf(double mean, int t) {
    std::vector<double> pmf(t + 1, 0.0);
    if (mean == 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (mean < 700.0) {
        pmf[0] = std::exp(-mean);
        for (int i = 1; i <= t; ++i) pmf[i] = pmf[i - 1] * mean / i;
        return pmf;
    }
    for (int i = 0; i <= t; ++i)
        pmf[i] = std::exp(i * std::log(mean) - mean - std::lgamma(i + 1.0));
    return pmf;
}

// Smallest T with P(X > T) < tail_eps for X ~ Poisson(mean), via the
// complemented cdf recurrence.
int poisson_truncation(double mean, double tail_eps) {
    if (mean == 0.0) return 0;
    double tail = -std::expm1(-mean); // P(X > 0)
    double pmf = std::exp(-mean);
    int t = 0;
    const int hard_cap =
        static_cast<int>(mean + 40.0 * std::sqrt(mean + 1.0)) + 60;
    while (tail >= tail_eps && t < hard_cap) {
        ++t;
        pmf *= mean / t;
        tail -= pmf;
    }
    return t;
}

} // namespace

void TrafficModel::validate() const {
    if (!(lambda >= 0.0)) throw DomainError("arrival rate lambda must be >= 0");
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
    if (header_bits < 0) throw DomainError("header bits must be >= 0");
    if (mmpp) {
        if (!(mmpp->lambda1 > 0.0) || !(mmpp->lambda2 > 0.0))
            throw DomainError("MMPP rates must be positive");
        for (int r = 0; r < 2; ++r) {
            double s = 0.0;
            for (int c = 0; c < 2; ++c) {
                const double v = mmpp->modulator[r][c];
                if (!(v >= 0.0 && v <= 1.0))
                    throw DomainError("modulator entries must be probabilities");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-12)
                throw DomainError("modulator rows must sum to 1");
        }
    }
}

double TrafficModel::mean_rate() const {
    if (!mmpp) return lambda;
    const double p12 = mmpp->modulator[0][1];
    const double p21 = mmpp->modulator[1][0];
    const double s = p12 + p21;
    if (s <= 0.0) return 0.5 * (mmpp->lambda1 + mmpp->lambda2); // reducible: both absorbing
    const double w1 = p21 / s;
    return w1 * mmpp->lambda1 + (1.0 - w1) * mmpp->lambda2;
}

double segment_completion_prob(const TrafficModel& traffic, const CodeSpec& code) {
    traffic.validate();
    const int payload = code.k - traffic.header_bits;
    if (payload < 1) {
        std::ostringstream os;
        os << "payload exhausted by header: K = " << code.k
           << ", h = " << traffic.header_bits;
        throw ConfigError(os.str());
    }
    return -std::expm1(payload * std::log1p(-traffic.rho));
}

double ArrivalDistribution::folded_term(int i, int m, int l) const {
    double v = term(i, m, l);
    if (i == t_) {
        double row = 0.0;
        for (int j = 0; j <= t_; ++j) row += term(j, m, l);
        v += mod_end_state(m, l) - row;
    }
    return v;
}

ArrivalDistribution poisson_arrivals(const TrafficModel& traffic, int block_length,
                                     double tail_eps) {
    traffic.validate();
    if (block_length < 1) throw DomainError("block length must be >= 1");
    const double mean = traffic.lambda * block_length;
    const int t = poisson_truncation(mean, tail_eps);

    ArrivalDistribution out;
    out.n_ = block_length;
    out.t_ = t;
    out.mod_states_ = 1;
    out.terms_ = poisson_pmf(mean, t);
    out.end_state_ = {1.0};
    double acc = 0.0;
    for (double v : out.terms_) acc += v;
    out.residual_ = std::max(0.0, 1.0 - acc);
    return out;
}

ArrivalDistribution mmpp_arrivals(const TrafficModel& traffic, int block_length,
                                  double tail_eps) {
    traffic.validate();
    if (!traffic.mmpp)
        throw UnsupportedError("mmpp_arrivals requires an MMPP configuration");
    if (block_length < 1) throw DomainError("block length must be >= 1");
    const MmppSpec& mm = *traffic.mmpp;
    const int n = block_length;

    // Occupancy of the modulator chain (same polynomial-matrix kernel as the
    // channel module); x marks a use spent in modulating state one.
    PolyMatrix step(2, 1);
    for (int m = 0; m < 2; ++m)
        for (int l = 0; l < 2; ++l) step.at(m, l, m == 0 ? 1 : 0) = mm.modulator[m][l];
    const PolyMatrix occ = polymat_power(step, n);

    // Poisson tails are monotone in the mean, so the larger rate bounds the
    // truncation index uniformly over occupation times.
    const double mean_hi = std::max(mm.lambda1, mm.lambda2) * n;
    const int t = poisson_truncation(mean_hi, tail_eps);

    ArrivalDistribution out;
    out.n_ = n;
    out.t_ = t;
    out.mod_states_ = 2;
    out.terms_.assign(static_cast<size_t>(t + 1) * 4, 0.0);
    out.end_state_.assign(4, 0.0);
    for (int m = 0; m < 2; ++m)
        for (int l = 0; l < 2; ++l)
            for (int t1 = 0; t1 <= n; ++t1)
                out.end_state_[m * 2 + l] += occ.at(m, l, t1);

    for (int t1 = 0; t1 <= n; ++t1) {
        // arrivals given occupation time: the convolution of Poisson(l1*t1)
        // and Poisson(l2*(n-t1)), i.e. Poisson of the summed mean
        const std::vector<double> pmf =
            poisson_pmf(mm.lambda1 * t1 + mm.lambda2 * (n - t1), t);
        for (int m = 0; m < 2; ++m) {
            for (int l = 0; l < 2; ++l) {
                const double o = occ.at(m, l, t1);
                if (o == 0.0) continue;
                for (int i = 0; i <= t; ++i)
                    out.terms_[(static_cast<size_t>(i) * 2 + m) * 2 + l] += pmf[i] * o;
            }
        }
    }
    double worst = 0.0;
    for (int m = 0; m < 2; ++m) {
        double acc = 0.0;
        for (int i = 0; i <= t; ++i)
            for (int l = 0; l < 2; ++l) acc += out.term(i, m, l);
        worst = std::max(worst, 1.0 - acc);
    }
    out.residual_ = std::max(0.0, worst);
    return out;
}

} // namespace codedq
