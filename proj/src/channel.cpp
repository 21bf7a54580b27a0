#include "codedq/channel.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "codedq/logmath.hpp"
#include "codedq/polymat.hpp"

namespace codedq {

namespace {

void check_prob(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << name << " = " << v << " outside [0,1]";
        throw DomainError(os.str());
    }
}

// Adaptive Simpson with absolute tolerance. The integrands here are smooth;
// the depth cap only trips on malformed inputs.
double simpson(const std::function<double(double)>& f, double a, double m, double b,
               double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
    if (depth > 60) {
        std::ostringstream os;
        os << "quadrature did not converge on [" << a << ", " << b
           << "] at tolerance " << tol;
        throw NumericalError(os.str());
    }
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, lm, m, fa, flm, fm);
    const double right = simpson(f, m, rm, b, fm, frm, fb);
    if (std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(f, a, m, b, fa, fm, fb),
                                tol, 0);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double qpsk_symbol_error(double snr_linear) {
    const double q = q_function(std::sqrt(snr_linear));
    return 1.0 - (1.0 - q) * (1.0 - q);
}

} // namespace

ChannelModel ChannelModel::bsc(double p) {
    ChannelModel m;
    m.kind = ChannelKind::Bsc;
    m.p = p;
    m.eps_g = p;
    m.eps_b = p;
    m.validate();
    return m;
}

ChannelModel ChannelModel::gilbert_elliott(double alpha, double beta, double eps_g,
                                           double eps_b) {
    ChannelModel m;
    m.kind = ChannelKind::GilbertElliott;
    m.alpha = alpha;
    m.beta = beta;
    m.eps_g = eps_g;
    m.eps_b = eps_b;
    m.validate();
    return m;
}

ChannelModel ChannelModel::from_fading(double doppler_symbol_product,
                                       double snr_threshold_db, double mean_snr_db) {
    if (doppler_symbol_product <= 0.0)
        throw DomainError("doppler_symbol_product must be positive");
    // SNR handled in linear units internally; dB converted here at the boundary.
    const double snr_ratio = std::pow(10.0, (snr_threshold_db - mean_snr_db) / 20.0);
    const double gamma_th = std::pow(10.0, snr_threshold_db / 10.0);
    const double gamma_bar = std::pow(10.0, mean_snr_db / 10.0);
    if (gamma_th >= gamma_bar)
        throw DomainError("snr threshold must lie below the mean SNR");

    const double beta = snr_ratio * doppler_symbol_product * std::sqrt(2.0 * M_PI);
    const double alpha = beta / std::expm1(snr_ratio * snr_ratio);

    // Rayleigh fading: the received SNR density is exponential with mean
    // gamma_bar. Mass above 10*gamma_bar is ignored (design tolerance 1e-10).
    auto weighted_ser = [gamma_bar](double g) {
        return std::exp(-g / gamma_bar) / gamma_bar * qpsk_symbol_error(g);
    };
    const double tol = 1e-10;
    const double bad_integral = integrate(weighted_ser, 0.0, gamma_th, tol);
    const double good_integral = integrate(weighted_ser, gamma_th, 10.0 * gamma_bar, tol);

    ChannelModel m;
    m.kind = ChannelKind::GilbertElliott;
    m.alpha = alpha;
    m.beta = beta;
    m.eps_g = (alpha + beta) / alpha * good_integral;
    m.eps_b = (alpha + beta) / beta * bad_integral;
    m.validate();
    return m;
}

double ChannelModel::crossover(int state) const {
    if (kind == ChannelKind::Bsc) return p;
    return state == kGood ? eps_g : eps_b;
}

double ChannelModel::transition(int c, int d) const {
    if (kind == ChannelKind::Bsc) return 1.0;
    if (c == kBad) return d == kGood ? alpha : 1.0 - alpha;
    return d == kBad ? beta : 1.0 - beta;
}

std::vector<double> ChannelModel::stationary() const {
    if (kind == ChannelKind::Bsc) return {1.0};
    const double s = alpha + beta;
    if (s <= 0.0) throw DomainError("alpha + beta must be positive for a stationary law");
    return {beta / s, alpha / s};
}

void ChannelModel::validate() const {
    if (kind == ChannelKind::Bsc) {
        check_prob(p, "p");
        return;
    }
    check_prob(alpha, "alpha");
    check_prob(beta, "beta");
    check_prob(eps_g, "eps_g");
    check_prob(eps_b, "eps_b");
}

double JointErrorDistribution::end_state(int c, int d) const {
    double s = 0.0;
    for (int e = 0; e <= n_; ++e) s += prob(c, d, e);
    return s;
}

std::vector<double> JointErrorDistribution::error_marginal(int c) const {
    std::vector<double> out(n_ + 1, 0.0);
    for (int d = 0; d < states_; ++d)
        for (int e = 0; e <= n_; ++e) out[e] += prob(c, d, e);
    return out;
}

JointErrorDistribution joint_error_distribution(const ChannelModel& model,
                                                int block_length) {
    model.validate();
    if (block_length < 1) throw DomainError("block length must be >= 1");
    const int n = block_length;

    if (model.kind == ChannelKind::Bsc) {
        JointErrorDistribution out(1, n);
        for (int e = 0; e <= n; ++e) {
            const double lp = log_binom_pmf(n, e, model.p);
            out.at(0, 0, e) = lp == kNegInf ? 0.0 : std::exp(lp);
        }
        return out;
    }

    // One step emits per the state occupied during the use, then transitions:
    // [P_x]_{c,d} = P_{c,d} * (1 - eps_c + eps_c x).
    PolyMatrix step(2, 1);
    for (int c = 0; c < 2; ++c) {
        const double eps = model.crossover(c);
        for (int d = 0; d < 2; ++d) {
            step.at(c, d, 0) = model.transition(c, d) * (1.0 - eps);
            step.at(c, d, 1) = model.transition(c, d) * eps;
        }
    }
    const PolyMatrix power = polymat_power(step, n);
    JointErrorDistribution out(2, n);
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
            for (int e = 0; e <= n; ++e) out.at(c, d, e) = power.at(c, d, e);
    return out;
}

OccupancyDistribution occupancy_distribution(const ChannelModel& model,
                                             int block_length) {
    model.validate();
    if (model.kind == ChannelKind::Bsc)
        throw UnsupportedError("occupancy distribution is degenerate for a BSC");
    if (block_length < 1) throw DomainError("block length must be >= 1");
    const int n = block_length;

    // x marks a use spent in the good state: [G(x)]_{c,d} = P_{c,d} x^{1{c=g}}.
    PolyMatrix step(2, 1);
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) step.at(c, d, c == kGood ? 1 : 0) = model.transition(c, d);
    const PolyMatrix power = polymat_power(step, n);
    OccupancyDistribution out(n);
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
            for (int ng = 0; ng <= n; ++ng) out.at(c, d, ng) = power.at(c, d, ng);
    return out;
}

double conditional_state_errors(int n_g, int n_b, int e_g, int e_b,
                                const ChannelModel& model) {
    model.validate();
    if (n_g < 0 || n_b < 0 || e_g < 0 || e_b < 0 || e_g > n_g || e_b > n_b)
        throw DomainError("error counts must satisfy 0 <= e_c <= n_c");
    const double lg = log_binom_pmf(n_g, e_g, model.crossover(kGood));
    const double lb = log_binom_pmf(n_b, e_b, model.crossover(kBad));
    if (lg == kNegInf || lb == kNegInf) return 0.0;
    return std::exp(lg + lb);
}

} // namespace codedq
