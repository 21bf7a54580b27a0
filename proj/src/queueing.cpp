#include "codedq/queueing.hpp"

#include <cmath>
#include <sstream>

namespace codedq {

namespace {

constexpr int kMaxLevels = 1 << 20;

void check_chain(const QueueChain& chain) {
    if (chain.block_dim < 1 || chain.a.rows() != chain.block_dim)
        throw ConfigError("malformed queue chain");
}

} // namespace

ServiceMetrics service_rate(const FailureProfile& profile, const TrafficModel& traffic,
                            const CodeSpec& code) {
    ServiceMetrics m;
    m.rho_r = segment_completion_prob(traffic, code);
    m.mu_n = m.rho_r * (1.0 - profile.avg_failure);
    m.lambda_n = traffic.mean_rate() * code.n;
    m.stability_factor =
        m.mu_n > 0.0 ? m.lambda_n / m.mu_n : std::numeric_limits<double>::infinity();
    return m;
}

QueueChain build_chain(const ChannelModel& model, const CodeSpec& code,
                       const TrafficModel& traffic, const FailureProfile& profile,
                       double tail_eps) {
    const int cs = model.state_count();
    if (profile.states != cs)
        throw ConfigError("failure profile does not match the channel");

    const ArrivalDistribution arrivals =
        traffic.mmpp ? mmpp_arrivals(traffic, code.n, tail_eps)
                     : poisson_arrivals(traffic, code.n, tail_eps);
    const int ms = arrivals.mod_states();
    const int dim = cs * ms;
    const int ta = arrivals.truncation_index();

    // Decoding splits the channel transition mass into success and failure
    // per (start, end) state; arrival counts are independent of the error
    // count, so blocks compose at this aggregated level.
    Eigen::MatrixXd succ(cs, cs);
    Eigen::MatrixXd fail(cs, cs);
    Eigen::MatrixXd total(cs, cs);
    {
        const JointErrorDistribution joint = joint_error_distribution(model, code.n);
        for (int c = 0; c < cs; ++c) {
            for (int d = 0; d < cs; ++d) {
                total(c, d) = joint.end_state(c, d);
                fail(c, d) = profile.failure(c, d);
                succ(c, d) = total(c, d) - fail(c, d);
            }
        }
    }
    const double rho_r = segment_completion_prob(traffic, code);

    QueueChain chain;
    chain.block_dim = dim;
    chain.truncation_mass = arrivals.truncation_mass();
    chain.metrics = service_rate(profile, traffic, code);
    chain.a_hat.setZero(dim, dim);
    chain.a.setZero(dim, dim);
    chain.b.setZero(dim, dim);
    chain.f_hat.assign(ta, Eigen::MatrixXd::Zero(dim, dim));
    chain.f.assign(ta, Eigen::MatrixXd::Zero(dim, dim));

    const auto a_of = [&](int i, int m, int l) {
        return i <= ta ? arrivals.folded_term(i, m, l) : 0.0;
    };
    for (int c = 0; c < cs; ++c) {
        for (int d = 0; d < cs; ++d) {
            const double stay = fail(c, d) + succ(c, d) * (1.0 - rho_r);
            const double down = succ(c, d) * rho_r;
            for (int m = 0; m < ms; ++m) {
                for (int l = 0; l < ms; ++l) {
                    const int r = c * ms + m;
                    const int col = d * ms + l;
                    chain.b(r, col) = a_of(0, m, l) * down;
                    chain.a(r, col) = a_of(1, m, l) * down + a_of(0, m, l) * stay;
                    chain.a_hat(r, col) = a_of(0, m, l) * total(c, d);
                    for (int i = 1; i <= ta; ++i) {
                        chain.f[i - 1](r, col) =
                            a_of(i + 1, m, l) * down + a_of(i, m, l) * stay;
                        chain.f_hat[i - 1](r, col) = a_of(i, m, l) * total(c, d);
                    }
                }
            }
        }
    }
    return chain;
}

GMatrix solve_g(const QueueChain& chain, double tol, int max_iter, bool force) {
    check_chain(chain);
    if (!force && chain.metrics.stability_factor >= 1.0) {
        std::ostringstream os;
        os << "chain is unstable (stability factor " << chain.metrics.stability_factor
           << " >= 1); first passage need not terminate. Use force to solve anyway";
        throw NumericalError(os.str());
    }
    const int dim = chain.block_dim;
    const Eigen::MatrixXd l_mat = chain.a - Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(l_mat);

    const auto forward_sum = [&](const Eigen::MatrixXd& g) {
        // Horner: sum_j F^(j) G^(j+1) = (F^(1) + (F^(2) + ...)G) G^2
        if (chain.f.empty()) return Eigen::MatrixXd::Zero(dim, dim).eval();
        Eigen::MatrixXd acc = chain.f.back();
        for (int j = static_cast<int>(chain.f.size()) - 2; j >= 0; --j)
            acc = chain.f[j] + acc * g;
        return (acc * g * g).eval();
    };

    GMatrix out;
    out.g.setZero(dim, dim);
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::MatrixXd next = -lu.solve(chain.b + forward_sum(out.g));
        const double delta = (next - out.g).cwiseAbs().maxCoeff();
        out.g = next;
        out.iterations = it;
        if (delta < tol) {
            out.residual = (chain.a * out.g + chain.b + forward_sum(out.g) - out.g)
                               .cwiseAbs()
                               .maxCoeff();
            return out;
        }
    }
    std::ostringstream os;
    os << "G recursion did not converge in " << max_iter << " iterations";
    throw NumericalError(os.str());
}

StationaryDistribution solve_stationary(const QueueChain& chain, const GMatrix& g,
                                        double horizon_eps) {
    check_chain(chain);
    const int dim = chain.block_dim;
    const int ta = static_cast<int>(chain.f.size());
    const Eigen::MatrixXd l_mat = chain.a - Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd l_hat = chain.a_hat - Eigen::MatrixXd::Identity(dim, dim);

    // G powers up to the arrival truncation index
    std::vector<Eigen::MatrixXd> gp(ta + 1);
    gp[0] = Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 1; i <= ta; ++i) gp[i] = gp[i - 1] * g.g;

    // S^(j) = sum_{l>=j} F^(l) G^(l-j) with F^(0) = L; the series truncates
    // at the arrival index, with error bounded by the folded residual.
    std::vector<Eigen::MatrixXd> s(ta + 1), s_hat(ta + 1);
    for (int j = 0; j <= ta; ++j) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::MatrixXd acc_hat = Eigen::MatrixXd::Zero(dim, dim);
        for (int l = std::max(j, 1); l <= ta; ++l) {
            acc += chain.f[l - 1] * gp[l - j];
            acc_hat += chain.f_hat[l - 1] * gp[l - j];
        }
        if (j == 0) acc += l_mat;
        s[j] = acc;
        s_hat[j] = acc_hat;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> s0(s[0]);

    // boundary system: pi_0 [ (L_hat - S_hat^(1) S0^-1 B)^<drop last col> | 1 - H 1 ] = [0 | 1]
    Eigen::MatrixXd s_sum = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd s_hat_sum = Eigen::MatrixXd::Zero(dim, dim);
    for (int j = 0; j <= ta; ++j) s_sum += s[j];
    for (int j = 1; j <= ta; ++j) s_hat_sum += s_hat[j];
    const Eigen::MatrixXd h =
        s_hat_sum * Eigen::PartialPivLU<Eigen::MatrixXd>(s_sum).inverse();
    const Eigen::MatrixXd m0 =
        ta >= 1 ? (l_hat - s_hat[1] * s0.solve(chain.b)).eval() : l_hat;

    Eigen::MatrixXd bordered(dim, dim);
    if (dim > 1) bordered.leftCols(dim - 1) = m0.leftCols(dim - 1);
    bordered.col(dim - 1) =
        Eigen::VectorXd::Ones(dim) - h * Eigen::VectorXd::Ones(dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    rhs(dim - 1) = 1.0;
    const Eigen::PartialPivLU<Eigen::MatrixXd> blu(bordered.transpose());
    const Eigen::VectorXd pi0 = blu.solve(rhs);
    const double defect = (bordered.transpose() * pi0 - rhs).cwiseAbs().maxCoeff();
    if (!pi0.allFinite() || defect > 1e-8) {
        std::ostringstream os;
        os << "boundary system is singular or ill-conditioned (defect " << defect << ")";
        throw NumericalError(os.str());
    }

    StationaryDistribution out;
    out.block_dim = dim;
    out.normalizable = chain.metrics.stability_factor < 1.0;
    out.levels.push_back(pi0);
    double cum = pi0.sum();

    const Eigen::MatrixXd s0_inv_t = s0.inverse().transpose();
    int j = 1;
    while (cum < 1.0 - horizon_eps) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
        if (j <= ta) acc = s_hat[j].transpose() * out.levels[0];
        for (int k = std::max(1, j - ta); k < j; ++k)
            acc += s[j - k].transpose() * out.levels[k];
        Eigen::VectorXd pj = -(s0_inv_t * acc);
        for (int i = 0; i < dim; ++i) {
            if (pj(i) < -1e-12) {
                std::ostringstream os;
                os << "negative stationary mass " << pj(i) << " at level " << j;
                throw NumericalError(os.str());
            }
            if (pj(i) < 0.0) pj(i) = 0.0;
        }
        out.levels.push_back(pj);
        cum += pj.sum();
        ++j;
        if (j >= kMaxLevels || (!out.normalizable && j > 4096)) break;
    }
    out.residual_mass = std::max(0.0, 1.0 - cum);
    return out;
}

double tail_probability(const StationaryDistribution& dist, int tau) {
    if (tau < 0) throw DomainError("tau must be >= 0");
    if (!dist.normalizable) return 1.0;
    const int levels = static_cast<int>(dist.levels.size());
    if (tau >= levels && dist.residual_mass > 1e-6) {
        std::ostringstream os;
        os << "horizon of " << levels << " levels cannot resolve tau = " << tau
           << " (residual mass " << dist.residual_mass << ")";
        throw PrecisionError(os.str());
    }
    double acc = dist.residual_mass;
    for (int q = tau + 1; q < levels; ++q) acc += dist.levels[q].sum();
    return acc;
}

} // namespace codedq
