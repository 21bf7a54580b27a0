#include "codedq/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace codedq {

namespace {

CodeSpec make_code(Scheme scheme, int n, int k, int nu) {
    switch (scheme) {
        case Scheme::RandomMl: return CodeSpec::random_ml(n, k, nu);
        case Scheme::RandomMd: return CodeSpec::random_md(n, k, nu);
        case Scheme::Bch: return CodeSpec::bch(n, k, nu);
    }
    throw ConfigError("unknown scheme");
}

uint64_t fnv1a(const void* data, size_t len, uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t profile_key(const ChannelModel& ch, Scheme scheme, int n, int k, int nu) {
    uint64_t h = 14695981039346656037ull;
    const double params[5] = {ch.p, ch.alpha, ch.beta, ch.eps_g, ch.eps_b};
    const int ints[4] = {static_cast<int>(ch.kind), n, k, nu};
    h = fnv1a(params, sizeof(params), h);
    h = fnv1a(ints, sizeof(ints), h);
    h = fnv1a(&scheme, sizeof(scheme), h);
    return h;
}

std::mutex g_cache_mutex;
std::unordered_map<uint64_t, FailureProfile> g_profile_cache;

} // namespace

const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::Ok: return "ok";
        case RowStatus::Infeasible: return "infeasible";
        case RowStatus::Unstable: return "unstable";
        case RowStatus::Error: return "error";
    }
    return "?";
}

void SweepSpec::validate() const {
    channel.validate();
    traffic.validate();
    if (candidate_n.empty()) throw ConfigError("sweep requires at least one block length");
    if (!(ue_threshold > 0.0 && ue_threshold < 1.0))
        throw ConfigError("ue_threshold must lie in (0, 1)");
    if (tau < 0) throw ConfigError("tau must be >= 0");
    for (int n : candidate_n) {
        if (k_candidates(n).empty())
            throw ConfigError("no candidate K for N = " + std::to_string(n));
    }
}

std::vector<int> SweepSpec::k_candidates(int n) const {
    const auto it = candidate_k.find(n);
    if (it != candidate_k.end() && !it->second.empty()) return it->second;
    if (scheme != Scheme::Bch)
        throw ConfigError("random-coding sweeps require an explicit K grid");
    std::vector<int> ks;
    for (const auto& [k, t] : bch_codes_for(n)) ks.push_back(k);
    return ks;
}

FailureProfile cached_profile(const ChannelModel& channel, Scheme scheme, int n,
                              int k, int nu) {
    const uint64_t key = profile_key(channel, scheme, n, k, nu);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        const auto it = g_profile_cache.find(key);
        if (it != g_profile_cache.end()) return it->second;
    }
    const FailureProfile p = compute_profile(channel, make_code(scheme, n, k, nu));
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    return g_profile_cache.emplace(key, p).first->second;
}

std::optional<int> find_min_nu(const ChannelModel& channel, Scheme scheme, int n,
                               int k, double ue_threshold) {
    int nu_max = n;
    if (scheme == Scheme::Bch) {
        int t = 0;
        if (!bch_lookup(n, k, &t)) throw ConfigError("unknown BCH parameters");
        nu_max = t;
    }
    // margins stay tiny in practice; a linear scan from zero is fine
    for (int nu = 0; nu <= nu_max; ++nu) {
        if (cached_profile(channel, scheme, n, k, nu).avg_undetected <= ue_threshold)
            return nu;
    }
    return std::nullopt;
}

namespace {

SweepRow evaluate_row(const SweepSpec& spec, int n, int k) {
    SweepRow row;
    row.n = n;
    row.k = k;
    try {
        const auto nu = find_min_nu(spec.channel, spec.scheme, n, k, spec.ue_threshold);
        if (!nu) {
            row.status = RowStatus::Infeasible;
            const FailureProfile p0 = cached_profile(spec.channel, spec.scheme, n, k, 0);
            row.p_ue = p0.avg_undetected;
            row.p_f = p0.avg_failure;
            return row;
        }
        row.nu = *nu;
        const FailureProfile profile =
            cached_profile(spec.channel, spec.scheme, n, k, *nu);
        row.p_ue = profile.avg_undetected;
        row.p_f = profile.avg_failure;
        const CodeSpec code = make_code(spec.scheme, n, k, *nu);
        const ServiceMetrics metrics = service_rate(profile, spec.traffic, code);
        row.mu_n = metrics.mu_n;
        row.stability = metrics.stability_factor;
        if (metrics.stability_factor >= 1.0) {
            row.status = RowStatus::Unstable;
            row.tail = 1.0;
            return row;
        }
        const QueueChain chain =
            build_chain(spec.channel, code, spec.traffic, profile, spec.tail_eps);
        const GMatrix g = solve_g(chain);
        const StationaryDistribution dist =
            solve_stationary(chain, g, spec.horizon_eps);
        row.tail = tail_probability(dist, spec.tau);
        row.status = RowStatus::Ok;
    } catch (const std::exception& e) {
        row.status = RowStatus::Error;
        row.note = e.what();
    }
    return row;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<std::pair<int, int>> points;
    for (int n : spec.candidate_n)
        for (int k : spec.k_candidates(n)) points.emplace_back(n, k);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    SweepResult result;
    result.rows.resize(points.size());
    std::atomic<size_t> next{0};
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<size_t>(
        spec.threads > 0 ? spec.threads : hw, points.size());
    const auto work = [&]() {
        for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1))
            result.rows[i] = evaluate_row(spec, points[i].first, points[i].second);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    for (size_t i = 0; i < result.rows.size(); ++i) {
        const SweepRow& row = result.rows[i];
        if (row.status != RowStatus::Ok) continue;
        if (result.best_index < 0) {
            result.best_index = static_cast<int>(i);
            continue;
        }
        const SweepRow& best = result.rows[result.best_index];
        // deterministic tie-break: smaller N, then larger K
        if (row.tail < best.tail ||
            (row.tail == best.tail &&
             (row.n < best.n || (row.n == best.n && row.k > best.k))))
            result.best_index = static_cast<int>(i);
    }
    return result;
}

} // namespace codedq
