// codedq: queueing analysis and code-parameter selection for coded
// transmissions over BSC and Gilbert-Elliott channels.
//
// Subcommands: analyze | sweep | simulate | presets
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "codedq/optimizer.hpp"
#include "codedq/scenario.hpp"
#include "codedq/simulator.hpp"

using nlohmann::json;
using namespace codedq;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CommonOpts {
    std::string scenario_path;
    std::string preset;
    std::string out;
    std::string format = "csv";
    int tau = -1;
    bool force_unstable = false;
};

Scenario resolve_scenario(const CommonOpts& opts) {
    if (!opts.scenario_path.empty() && !opts.preset.empty())
        throw ConfigError("give either --scenario or --preset, not both");
    if (!opts.scenario_path.empty()) return load_scenario(opts.scenario_path);
    if (!opts.preset.empty()) return preset_scenario(opts.preset);
    throw ConfigError("a scenario is required: --scenario <path> or --preset <name>");
}

std::string unit_header(const Scenario& s) {
    std::ostringstream os;
    os << "# lambda_per_use = " << fmt(s.traffic.lambda);
    if (s.bit_rate_bps > 0.0)
        os << " (from " << fmt(s.packets_per_second) << " packets/s at "
           << fmt(s.bit_rate_bps / 1000.0) << " kb/s)";
    os << ", rho = " << fmt(s.traffic.rho) << ", header_bits = " << s.traffic.header_bits;
    return os.str();
}

std::string derived_out_path(const Scenario& s, const std::string& cmd,
                             const std::string& label, const std::string& format) {
    std::string path = s.name + "_" + cmd;
    if (!label.empty()) path += "_" + label;
    return path + "." + format;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << text;
}

struct AnalyzeResult {
    CodeSpec code;
    FailureProfile profile;
    ServiceMetrics metrics;
    bool solved = false;
    StationaryDistribution dist;
    double tail = 1.0;
    int tau = 0;
};

AnalyzeResult analyze_point(const Scenario& s, int tau, bool force) {
    AnalyzeResult r;
    r.tau = tau;
    int nu = 0;
    if (s.nu) {
        nu = *s.nu;
    } else {
        if (!s.ue_threshold)
            throw ConfigError("nu = auto needs ue_threshold in [constraints]");
        if (!s.n || !s.k) throw ConfigError("analyze needs a single (n, k) point");
        const auto found = find_min_nu(s.channel, s.scheme, *s.n, *s.k, *s.ue_threshold);
        if (!found)
            throw ConfigError("no feasible safety margin meets the undetected-error "
                              "constraint at this (n, k)");
        nu = *found;
    }
    r.code = s.code_point(nu);
    r.profile = compute_profile(s.channel, r.code);
    r.metrics = service_rate(r.profile, s.traffic, r.code);
    if (r.metrics.stability_factor < 1.0 || force) {
        const QueueChain chain = build_chain(s.channel, r.code, s.traffic, r.profile);
        const GMatrix g = solve_g(chain, 1e-12, 100000, force);
        r.dist = solve_stationary(chain, g);
        r.tail = tail_probability(r.dist, tau);
        r.solved = true;
    }
    return r;
}

int cmd_analyze(const CommonOpts& opts, bool levels) {
    const Scenario s = resolve_scenario(opts);
    const int tau = opts.tau >= 0 ? opts.tau : s.tau.value_or(0);
    const AnalyzeResult r = analyze_point(s, tau, opts.force_unstable);

    const bool unstable = r.metrics.stability_factor >= 1.0;
    std::cout << "scenario " << s.name << ": scheme "
              << (r.code.scheme == Scheme::Bch
                      ? "bch"
                      : (r.code.scheme == Scheme::RandomMl ? "random_ml" : "random_md"))
              << " (N, K, nu) = (" << r.code.n << ", " << r.code.k << ", " << r.code.nu
              << ")\n"
              << "  P_f        = " << fmt(r.profile.avg_failure) << "\n"
              << "  P_ue       = " << fmt(r.profile.avg_undetected) << " (upper bound)\n"
              << "  rho_r      = " << fmt(r.metrics.rho_r) << "\n"
              << "  mu_N       = " << fmt(r.metrics.mu_n) << " packets/codeword\n"
              << "  lambda_N   = " << fmt(r.metrics.lambda_n) << " packets/codeword\n"
              << "  stability  = " << fmt(r.metrics.stability_factor)
              << (unstable ? "  ** UNSTABLE **" : "") << "\n";
    if (r.solved) {
        std::cout << "  tail(" << tau << ")    = " << fmt(r.tail)
                  << (r.dist.normalizable ? "" : "  (non-normalizable, forced)") << "\n";
    } else {
        std::cout << "  tail(" << tau << ")    = 1 (unstable; use --force-unstable to "
                     "solve anyway)\n";
    }
    if (levels && r.solved) {
        std::cout << "  level  pi(level)  ccdf\n";
        for (size_t q = 0; q < r.dist.levels.size(); ++q) {
            std::cout << "  " << q << "  " << fmt(r.dist.levels[q].sum()) << "  "
                      << fmt(tail_probability(r.dist, static_cast<int>(q))) << "\n";
        }
    }

    if (!opts.out.empty()) {
        if (opts.format == "csv") {
            std::ostringstream os;
            os << unit_header(s) << "\n";
            os << "N,K,nu,P_ue,P_f,mu_N,stability,tail\n"
               << r.code.n << "," << r.code.k << "," << r.code.nu << ","
               << fmt(r.profile.avg_undetected) << "," << fmt(r.profile.avg_failure)
               << "," << fmt(r.metrics.mu_n) << "," << fmt(r.metrics.stability_factor)
               << "," << fmt(r.solved ? r.tail : 1.0) << "\n";
            if (levels && r.solved) {
                os << "level,pi,ccdf\n";
                for (size_t q = 0; q < r.dist.levels.size(); ++q)
                    os << q << "," << fmt(r.dist.levels[q].sum()) << ","
                       << fmt(tail_probability(r.dist, static_cast<int>(q))) << "\n";
            }
            write_text(opts.out, os.str());
        } else {
            json j;
            j["scenario"] = s.name;
            j["n"] = r.code.n;
            j["k"] = r.code.k;
            j["nu"] = r.code.nu;
            j["p_ue"] = r.profile.avg_undetected;
            j["p_f"] = r.profile.avg_failure;
            j["rho_r"] = r.metrics.rho_r;
            j["mu_n"] = r.metrics.mu_n;
            j["lambda_n"] = r.metrics.lambda_n;
            j["stability_factor"] = r.metrics.stability_factor;
            j["tau"] = tau;
            j["tail"] = r.solved ? r.tail : 1.0;
            j["unstable"] = unstable;
            if (levels && r.solved) {
                json larr = json::array();
                for (size_t q = 0; q < r.dist.levels.size(); ++q) {
                    json lv;
                    lv["level"] = q;
                    lv["pi"] = r.dist.levels[q].sum();
                    lv["ccdf"] = tail_probability(r.dist, static_cast<int>(q));
                    larr.push_back(lv);
                }
                j["levels"] = larr;
            }
            write_text(opts.out, j.dump(2) + "\n");
        }
    }
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    const Scenario s = resolve_scenario(opts);
    SweepSpec spec = s.to_sweep_spec();
    if (opts.tau >= 0) spec.tau = opts.tau;
    const SweepResult result = run_sweep(spec);

    std::ostringstream csv;
    csv << unit_header(s) << "\n";
    csv << "N,K,nu,P_ue,P_f,mu_N,stability,tail,status\n";
    for (const SweepRow& row : result.rows) {
        csv << row.n << "," << row.k << "," << row.nu << "," << fmt(row.p_ue) << ","
            << fmt(row.p_f) << "," << fmt(row.mu_n) << "," << fmt(row.stability) << ","
            << fmt(row.tail) << "," << to_string(row.status) << "\n";
    }
    if (result.best_index >= 0) {
        const SweepRow& b = result.rows[result.best_index];
        csv << "# best: N=" << b.n << " K=" << b.k << " nu=" << b.nu
            << " tail=" << fmt(b.tail) << "\n";
        std::cout << "best (N, K, nu) = (" << b.n << ", " << b.k << ", " << b.nu
                  << "), tail(" << spec.tau << ") = " << fmt(b.tail) << "\n";
    } else {
        csv << "# best: none\n";
        std::cout << "no feasible stable row\n";
    }

    const std::string path =
        opts.out.empty() ? derived_out_path(s, "sweep", "", opts.format) : opts.out;
    if (opts.format == "csv") {
        write_text(path, csv.str());
    } else {
        json j;
        j["scenario"] = s.name;
        j["tau"] = spec.tau;
        j["ue_threshold"] = spec.ue_threshold;
        json rows = json::array();
        for (const SweepRow& row : result.rows) {
            json rj;
            rj["n"] = row.n;
            rj["k"] = row.k;
            rj["nu"] = row.nu;
            rj["p_ue"] = row.p_ue;
            rj["p_f"] = row.p_f;
            rj["mu_n"] = row.mu_n;
            rj["stability"] = row.stability;
            rj["tail"] = row.tail;
            rj["status"] = to_string(row.status);
            if (!row.note.empty()) rj["note"] = row.note;
            rows.push_back(rj);
        }
        j["rows"] = rows;
        if (result.best_index >= 0) {
            j["best"] = {{"n", result.rows[result.best_index].n},
                         {"k", result.rows[result.best_index].k},
                         {"nu", result.rows[result.best_index].nu}};
        } else {
            j["best"] = nullptr;
        }
        write_text(path, j.dump(2) + "\n");
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_simulate(const CommonOpts& opts, uint64_t seed_flag, bool seed_given,
                 bool reproducible, const std::string& undetected_flag,
                 int constant_length_flag) {
    Scenario s = resolve_scenario(opts);
    if (!s.sim) throw ConfigError(s.name + ": simulate needs a [sim] section");
    SimSection sim = *s.sim;
    if (seed_given) sim.seed = seed_flag;
    if (reproducible && !sim.seed)
        throw ConfigError("--reproducible requires a seed (scenario [sim] or --seed)");
    if (!sim.seed) sim.seed = std::random_device{}();
    if (!undetected_flag.empty()) {
        if (undetected_flag == "genie") sim.undetected = UndetectedMode::Genie;
        else if (undetected_flag == "crc-late") sim.undetected = UndetectedMode::CrcLate;
        else throw ConfigError("--undetected must be genie or crc-late");
    }
    if (constant_length_flag > 0) {
        sim.length_mode = PacketLengthMode::Constant;
        sim.constant_length_bits = constant_length_flag;
    }

    int nu = 0;
    if (s.nu) {
        nu = *s.nu;
    } else {
        if (!s.ue_threshold || !s.n || !s.k)
            throw ConfigError("nu = auto needs (n, k) and ue_threshold");
        const auto found = find_min_nu(s.channel, s.scheme, *s.n, *s.k, *s.ue_threshold);
        if (!found) throw ConfigError("no feasible safety margin for this (n, k)");
        nu = *found;
    }
    const CodeSpec code = s.code_point(nu);

    SimConfig cfg;
    cfg.slots = sim.slots;
    cfg.warmup = sim.warmup;
    cfg.seed = *sim.seed;
    cfg.length_mode = sim.length_mode;
    cfg.constant_length = sim.constant_length_bits;
    cfg.undetected = sim.undetected;
    const SimReport rep = simulate(s.channel, code, s.traffic, cfg);

    std::string label = sim.undetected == UndetectedMode::Genie ? "genie" : "crclate";
    if (sim.length_mode == PacketLengthMode::Constant)
        label += "_L" + std::to_string(sim.constant_length_bits);
    const std::string path =
        opts.out.empty() ? derived_out_path(s, "sim", label, opts.format) : opts.out;

    std::ostringstream head;
    head << "# seed = " << *sim.seed << ", slots = " << rep.slots << ", warmup = "
         << rep.warmup << ", mode = " << label << "\n"
         << unit_header(s) << "\n";
    if (opts.format == "csv") {
        std::ostringstream os;
        os << head.str() << "tau,estimate,ci_halfwidth\n";
        for (size_t tau = 0; tau < rep.ccdf.size(); ++tau)
            os << tau << "," << fmt(rep.ccdf[tau].first) << ","
               << fmt(rep.ccdf[tau].second) << "\n";
        os << "# success=" << rep.n_success << " detected_fail=" << rep.n_detected_fail
           << " undetected_fail=" << rep.n_undetected_fail
           << " mean_queue=" << fmt(rep.mean_queue)
           << " effective_service_rate=" << fmt(rep.effective_service_rate) << "\n";
        write_text(path, os.str());
    } else {
        json j;
        j["seed"] = *sim.seed;
        j["slots"] = rep.slots;
        j["warmup"] = rep.warmup;
        j["mode"] = label;
        j["mean_queue"] = rep.mean_queue;
        j["success"] = rep.n_success;
        j["detected_fail"] = rep.n_detected_fail;
        j["undetected_fail"] = rep.n_undetected_fail;
        j["effective_service_rate"] = rep.effective_service_rate;
        json rows = json::array();
        for (size_t tau = 0; tau < rep.ccdf.size(); ++tau)
            rows.push_back({{"tau", tau},
                            {"estimate", rep.ccdf[tau].first},
                            {"ci_halfwidth", rep.ccdf[tau].second}});
        j["ccdf"] = rows;
        write_text(path, j.dump(2) + "\n");
    }
    const int tau_show = opts.tau >= 0 ? opts.tau : s.tau.value_or(5);
    std::cout << "ccdf(" << tau_show << ") = " << fmt(rep.ccdf_at(tau_show)) << " +- "
              << fmt(rep.ci_at(tau_show)) << " (95% CI), wrote " << path << "\n";
    return 0;
}

int cmd_presets(const std::string& name, const std::string& out) {
    if (name.empty()) {
        for (const std::string& p : preset_names()) std::cout << p << "\n";
        return 0;
    }
    const Scenario s = preset_scenario(name);
    const std::string text = scenario_to_text(s);
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"queueing behavior and code-parameter selection for coded "
                 "transmissions over BSC / Gilbert-Elliott channels"};
    app.require_subcommand(1);

    CommonOpts opts;
    bool levels = false;
    uint64_t seed_flag = 0;
    bool reproducible = false;
    std::string undetected_flag;
    int constant_length_flag = 0;
    std::string preset_name;
    std::string preset_out;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", opts.scenario_path, "scenario file path");
        cmd->add_option("--preset", opts.preset, "built-in scenario name");
        cmd->add_option("--out", opts.out, "output file path");
        cmd->add_option("--format", opts.format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--tau", opts.tau, "queue-length threshold override");
        cmd->add_flag("--force-unstable", opts.force_unstable,
                      "solve unstable chains anyway (tagged non-normalizable)");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "evaluate a single (N, K, nu) point");
    add_common(analyze);
    analyze->add_flag("--levels", levels, "print per-level stationary masses");

    CLI::App* sweep = app.add_subcommand("sweep", "two-stage (N, K, nu) selection");
    add_common(sweep);

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo queue simulation");
    add_common(simulate);
    CLI::Option* seed_opt = simulate->add_option("--seed", seed_flag, "RNG seed");
    simulate->add_flag("--reproducible", reproducible, "require an explicit seed");
    simulate->add_option("--undetected", undetected_flag,
                         "genie|crc-late override");
    simulate->add_option("--constant-length", constant_length_flag,
                         "constant packet length in bits (overrides scenario)");

    CLI::App* presets = app.add_subcommand("presets", "list or export built-in scenarios");
    presets->add_option("--name", preset_name, "preset to export");
    presets->add_option("--out", preset_out, "where to write the scenario file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(opts, levels);
        if (sweep->parsed()) return cmd_sweep(opts);
        if (simulate->parsed())
            return cmd_simulate(opts, seed_flag, seed_opt->count() > 0, reproducible,
                                undetected_flag, constant_length_flag);
        if (presets->parsed()) return cmd_presets(preset_name, preset_out);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const PrecisionError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
