#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "codedq/optimizer.hpp"
#include "codedq/scenario.hpp"
#include "codedq/simulator.hpp"

namespace py = pybind11;
using namespace codedq;

namespace {

py::array_t<double> joint_error_table(const ChannelModel& model, int n) {
    const JointErrorDistribution d = joint_error_distribution(model, n);
    const int s = d.states();
    py::array_t<double> out({s, s, n + 1});
    auto r = out.mutable_unchecked<3>();
    for (int c = 0; c < s; ++c)
        for (int dd = 0; dd < s; ++dd)
            for (int e = 0; e <= n; ++e) r(c, dd, e) = d.prob(c, dd, e);
    return out;
}

py::array_t<double> occupancy_table(const ChannelModel& model, int n) {
    const OccupancyDistribution d = occupancy_distribution(model, n);
    py::array_t<double> out({2, 2, n + 1});
    auto r = out.mutable_unchecked<3>();
    for (int c = 0; c < 2; ++c)
        for (int dd = 0; dd < 2; ++dd)
            for (int ng = 0; ng <= n; ++ng) r(c, dd, ng) = d.prob(c, dd, ng);
    return out;
}

py::dict solve_queue(const ChannelModel& model, const CodeSpec& code,
                     const TrafficModel& traffic, int tau, bool force) {
    const FailureProfile profile = compute_profile(model, code);
    const ServiceMetrics metrics = service_rate(profile, traffic, code);
    py::dict out;
    out["p_f"] = profile.avg_failure;
    out["p_ue"] = profile.avg_undetected;
    out["rho_r"] = metrics.rho_r;
    out["mu_n"] = metrics.mu_n;
    out["lambda_n"] = metrics.lambda_n;
    out["stability_factor"] = metrics.stability_factor;
    if (metrics.stability_factor >= 1.0 && !force) {
        out["tail"] = 1.0;
        out["stable"] = false;
        return out;
    }
    const QueueChain chain = build_chain(model, code, traffic, profile);
    const GMatrix g = solve_g(chain, 1e-12, 100000, force);
    const StationaryDistribution dist = solve_stationary(chain, g);
    out["tail"] = tail_probability(dist, tau);
    out["stable"] = metrics.stability_factor < 1.0;
    std::vector<double> levels;
    for (const auto& lv : dist.levels) levels.push_back(lv.sum());
    out["levels"] = levels;
    out["residual_mass"] = dist.residual_mass;
    return out;
}

py::dict row_to_dict(const SweepRow& row) {
    py::dict r;
    r["n"] = row.n;
    r["k"] = row.k;
    r["nu"] = row.nu;
    r["p_ue"] = row.p_ue;
    r["p_f"] = row.p_f;
    r["mu_n"] = row.mu_n;
    r["stability"] = row.stability;
    r["tail"] = row.tail;
    r["status"] = std::string(to_string(row.status));
    return r;
}

py::dict sim_to_dict(const SimReport& rep) {
    py::dict out;
    std::vector<double> est, ci;
    for (const auto& [e, c] : rep.ccdf) {
        est.push_back(e);
        ci.push_back(c);
    }
    out["ccdf"] = est;
    out["ccdf_ci"] = ci;
    out["mean_queue"] = rep.mean_queue;
    out["success"] = rep.n_success;
    out["detected_fail"] = rep.n_detected_fail;
    out["undetected_fail"] = rep.n_undetected_fail;
    out["effective_service_rate"] = rep.effective_service_rate;
    out["seed"] = rep.seed;
    return out;
}

} // namespace

PYBIND11_MODULE(_codedq, m) {
    m.doc() = "queueing behavior and code-parameter selection for coded "
              "transmissions over BSC / Gilbert-Elliott channels";

    py::enum_<Scheme>(m, "Scheme")
        .value("RANDOM_ML", Scheme::RandomMl)
        .value("RANDOM_MD", Scheme::RandomMd)
        .value("BCH", Scheme::Bch);

    py::class_<ChannelModel>(m, "ChannelModel")
        .def_static("bsc", &ChannelModel::bsc, py::arg("p"))
        .def_static("gilbert_elliott", &ChannelModel::gilbert_elliott, py::arg("alpha"),
                    py::arg("beta"), py::arg("eps_g"), py::arg("eps_b"))
        .def_static("from_fading", &ChannelModel::from_fading,
                    py::arg("doppler_symbol_product"), py::arg("snr_threshold_db"),
                    py::arg("mean_snr_db"))
        .def_readonly("p", &ChannelModel::p)
        .def_readonly("alpha", &ChannelModel::alpha)
        .def_readonly("beta", &ChannelModel::beta)
        .def_readonly("eps_g", &ChannelModel::eps_g)
        .def_readonly("eps_b", &ChannelModel::eps_b)
        .def("stationary", &ChannelModel::stationary);

    py::class_<CodeSpec>(m, "CodeSpec")
        .def_static("random_ml", &CodeSpec::random_ml, py::arg("n"), py::arg("k"),
                    py::arg("nu") = 0)
        .def_static("random_md", &CodeSpec::random_md, py::arg("n"), py::arg("k"),
                    py::arg("nu") = 0)
        .def_static("bch", &CodeSpec::bch, py::arg("n"), py::arg("k"), py::arg("nu") = 0)
        .def_readonly("n", &CodeSpec::n)
        .def_readonly("k", &CodeSpec::k)
        .def_readonly("nu", &CodeSpec::nu)
        .def_readonly("t", &CodeSpec::t)
        .def_readonly("m", &CodeSpec::m)
        .def("rate", &CodeSpec::rate);

    py::class_<MmppSpec>(m, "MmppSpec")
        .def(py::init([](double l1, double l2, double p12, double p21) {
                 MmppSpec mm;
                 mm.lambda1 = l1;
                 mm.lambda2 = l2;
                 mm.modulator = {{{1.0 - p12, p12}, {p21, 1.0 - p21}}};
                 return mm;
             }),
             py::arg("lambda1"), py::arg("lambda2"), py::arg("switch_12"),
             py::arg("switch_21"));

    py::class_<TrafficModel>(m, "TrafficModel")
        .def(py::init([](double lambda, double rho, int header_bits,
                         std::optional<MmppSpec> mmpp) {
                 TrafficModel t;
                 t.lambda = lambda;
                 t.rho = rho;
                 t.header_bits = header_bits;
                 t.mmpp = mmpp;
                 t.validate();
                 return t;
             }),
             py::arg("lambda_per_use"), py::arg("rho"), py::arg("header_bits") = 0,
             py::arg("mmpp") = std::nullopt)
        .def_readonly("lambda_per_use", &TrafficModel::lambda)
        .def_readonly("rho", &TrafficModel::rho)
        .def_readonly("header_bits", &TrafficModel::header_bits)
        .def("mean_rate", &TrafficModel::mean_rate);

    py::class_<FailureProfile>(m, "FailureProfile")
        .def_readonly("avg_failure", &FailureProfile::avg_failure)
        .def_readonly("avg_undetected", &FailureProfile::avg_undetected)
        .def("failure", &FailureProfile::failure)
        .def("undetected", &FailureProfile::undetected);

    m.def("joint_error_table", &joint_error_table, py::arg("model"), py::arg("n"),
          "P(E=e, end state | start state) as an (S, S, N+1) array");
    m.def("occupancy_table", &occupancy_table, py::arg("model"), py::arg("n"),
          "P(N_g=n_g, end state | start state) as a (2, 2, N+1) array");
    m.def("conditional_state_errors", &conditional_state_errors, py::arg("n_g"),
          py::arg("n_b"), py::arg("e_g"), py::arg("e_b"), py::arg("model"));
    m.def("gec_weight_gamma", &gec_weight_gamma, py::arg("model"), py::arg("scheme"));
    m.def("gec_ball_volume_log", &gec_ball_volume_log, py::arg("n_g"), py::arg("n_b"),
          py::arg("d"), py::arg("gamma"), py::arg("open_boundary") = false);
    m.def("bsc_random_failure", &bsc_random_failure, py::arg("code"), py::arg("e"));
    m.def("bsc_random_undetected", &bsc_random_undetected, py::arg("code"), py::arg("e"));
    m.def("bch_failure", &bch_failure, py::arg("code"), py::arg("e"));
    m.def(
        "bch_undetected_weight",
        [](const CodeSpec& code, int e) { return bch_undetected_weight(code, e); },
        py::arg("code"), py::arg("e"));
    m.def("compute_profile", &compute_profile, py::arg("model"), py::arg("code"));
    m.def("segment_completion_prob", &segment_completion_prob, py::arg("traffic"),
          py::arg("code"));
    m.def(
        "find_min_nu",
        [](const ChannelModel& ch, Scheme s, int n, int k, double thr) -> py::object {
            const auto nu = find_min_nu(ch, s, n, k, thr);
            return nu ? py::cast(*nu) : py::none();
        },
        py::arg("channel"), py::arg("scheme"), py::arg("n"), py::arg("k"),
        py::arg("ue_threshold"));
    m.def("solve_queue", &solve_queue, py::arg("model"), py::arg("code"),
          py::arg("traffic"), py::arg("tau"), py::arg("force") = false,
          "profile + matrix-geometric solve; returns metrics, levels and tail");
    m.def(
        "run_sweep",
        [](const ChannelModel& ch, const TrafficModel& tr, Scheme scheme,
           const std::vector<int>& n_grid, const std::map<int, std::vector<int>>& k_grid,
           double ue_threshold, int tau) {
            SweepSpec spec;
            spec.channel = ch;
            spec.traffic = tr;
            spec.scheme = scheme;
            spec.candidate_n = n_grid;
            spec.candidate_k = k_grid;
            spec.ue_threshold = ue_threshold;
            spec.tau = tau;
            const SweepResult res = run_sweep(spec);
            py::list rows;
            for (const SweepRow& row : res.rows) rows.append(row_to_dict(row));
            py::dict out;
            out["rows"] = rows;
            out["best_index"] = res.best_index;
            return out;
        },
        py::arg("channel"), py::arg("traffic"), py::arg("scheme"), py::arg("n_grid"),
        py::arg("k_grid") = std::map<int, std::vector<int>>{}, py::arg("ue_threshold"),
        py::arg("tau"));
    m.def(
        "simulate",
        [](const ChannelModel& model, const CodeSpec& code, const TrafficModel& traffic,
           uint64_t slots, uint64_t warmup, uint64_t seed, const std::string& lengths,
           int constant_length, const std::string& undetected) {
            SimConfig cfg;
            cfg.slots = slots;
            cfg.warmup = warmup;
            cfg.seed = seed;
            cfg.length_mode = lengths == "constant" ? PacketLengthMode::Constant
                                                    : PacketLengthMode::Geometric;
            cfg.constant_length = constant_length;
            cfg.undetected = undetected == "crc_late" ? UndetectedMode::CrcLate
                                                      : UndetectedMode::Genie;
            return sim_to_dict(simulate(model, code, traffic, cfg));
        },
        py::arg("model"), py::arg("code"), py::arg("traffic"), py::arg("slots"),
        py::arg("warmup") = 0, py::arg("seed") = 1, py::arg("lengths") = "geometric",
        py::arg("constant_length") = 0, py::arg("undetected") = "genie");
    m.def("preset_names", [] { return preset_names(); });
    m.def(
        "preset_sweep",
        [](const std::string& name) {
            const Scenario s = preset_scenario(name);
            const SweepResult res = run_sweep(s.to_sweep_spec());
            py::list rows;
            for (const SweepRow& row : res.rows) rows.append(row_to_dict(row));
            py::dict out;
            out["rows"] = rows;
            out["best_index"] = res.best_index;
            return out;
        },
        py::arg("name"), "run the two-stage sweep for a named preset scenario");
}
