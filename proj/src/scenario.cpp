#include "codedq/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace codedq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

using Section = std::map<std::string, std::string>;

struct RawScenario {
    std::map<std::string, Section> sections;
    std::string name;
};

RawScenario read_sections(std::istream& in, const std::string& name) {
    static const std::set<std::string> kKnownSections = {"channel", "traffic", "code",
                                                         "constraints", "sim"};
    RawScenario raw;
    raw.name = name;
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(name + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (!kKnownSections.count(current))
                throw ConfigError(name + ": unknown section [" + current + "]");
            raw.sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || current.empty())
            throw ConfigError(name + ":" + std::to_string(lineno) +
                              ": expected 'key = value' inside a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!raw.sections[current].emplace(key, value).second)
            throw ConfigError(name + ": duplicate key '" + key + "' in [" + current + "]");
    }
    return raw;
}

class SectionReader {
  public:
    SectionReader(const RawScenario& raw, const std::string& section)
        : name_(raw.name), section_(section) {
        const auto it = raw.sections.find(section);
        if (it != raw.sections.end()) data_ = &it->second;
    }

    bool present() const { return data_ != nullptr; }
    bool has(const std::string& key) const { return data_ && data_->count(key); }

    std::string require(const std::string& key) {
        if (!has(key))
            throw ConfigError(name_ + ": missing required key '" + key + "' in [" +
                              section_ + "]");
        return get(key);
    }

    std::string get(const std::string& key) {
        seen_.insert(key);
        return data_->at(key);
    }

    double require_double(const std::string& key) { return to_double(key, require(key)); }
    double get_double(const std::string& key, double fallback) {
        return has(key) ? to_double(key, get(key)) : fallback;
    }
    long long require_int(const std::string& key) { return to_int(key, require(key)); }
    long long get_int(const std::string& key, long long fallback) {
        return has(key) ? to_int(key, get(key)) : fallback;
    }

    std::vector<int> require_int_list(const std::string& key) {
        std::istringstream ss(require(key));
        std::vector<int> out;
        long long v = 0;
        while (ss >> v) out.push_back(static_cast<int>(v));
        if (out.empty() || !ss.eof())
            throw ConfigError(name_ + ": key '" + key + "' must be a list of integers");
        return out;
    }

    void finish() const {
        if (!data_) return;
        for (const auto& [key, value] : *data_) {
            if (!seen_.count(key))
                throw ConfigError(name_ + ": unknown key '" + key + "' in [" + section_ +
                                  "]");
        }
    }

  private:
    double to_double(const std::string& key, const std::string& v) {
        try {
            size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(name_ + ": key '" + key + "' is not a number: '" + v + "'");
        }
    }
    long long to_int(const std::string& key, const std::string& v) {
        try {
            size_t pos = 0;
            const long long x = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(name_ + ": key '" + key + "' is not an integer: '" + v +
                              "'");
        }
    }

    std::string name_;
    std::string section_;
    const Section* data_ = nullptr;
    std::set<std::string> seen_;
};

ChannelModel parse_channel(SectionReader& r) {
    const std::string kind = r.require("kind");
    if (kind == "bsc") return ChannelModel::bsc(r.require_double("p"));
    if (kind == "gilbert_elliott")
        return ChannelModel::gilbert_elliott(
            r.require_double("alpha"), r.require_double("beta"),
            r.require_double("eps_good"), r.require_double("eps_bad"));
    if (kind == "fading")
        return ChannelModel::from_fading(r.require_double("doppler_symbol_product"),
                                         r.require_double("snr_threshold_db"),
                                         r.require_double("mean_snr_db"));
    throw ConfigError("channel kind must be bsc, gilbert_elliott or fading");
}

Scheme parse_scheme(const std::string& s) {
    if (s == "bch") return Scheme::Bch;
    if (s == "random_ml") return Scheme::RandomMl;
    if (s == "random_md") return Scheme::RandomMd;
    throw ConfigError("scheme must be bch, random_ml or random_md");
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Bch: return "bch";
        case Scheme::RandomMl: return "random_ml";
        case Scheme::RandomMd: return "random_md";
    }
    return "?";
}

} // namespace

Scenario parse_scenario(std::istream& in, const std::string& name) {
    const RawScenario raw = read_sections(in, name);
    Scenario s;
    s.name = name;

    SectionReader ch(raw, "channel");
    if (!ch.present()) throw ConfigError(name + ": missing [channel] section");
    s.channel = parse_channel(ch);
    ch.finish();

    SectionReader tr(raw, "traffic");
    if (!tr.present()) throw ConfigError(name + ": missing [traffic] section");
    const bool human = tr.has("packets_per_second") || tr.has("bit_rate_kbps");
    if (human) {
        if (tr.has("lambda_per_use"))
            throw ConfigError(name + ": give either human-unit rates or lambda_per_use, "
                                     "not both");
        s.packets_per_second = tr.require_double("packets_per_second");
        const double kbps = tr.require_double("bit_rate_kbps");
        s.bit_rate_bps = kbps * 1000.0;
        s.traffic.lambda = s.packets_per_second / s.bit_rate_bps;
    } else {
        s.traffic.lambda = tr.require_double("lambda_per_use");
    }
    if (tr.has("mean_packet_bits")) {
        if (tr.has("rho"))
            throw ConfigError(name + ": give either mean_packet_bits or rho, not both");
        s.traffic.rho = 1.0 / tr.require_double("mean_packet_bits");
    } else {
        s.traffic.rho = tr.require_double("rho");
    }
    if (!(s.traffic.lambda > 0.0))
        throw ConfigError(name + ": arrival rate must be positive");
    s.traffic.header_bits = static_cast<int>(tr.require_int("header_bits"));
    if (tr.has("mmpp_rate1_packets_per_second") || tr.has("mmpp_rate1_per_use")) {
        MmppSpec mm;
        if (tr.has("mmpp_rate1_per_use")) {
            mm.lambda1 = tr.require_double("mmpp_rate1_per_use");
            mm.lambda2 = tr.require_double("mmpp_rate2_per_use");
        } else {
            if (!human)
                throw ConfigError(name + ": MMPP rates in packets/s require bit_rate_kbps");
            mm.lambda1 = tr.require_double("mmpp_rate1_packets_per_second") / s.bit_rate_bps;
            mm.lambda2 = tr.require_double("mmpp_rate2_packets_per_second") / s.bit_rate_bps;
        }
        const double p12 = tr.require_double("mmpp_switch_12");
        const double p21 = tr.require_double("mmpp_switch_21");
        mm.modulator = {{{1.0 - p12, p12}, {p21, 1.0 - p21}}};
        s.traffic.mmpp = mm;
    }
    s.traffic.validate();
    tr.finish();

    SectionReader co(raw, "code");
    if (!co.present()) throw ConfigError(name + ": missing [code] section");
    s.scheme = parse_scheme(co.require("scheme"));
    if (co.has("n")) s.n = static_cast<int>(co.get_int("n", 0));
    if (co.has("k")) s.k = static_cast<int>(co.get_int("k", 0));
    if (co.has("nu")) {
        const std::string v = co.get("nu");
        if (v != "auto") s.nu = static_cast<int>(std::stoll(v));
    }
    if (co.has("n_grid")) s.n_grid = co.require_int_list("n_grid");
    if (co.has("k_grid")) {
        const std::string v = co.get("k_grid");
        std::istringstream ss(v);
        std::string head;
        ss >> head;
        if (head == "auto") {
            s.k_grid = Scenario::KGrid::Auto;
        } else if (head == "rate") {
            s.k_grid = Scenario::KGrid::RateRange;
            if (!(ss >> s.k_rate_lo >> s.k_rate_hi) || s.k_rate_lo <= 0.0 ||
                s.k_rate_hi >= 1.0 || s.k_rate_lo > s.k_rate_hi)
                throw ConfigError(name + ": k_grid rate form is 'rate <lo> <hi>' with "
                                         "0 < lo <= hi < 1");
        } else {
            s.k_grid = Scenario::KGrid::Explicit;
            std::istringstream all(v);
            long long k = 0;
            while (all >> k) s.k_list.push_back(static_cast<int>(k));
            if (s.k_list.empty() || !all.eof())
                throw ConfigError(name + ": k_grid must be 'auto', 'rate lo hi' or a "
                                         "list of integers");
        }
    }
    co.finish();

    SectionReader cons(raw, "constraints");
    if (cons.present()) {
        if (cons.has("ue_threshold")) s.ue_threshold = cons.get_double("ue_threshold", 0);
        if (cons.has("tau")) s.tau = static_cast<int>(cons.get_int("tau", 0));
        cons.finish();
    }

    SectionReader sim(raw, "sim");
    if (sim.present()) {
        SimSection ss;
        ss.slots = static_cast<uint64_t>(sim.require_int("slots"));
        ss.warmup = static_cast<uint64_t>(sim.get_int("warmup", 0));
        if (sim.has("seed")) ss.seed = static_cast<uint64_t>(sim.get_int("seed", 0));
        const std::string mode = sim.require("packet_length");
        if (mode == "geometric") {
            ss.length_mode = PacketLengthMode::Geometric;
        } else if (mode == "constant") {
            ss.length_mode = PacketLengthMode::Constant;
            ss.constant_length_bits =
                static_cast<int>(sim.require_int("constant_length_bits"));
        } else {
            throw ConfigError(name + ": packet_length must be geometric or constant");
        }
        const std::string und = sim.require("undetected");
        if (und == "genie") ss.undetected = UndetectedMode::Genie;
        else if (und == "crc_late") ss.undetected = UndetectedMode::CrcLate;
        else throw ConfigError(name + ": undetected must be genie or crc_late");
        sim.finish();
        s.sim = ss;
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::string stem = path;
    const auto slash = stem.find_last_of("/\\");
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    const auto dot = stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    return parse_scenario(in, stem);
}

SweepSpec Scenario::to_sweep_spec() const {
    SweepSpec spec;
    spec.channel = channel;
    spec.traffic = traffic;
    spec.scheme = scheme;
    spec.candidate_n = n_grid;
    if (spec.candidate_n.empty() && n) spec.candidate_n = {*n};
    if (spec.candidate_n.empty())
        throw ConfigError(name + ": sweep requires n_grid or n in [code]");
    if (!ue_threshold)
        throw ConfigError(name + ": sweep requires ue_threshold in [constraints]");
    spec.ue_threshold = *ue_threshold;
    if (!tau) throw ConfigError(name + ": sweep requires tau in [constraints]");
    spec.tau = *tau;
    for (int nn : spec.candidate_n) {
        switch (k_grid) {
            case KGrid::Auto:
                if (scheme != Scheme::Bch)
                    throw ConfigError(name +
                                      ": k_grid = auto is only defined for BCH codes");
                break; // filled from the embedded table by the sweep
            case KGrid::RateRange: {
                std::vector<int> ks;
                const int lo = static_cast<int>(std::ceil(k_rate_lo * nn));
                const int hi = static_cast<int>(std::floor(k_rate_hi * nn));
                for (int kk = std::max(1, lo); kk <= std::min(nn - 1, hi); ++kk)
                    ks.push_back(kk);
                spec.candidate_k[nn] = ks;
                break;
            }
            case KGrid::Explicit: spec.candidate_k[nn] = k_list; break;
        }
    }
    return spec;
}

CodeSpec Scenario::code_point(int nu_resolved) const {
    if (!n || !k)
        throw ConfigError(name + ": this command needs a single (n, k) point in [code]");
    switch (scheme) {
        case Scheme::Bch: return CodeSpec::bch(*n, *k, nu_resolved);
        case Scheme::RandomMl: return CodeSpec::random_ml(*n, *k, nu_resolved);
        case Scheme::RandomMd: return CodeSpec::random_md(*n, *k, nu_resolved);
    }
    throw ConfigError("unknown scheme");
}

std::string scenario_to_text(const Scenario& s) {
    std::ostringstream os;
    os.precision(17);
    os << "# scenario: " << s.name << "\n\n[channel]\n";
    if (s.channel.kind == ChannelKind::Bsc) {
        os << "kind = bsc\np = " << s.channel.p << "\n";
    } else {
        os << "kind = gilbert_elliott\n"
           << "alpha = " << s.channel.alpha << "\nbeta = " << s.channel.beta
           << "\neps_good = " << s.channel.eps_g << "\neps_bad = " << s.channel.eps_b
           << "\n";
    }
    os << "\n[traffic]\n";
    if (s.bit_rate_bps > 0.0) {
        os << "packets_per_second = " << s.packets_per_second
           << "\nbit_rate_kbps = " << s.bit_rate_bps / 1000.0 << "\n";
    } else {
        os << "lambda_per_use = " << s.traffic.lambda << "\n";
    }
    os << "mean_packet_bits = " << 1.0 / s.traffic.rho << "\n";
    os << "header_bits = " << s.traffic.header_bits << "\n";
    if (s.traffic.mmpp) {
        os << "mmpp_rate1_per_use = " << s.traffic.mmpp->lambda1 << "\n"
           << "mmpp_rate2_per_use = " << s.traffic.mmpp->lambda2 << "\n"
           << "mmpp_switch_12 = " << s.traffic.mmpp->modulator[0][1] << "\n"
           << "mmpp_switch_21 = " << s.traffic.mmpp->modulator[1][0] << "\n";
    }
    os << "\n[code]\nscheme = " << scheme_name(s.scheme) << "\n";
    if (s.n) os << "n = " << *s.n << "\n";
    if (s.k) os << "k = " << *s.k << "\n";
    os << "nu = " << (s.nu ? std::to_string(*s.nu) : std::string("auto")) << "\n";
    if (!s.n_grid.empty()) {
        os << "n_grid =";
        for (int v : s.n_grid) os << " " << v;
        os << "\n";
    }
    switch (s.k_grid) {
        case Scenario::KGrid::Auto: os << "k_grid = auto\n"; break;
        case Scenario::KGrid::RateRange:
            os << "k_grid = rate " << s.k_rate_lo << " " << s.k_rate_hi << "\n";
            break;
        case Scenario::KGrid::Explicit:
            os << "k_grid =";
            for (int v : s.k_list) os << " " << v;
            os << "\n";
            break;
    }
    if (s.ue_threshold || s.tau) {
        os << "\n[constraints]\n";
        if (s.ue_threshold) os << "ue_threshold = " << *s.ue_threshold << "\n";
        if (s.tau) os << "tau = " << *s.tau << "\n";
    }
    if (s.sim) {
        os << "\n[sim]\nslots = " << s.sim->slots << "\nwarmup = " << s.sim->warmup
           << "\n";
        if (s.sim->seed) os << "seed = " << *s.sim->seed << "\n";
        if (s.sim->length_mode == PacketLengthMode::Constant) {
            os << "packet_length = constant\nconstant_length_bits = "
               << s.sim->constant_length_bits << "\n";
        } else {
            os << "packet_length = geometric\n";
        }
        os << "undetected = "
           << (s.sim->undetected == UndetectedMode::Genie ? "genie" : "crc_late")
           << "\n";
    }
    return os.str();
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"voip-bsc", "voip-gec"};
    return names;
}

namespace {

// VoIP over an EVDO uplink: 460 kb/s shared by 16 users gives each
// 28.75 kb/s; the EVRC vocoder emits one packet per 20 ms (50 packets/s)
// with a ROHC-compressed mean size of 88.55 bits, and 2 header bits are
// charged to every segment.
void set_voip_traffic(Scenario& s) {
    s.packets_per_second = 50.0;
    s.bit_rate_bps = 28750.0;
    s.traffic.lambda = s.packets_per_second / s.bit_rate_bps;
    s.traffic.rho = 1.0 / 88.55;
    s.traffic.header_bits = 2;
}

SimSection default_sim() {
    SimSection sim;
    sim.slots = 10000000;
    sim.warmup = 10000;
    sim.seed = 1;
    sim.length_mode = PacketLengthMode::Geometric;
    sim.undetected = UndetectedMode::Genie;
    return sim;
}

} // namespace

Scenario preset_scenario(const std::string& name) {
    Scenario s;
    s.name = name;
    if (name == "voip-bsc") {
        s.channel = ChannelModel::bsc(0.1);
        set_voip_traffic(s);
        s.scheme = Scheme::RandomMl;
        s.n = 150;
        s.k = 51;
        for (int n = 50; n <= 300; n += 50) s.n_grid.push_back(n);
        s.k_grid = Scenario::KGrid::RateRange;
        s.k_rate_lo = 0.2;
        s.k_rate_hi = 0.6;
        s.ue_threshold = 5e-5;
        s.tau = 10;
        s.sim = default_sim();
        return s;
    }
    if (name == "voip-gec") {
        // The paper's printed Gilbert-Elliott parameters for this link; see
        // ChannelModel::from_fading for the derivation machinery.
        s.channel = ChannelModel::gilbert_elliott(0.3938, 0.0202, 0.0097, 0.3713);
        set_voip_traffic(s);
        s.scheme = Scheme::Bch;
        s.n = 63;
        s.k = 36;
        s.n_grid = {15, 31, 63, 127};
        s.k_grid = Scenario::KGrid::Auto;
        s.ue_threshold = 1e-5;
        s.tau = 5;
        s.sim = default_sim();
        return s;
    }
    throw ConfigError("unknown preset '" + name + "' (available: voip-bsc, voip-gec)");
}

} // namespace codedq
