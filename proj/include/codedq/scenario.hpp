#pragma once

// Scenario files: a sectioned key-value format describing channel, traffic,
// code selection, constraints and simulation settings. Parsing is strict:
// unknown sections or keys are rejected, and physical parameters have no
// silent defaults. Rates are given in human units (packets/s, kb/s) and
// converted to per-channel-use once, here.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "codedq/optimizer.hpp"
#include "codedq/simulator.hpp"

namespace codedq {

struct SimSection {
    uint64_t slots = 0;
    uint64_t warmup = 0;
    std::optional<uint64_t> seed;
    PacketLengthMode length_mode = PacketLengthMode::Geometric;
    int constant_length_bits = 0;
    UndetectedMode undetected = UndetectedMode::Genie;
};

struct Scenario {
    std::string name;
    ChannelModel channel;
    TrafficModel traffic;
    // unit conversion factors echoed in output headers
    double packets_per_second = 0.0;
    double bit_rate_bps = 0.0;

    Scheme scheme = Scheme::Bch;
    std::optional<int> n; // single evaluation point
    std::optional<int> k;
    std::optional<int> nu; // absent: stage-1 selection against ue_threshold

    std::vector<int> n_grid;
    enum class KGrid { Auto, RateRange, Explicit };
    KGrid k_grid = KGrid::Auto;
    double k_rate_lo = 0.0;
    double k_rate_hi = 0.0;
    std::vector<int> k_list;

    std::optional<double> ue_threshold;
    std::optional<int> tau;
    std::optional<SimSection> sim;

    SweepSpec to_sweep_spec() const;
    /// the single (N, K) point; throws when the scenario has none
    CodeSpec code_point(int nu_resolved) const;
};

Scenario parse_scenario(std::istream& in, const std::string& name);
Scenario load_scenario(const std::string& path);
std::string scenario_to_text(const Scenario& s);

const std::vector<std::string>& preset_names();
/// "voip-bsc": random coding over BSC(0.1); "voip-gec": BCH over the
/// VoIP-derived Gilbert-Elliott channel.
Scenario preset_scenario(const std::string& name);

} // namespace codedq
