#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rgmkl/packet.hpp"

namespace rgmkl {

enum class ScenarioKind { Early, Impulse, Intermittent };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

struct AttackInterval {
    double start = 0.0;
    double end = 0.0;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Early;
    double duration = 491.0;         // seconds
    double window = 1.0;             // labelling grid, seconds
    double normal_rate = 300.0;      // packets per second, requests plus replies
    double attack_rate = 300.0;      // packets per second at full intensity
    std::size_t normal_host_count = 400;
    std::size_t spoof_pool_size = 20000;
    std::size_t victim_count = 2;
    std::vector<AttackInterval> attack_intervals;
    std::uint64_t seed = 1;

    // Attack intensity ramps linearly from ramp_floor * attack_rate to the
    // full rate over the first ramp_seconds of every interval.
    double ramp_seconds = 20.0;
    double ramp_floor = 0.005;
    // Each attack window independently drops to low_phase_intensity of the
    // current rate with this probability (pulsing, low-rate phases).
    double low_phase_probability = 0.10;
    double low_phase_intensity = 0.02;
    // Fraction of normal requests that never get a reply.
    double reply_loss = 0.01;
    // Unanswered packets per second from random outside hosts (198.18.0.0/15)
    // to normal servers, present for the whole trace.
    double background_rate = 2.0;

    void validate() const;

    /// Calibrated 491-window presets: 211/280, 384/107 and 80/411 normal/attack windows.
    static ScenarioSpec preset(ScenarioKind kind, std::uint64_t seed);
};

struct NormalTrafficOptions {
    double reply_loss = 0.0;
    double mean_reply_delay = 0.02;  // seconds
    double window = 1.0;             // replies never cross a window boundary
};

/// Client/server request-reply traffic from 10.0.0.0/16. `rate` counts both
/// directions. Deterministic per seed.
std::vector<PacketRecord> gen_normal(double duration, double rate, std::size_t hosts, std::uint64_t seed,
                                     const NormalTrafficOptions& options = {});

/// Unanswered packets from spoofed 172.16.0.0/12 sources to victims in
/// 192.168.1.0/24 over random destination ports. Requires spoof_pool >= 10 * victims.
std::vector<PacketRecord> gen_attack(double duration, double rate, std::size_t spoof_pool, std::size_t victims,
                                     std::uint64_t seed);

struct Scenario {
    std::vector<PacketRecord> packets;  // time-sorted
    std::vector<int> window_labels;     // +1 normal, -1 attack; ceil(duration / window) entries
};

Scenario gen_scenario(const ScenarioSpec& spec);

/// -1 for every window overlapping an attack interval, +1 otherwise.
std::vector<int> window_labels(const ScenarioSpec& spec);

/// Key-value scenario description (`key = value`, `#` comments). Keys mirror
/// ScenarioSpec fields; `preset` selects a base preset, `attack_intervals` is
/// a comma-separated list of `start-end` ranges.
ScenarioSpec parse_scenario_spec(std::string_view text);

}  // namespace rgmkl
