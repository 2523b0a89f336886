#include "rgmkl/flow_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace rgmkl {

namespace {

bool canonical_less(const PacketRecord& a, const PacketRecord& b) {
    return std::tie(a.t, a.src, a.dst, a.port) < std::tie(b.t, b.src, b.dst, b.port);
}

}  // namespace

std::vector<FlowWindow> partition_windows(std::span<const PacketRecord> packets, double dt,
                                          std::optional<double> span) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("window length must be positive");

    std::vector<PacketRecord> sorted(packets.begin(), packets.end());
    if (!std::is_sorted(sorted.begin(), sorted.end(),
                        [](const auto& a, const auto& b) { return a.t < b.t; })) {
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const auto& a, const auto& b) { return a.t < b.t; });
    }

    std::size_t count = 0;
    if (!sorted.empty()) {
        if (sorted.front().t < 0.0) throw std::invalid_argument("negative packet timestamp");
        count = static_cast<std::size_t>(std::floor(sorted.back().t / dt)) + 1;
    }
    if (span && *span > 0.0) count = std::max(count, static_cast<std::size_t>(std::ceil(*span / dt)));

    std::vector<FlowWindow> windows(count);
    for (std::size_t k = 0; k < count; ++k) {
        windows[k].start = static_cast<double>(k) * dt;
        windows[k].duration = dt;
    }
    for (const auto& p : sorted) {
        auto k = static_cast<std::size_t>(std::floor(p.t / dt));
        // t/dt can round up across a boundary; re-check against the grid itself.
        while (k > 0 && p.t < windows[k].start) --k;
        while (k + 1 < count && p.t >= windows[k + 1].start) ++k;
        windows[k].packets.push_back(p);
    }
    return windows;
}

std::size_t distinct_ports(const PacketList& packets) {
    std::vector<std::uint16_t> ports;
    ports.reserve(packets.size());
    for (const auto& p : packets) ports.push_back(p.port);
    std::sort(ports.begin(), ports.end());
    return static_cast<std::size_t>(std::unique(ports.begin(), ports.end()) - ports.begin());
}

FlowClasses classify_flows(const FlowWindow& window) { return classify_flows(window.packets); }

FlowClasses classify_flows(std::span<const PacketRecord> input) {
    std::vector<PacketRecord> packets(input.begin(), input.end());
    std::sort(packets.begin(), packets.end(), canonical_less);

    FlowClasses fc;
    std::unordered_set<Ipv4> sources;
    std::unordered_set<Ipv4> destinations;
    for (const auto& p : packets) {
        fc.sd[{p.src, p.dst}].push_back(p);
        sources.insert(p.src);
        destinations.insert(p.dst);
    }

    for (const auto& p : packets) {
        const bool src_receives = destinations.contains(p.src);
        const bool dst_sends = sources.contains(p.dst);
        if (src_receives) fc.if_set.insert(p.src);
        else fc.sh[p.src].push_back(p);
        if (dst_sends) fc.if_set.insert(p.dst);
        else fc.dh[p.dst].push_back(p);
    }

    // Sources with exactly one destination survive into ACS; destinations
    // reached by at least two sources survive into SDD.
    std::map<Ipv4, std::size_t> fanout;
    std::map<Ipv4, std::size_t> fanin;
    for (const auto& [key, _] : fc.sd) {
        ++fanout[key.first];
        ++fanin[key.second];
    }
    for (const auto& [key, list] : fc.sd) {
        if (fanout[key.first] == 1) fc.acs.emplace(key, list);
        if (fanin[key.second] >= 2) {
            auto& merged = fc.sdd[key.second];
            merged.insert(merged.end(), list.begin(), list.end());
        }
    }
    for (auto& [_, list] : fc.sdd) std::sort(list.begin(), list.end(), canonical_less);

    std::map<Ipv4, std::set<Ipv4>> hsd_sources;
    std::map<Ipv4, std::set<std::uint16_t>> hsd_ports;
    for (const auto& [src, list] : fc.sh) {
        for (const auto& p : list) {
            hsd_sources[p.dst].insert(src);
            hsd_ports[p.dst].insert(p.port);
        }
    }
    for (const auto& [dst, srcs] : hsd_sources) {
        fc.hsd[dst] = HalfInteractionGroup{srcs.size(), hsd_ports[dst].size()};
    }
    return fc;
}

}  // namespace rgmkl
