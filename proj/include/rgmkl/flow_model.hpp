#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "rgmkl/packet.hpp"

namespace rgmkl {

/// A half-open slice [start, start + duration) of the packet stream.
struct FlowWindow {
    double start = 0.0;
    double duration = 1.0;
    std::vector<PacketRecord> packets;
};

using PacketList = std::vector<PacketRecord>;
using AddressPair = std::pair<Ipv4, Ipv4>;

/// Destination-grouped half-interaction flows.
struct HalfInteractionGroup {
    std::size_t hn = 0;          // distinct SH sources sending to this destination
    std::size_t port_count = 0;  // distinct destination ports among those packets

    friend bool operator==(const HalfInteractionGroup&, const HalfInteractionGroup&) = default;
};

/// Partition of one window into the flow-class families used by the feature
/// extractors. All maps are ordered so that the contents do not depend on
/// packet insertion order.
struct FlowClasses {
    std::map<AddressPair, PacketList> sd;       // (src, dst) classes
    std::set<Ipv4> if_set;                      // addresses seen as source and destination
    std::map<Ipv4, PacketList> sh;              // sources never seen as destination
    std::map<Ipv4, PacketList> dh;              // destinations never seen as source
    std::map<AddressPair, PacketList> acs;      // sd classes whose source has one destination
    std::map<Ipv4, PacketList> sdd;             // per-destination union over >= 2 sources
    std::map<Ipv4, HalfInteractionGroup> hsd;   // sh flows grouped by destination

    friend bool operator==(const FlowClasses&, const FlowClasses&) = default;
};

/// Cuts the stream into contiguous windows [k*dt, (k+1)*dt) starting at 0.
/// Empty windows are emitted. When `span` is given the grid covers at least
/// [0, span) even if the trace ends earlier. Unsorted input is sorted (stable).
std::vector<FlowWindow> partition_windows(std::span<const PacketRecord> packets, double dt,
                                          std::optional<double> span = std::nullopt);

FlowClasses classify_flows(const FlowWindow& window);
FlowClasses classify_flows(std::span<const PacketRecord> packets);

/// Number of distinct destination ports in a packet list.
std::size_t distinct_ports(const PacketList& packets);

}  // namespace rgmkl
