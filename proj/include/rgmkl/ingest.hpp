#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rgmkl/errors.hpp"
#include "rgmkl/packet.hpp"

namespace rgmkl {

enum class TraceFormat { CanonicalCsv, Pcap };

struct SkipCounters {
    std::size_t non_ipv4 = 0;       // ARP, IPv6, deeper VLAN stacks, other link payloads
    std::size_t non_transport = 0;  // not TCP/UDP, or a non-first fragment
    std::size_t malformed = 0;      // truncated or inconsistent headers

    std::size_t total() const { return non_ipv4 + non_transport + malformed; }
};

struct TraceSource {
    std::string path;
    TraceFormat format = TraceFormat::CanonicalCsv;
    SkipCounters skipped;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct CsvReadResult {
    std::vector<PacketRecord> packets;  // stable-sorted by t
    std::vector<RowError> errors;       // malformed rows that were dropped
};

struct PcapReadResult {
    std::vector<PacketRecord> packets;  // sorted, rebased so the earliest is t = 0
    TraceSource source;
    std::size_t total_records = 0;
};

/// Canonical CSV `t,src,dst,port`. Malformed rows are reported with their
/// line numbers; more than 1% malformed rows fails the whole file.
CsvReadResult read_csv(std::istream& in);
CsvReadResult read_csv(const std::string& path);

/// Writes t with microsecond precision.
void write_csv(std::ostream& out, std::span<const PacketRecord> packets);
void write_csv(const std::string& path, std::span<const PacketRecord> packets);

/// Classic libpcap container, microsecond variant, either byte order.
/// Link types: Ethernet (1), raw IPv4 (101, 228).
PcapReadResult read_pcap(std::istream& in);
PcapReadResult read_pcap(const std::string& path);

/// Writes each record as an Ethernet/IPv4/UDP frame (native byte order).
void write_pcap(std::ostream& out, std::span<const PacketRecord> packets);
void write_pcap(const std::string& path, std::span<const PacketRecord> packets);

/// Sniffs the first bytes: pcap magics select Pcap, anything else CanonicalCsv.
TraceFormat detect_format(const std::string& path);

/// Reads either format; skip counters are zero for CSV.
PcapReadResult read_trace(const std::string& path);

}  // namespace rgmkl
