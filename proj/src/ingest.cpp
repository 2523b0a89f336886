#include "rgmkl/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "rgmkl/text.hpp"

namespace rgmkl {

namespace {

constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4;
constexpr std::uint32_t kPcapMagicSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kPcapNanoMagic = 0xa1b23c4d;
constexpr std::uint32_t kPcapNanoMagicSwapped = 0x4d3cb2a1;
constexpr std::uint32_t kPcapngMagic = 0x0a0d0d0a;

constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::uint32_t kLinkRaw = 101;
constexpr std::uint32_t kLinkIpv4 = 228;

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherVlan = 0x8100;

constexpr std::uint32_t kMaxRecordLength = 1u << 20;

std::uint32_t read_u32(const unsigned char* p, bool big_endian) {
    if (big_endian)
        return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
    return (std::uint32_t{p[3]} << 24) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[1]} << 8) | p[0];
}

std::uint16_t be16(const unsigned char* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }
std::uint32_t be32(const unsigned char* p) { return read_u32(p, true); }

bool read_exact(std::istream& in, unsigned char* dst, std::size_t n, std::size_t& got) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    got = static_cast<std::size_t>(in.gcount());
    return got == n;
}

enum class Verdict { Ok, NonIpv4, NonTransport, Malformed };

Verdict parse_ipv4(std::span<const unsigned char> ip, PacketRecord& out) {
    if (ip.size() < 20) return Verdict::Malformed;
    if ((ip[0] >> 4) != 4) return Verdict::Malformed;
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    if (ihl < 20 || ihl > ip.size()) return Verdict::Malformed;

    out.src = Ipv4{be32(&ip[12])};
    out.dst = Ipv4{be32(&ip[16])};
    const std::uint16_t fragment_offset = be16(&ip[6]) & 0x1fff;
    const std::uint8_t protocol = ip[9];
    if (protocol != 6 && protocol != 17) return Verdict::NonTransport;
    if (fragment_offset != 0) return Verdict::NonTransport;
    if (ip.size() < ihl + 4) return Verdict::Malformed;
    out.port = be16(&ip[ihl + 2]);
    return Verdict::Ok;
}

Verdict parse_ethernet(std::span<const unsigned char> frame, PacketRecord& out) {
    if (frame.size() < 14) return Verdict::Malformed;
    std::uint16_t ethertype = be16(&frame[12]);
    std::size_t offset = 14;
    if (ethertype == kEtherVlan) {
        if (frame.size() < 18) return Verdict::Malformed;
        ethertype = be16(&frame[16]);
        offset = 18;
    }
    if (ethertype != kEtherIpv4) return Verdict::NonIpv4;
    return parse_ipv4(frame.subspan(offset), out);
}

std::uint16_t ip_checksum(const unsigned char* header, std::size_t len) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < len; i += 2) sum += static_cast<std::uint32_t>((header[i] << 8) | header[i + 1]);
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

void put_le32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 24)};
    out.write(b, 4);
}

void put_le16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    out.write(b, 2);
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

CsvReadResult read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "t,src,dst,port")
        throw DataError("packet CSV: missing header 't,src,dst,port'");

    CsvReadResult result;
    std::size_t line_no = 1;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::trim(line);
        if (body.empty()) continue;
        ++rows;
        auto fail = [&](std::string msg) { result.errors.push_back({line_no, std::move(msg)}); };

        const auto fields = text::split(body, ',');
        if (fields.size() != 4) {
            fail("expected 4 fields");
            continue;
        }
        auto t = text::parse_double(fields[0]);
        if (!t || !std::isfinite(*t) || *t < 0.0) {
            fail("timestamp is not a non-negative number");
            continue;
        }
        auto src = Ipv4::parse(text::trim(fields[1]));
        auto dst = Ipv4::parse(text::trim(fields[2]));
        if (!src || !dst) {
            fail("malformed IPv4 address");
            continue;
        }
        auto port = text::parse_int(fields[3]);
        if (!port || *port < 0 || *port > 65535) {
            fail("port out of range");
            continue;
        }
        result.packets.push_back({*t, *src, *dst, static_cast<std::uint16_t>(*port)});
    }

    if (rows > 0 && static_cast<double>(result.errors.size()) > 0.01 * static_cast<double>(rows)) {
        std::string msg = "packet CSV: " + std::to_string(result.errors.size()) + " of " + std::to_string(rows) +
                          " rows malformed";
        for (std::size_t k = 0; k < std::min<std::size_t>(3, result.errors.size()); ++k)
            msg += "; line " + std::to_string(result.errors[k].line) + ": " + result.errors[k].message;
        throw DataError(msg);
    }
    std::stable_sort(result.packets.begin(), result.packets.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    return result;
}

CsvReadResult read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return read_csv(in);
}

void write_csv(std::ostream& out, std::span<const PacketRecord> packets) {
    out << "t,src,dst,port\n";
    for (const auto& p : packets)
        out << text::format_double(p.t) << ',' << p.src.to_string() << ',' << p.dst.to_string() << ',' << p.port << '\n';
}

void write_csv(const std::string& path, std::span<const PacketRecord> packets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    write_csv(out, packets);
}

// ---------------------------------------------------------------------------
// pcap

PcapReadResult read_pcap(std::istream& in) {
    std::array<unsigned char, 24> header{};
    std::size_t got = 0;
    if (!read_exact(in, header.data(), header.size(), got)) throw DataError("pcap: file shorter than global header");

    const std::uint32_t magic = read_u32(header.data(), false);
    bool big_endian = false;
    if (magic == kPcapMagic) big_endian = false;
    else if (magic == kPcapMagicSwapped) big_endian = true;
    else if (magic == kPcapNanoMagic || magic == kPcapNanoMagicSwapped)
        throw DataError("pcap: nanosecond-resolution captures are not supported");
    else if (magic == kPcapngMagic)
        throw DataError("pcap: pcapng files are not supported; convert to classic pcap first");
    else
        throw DataError("pcap: bad magic number");

    const std::uint32_t link = read_u32(&header[20], big_endian);
    if (link != kLinkEthernet && link != kLinkRaw && link != kLinkIpv4)
        throw DataError("pcap: unsupported link type " + std::to_string(link));

    PcapReadResult result;
    result.source.format = TraceFormat::Pcap;
    std::vector<std::int64_t> micros;
    std::vector<unsigned char> buf;
    auto& skipped = result.source.skipped;

    while (true) {
        std::array<unsigned char, 16> rec{};
        if (!read_exact(in, rec.data(), rec.size(), got)) {
            if (got != 0) {
                ++result.total_records;
                ++skipped.malformed;
            }
            break;
        }
        ++result.total_records;
        const std::uint32_t ts_sec = read_u32(&rec[0], big_endian);
        const std::uint32_t ts_usec = read_u32(&rec[4], big_endian);
        const std::uint32_t incl_len = read_u32(&rec[8], big_endian);
        if (incl_len > kMaxRecordLength || ts_usec >= 1000000) {
            ++skipped.malformed;
            break;
        }
        buf.resize(incl_len);
        if (!read_exact(in, buf.data(), incl_len, got)) {
            ++skipped.malformed;
            break;
        }

        PacketRecord p;
        Verdict v = Verdict::Ok;
        if (link == kLinkEthernet) {
            v = parse_ethernet(buf, p);
        } else if (buf.empty() || (buf[0] >> 4) != 4) {
            v = buf.empty() ? Verdict::Malformed : Verdict::NonIpv4;
        } else {
            v = parse_ipv4(buf, p);
        }
        switch (v) {
            case Verdict::Ok:
                micros.push_back(std::int64_t{ts_sec} * 1000000 + ts_usec);
                result.packets.push_back(p);
                break;
            case Verdict::NonIpv4: ++skipped.non_ipv4; break;
            case Verdict::NonTransport: ++skipped.non_transport; break;
            case Verdict::Malformed: ++skipped.malformed; break;
        }
    }

    if (!micros.empty()) {
        const std::int64_t base = *std::min_element(micros.begin(), micros.end());
        for (std::size_t i = 0; i < micros.size(); ++i)
            result.packets[i].t = static_cast<double>(micros[i] - base) / 1e6;
    }
    std::stable_sort(result.packets.begin(), result.packets.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    return result;
}

PcapReadResult read_pcap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    auto result = read_pcap(in);
    result.source.path = path;
    return result;
}

void write_pcap(std::ostream& out, std::span<const PacketRecord> packets) {
    put_le32(out, kPcapMagic);
    put_le16(out, 2);
    put_le16(out, 4);
    put_le32(out, 0);
    put_le32(out, 0);
    put_le32(out, 65535);
    put_le32(out, kLinkEthernet);

    for (const auto& p : packets) {
        std::array<unsigned char, 42> frame{};
        frame[0] = 0x02;   // locally administered destination MAC
        frame[6] = 0x02;   // and source MAC
        frame[11] = 0x01;
        frame[12] = 0x08;  // IPv4
        unsigned char* ip = &frame[14];
        ip[0] = 0x45;
        ip[3] = 28;  // total length
        ip[8] = 64;  // ttl
        ip[9] = 17;  // UDP
        for (int k = 0; k < 4; ++k) {
            ip[12 + k] = static_cast<unsigned char>(p.src.value >> (24 - 8 * k));
            ip[16 + k] = static_cast<unsigned char>(p.dst.value >> (24 - 8 * k));
        }
        const std::uint16_t sum = ip_checksum(ip, 20);
        ip[10] = static_cast<unsigned char>(sum >> 8);
        ip[11] = static_cast<unsigned char>(sum);
        unsigned char* udp = &frame[34];
        udp[0] = 0x9c;  // source port 40000
        udp[1] = 0x40;
        udp[2] = static_cast<unsigned char>(p.port >> 8);
        udp[3] = static_cast<unsigned char>(p.port);
        udp[5] = 8;

        const auto us = static_cast<std::int64_t>(std::llround(p.t * 1e6));
        put_le32(out, static_cast<std::uint32_t>(us / 1000000));
        put_le32(out, static_cast<std::uint32_t>(us % 1000000));
        put_le32(out, static_cast<std::uint32_t>(frame.size()));
        put_le32(out, static_cast<std::uint32_t>(frame.size()));
        out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
    }
}

void write_pcap(const std::string& path, std::span<const PacketRecord> packets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    write_pcap(out, packets);
}

TraceFormat detect_format(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::array<unsigned char, 4> head{};
    std::size_t got = 0;
    if (!read_exact(in, head.data(), head.size(), got)) return TraceFormat::CanonicalCsv;
    const std::uint32_t magic = read_u32(head.data(), false);
    switch (magic) {
        case kPcapMagic:
        case kPcapMagicSwapped:
        case kPcapNanoMagic:
        case kPcapNanoMagicSwapped:
        case kPcapngMagic:
            return TraceFormat::Pcap;
        default:
            return TraceFormat::CanonicalCsv;
    }
}

PcapReadResult read_trace(const std::string& path) {
    if (detect_format(path) == TraceFormat::Pcap) return read_pcap(path);
    auto csv = read_csv(path);
    PcapReadResult result;
    result.source.path = path;
    result.source.format = TraceFormat::CanonicalCsv;
    result.source.skipped.malformed = csv.errors.size();
    result.total_records = csv.packets.size() + csv.errors.size();
    result.packets = std::move(csv.packets);
    return result;
}

}  // namespace rgmkl
