#pragma once

// Byte-level pcap builder for tests. Everything is assembled by hand so the
// reader is checked against the file format, not against our own writer.

#include <cstdint>
#include <string>
#include <vector>

namespace fixture {

using Bytes = std::vector<unsigned char>;

struct Pcap {
    bool big_endian = false;
    std::uint32_t magic = 0xa1b2c3d4;
    std::uint32_t link = 1;
    Bytes bytes;

    void u16(std::uint16_t v) {
        if (big_endian) {
            bytes.push_back(static_cast<unsigned char>(v >> 8));
            bytes.push_back(static_cast<unsigned char>(v));
        } else {
            bytes.push_back(static_cast<unsigned char>(v));
            bytes.push_back(static_cast<unsigned char>(v >> 8));
        }
    }
    void u32(std::uint32_t v) {
        if (big_endian) {
            u16(static_cast<std::uint16_t>(v >> 16));
            u16(static_cast<std::uint16_t>(v));
        } else {
            u16(static_cast<std::uint16_t>(v));
            u16(static_cast<std::uint16_t>(v >> 16));
        }
    }

    Pcap(bool be, std::uint32_t link_type = 1, std::uint32_t magic_value = 0xa1b2c3d4)
        : big_endian(be), magic(magic_value), link(link_type) {
        u32(magic);
        u16(2);
        u16(4);
        u32(0);
        u32(0);
        u32(65535);
        u32(link);
    }

    void record(std::uint32_t sec, std::uint32_t usec, const Bytes& frame) {
        u32(sec);
        u32(usec);
        u32(static_cast<std::uint32_t>(frame.size()));
        u32(static_cast<std::uint32_t>(frame.size()));
        bytes.insert(bytes.end(), frame.begin(), frame.end());
    }

    std::string str() const { return std::string(bytes.begin(), bytes.end()); }
};

/// Network-order IPv4 header (IHL words) followed by a transport stub.
inline Bytes ipv4(std::uint32_t src, std::uint32_t dst, std::uint8_t proto, std::uint16_t dport,
                  std::uint8_t ihl = 5, std::uint16_t frag = 0) {
    Bytes ip(static_cast<std::size_t>(ihl) * 4, 0);
    ip[0] = static_cast<unsigned char>(0x40 | ihl);
    ip[6] = static_cast<unsigned char>(frag >> 8);
    ip[7] = static_cast<unsigned char>(frag);
    ip[8] = 64;
    ip[9] = proto;
    for (int k = 0; k < 4; ++k) {
        ip[12 + k] = static_cast<unsigned char>(src >> (24 - 8 * k));
        ip[16 + k] = static_cast<unsigned char>(dst >> (24 - 8 * k));
    }
    Bytes l4(proto == 6 ? 20 : 8, 0);
    l4[0] = 0x30;  // source port 12345
    l4[1] = 0x39;
    l4[2] = static_cast<unsigned char>(dport >> 8);
    l4[3] = static_cast<unsigned char>(dport);
    if (proto == 6) l4[12] = 0x50;
    ip.insert(ip.end(), l4.begin(), l4.end());
    const auto total = static_cast<std::uint16_t>(ip.size());
    ip[2] = static_cast<unsigned char>(total >> 8);
    ip[3] = static_cast<unsigned char>(total);
    return ip;
}

inline Bytes ethernet(std::uint16_t ethertype, const Bytes& payload) {
    Bytes f(12, 0x02);
    f.push_back(static_cast<unsigned char>(ethertype >> 8));
    f.push_back(static_cast<unsigned char>(ethertype));
    f.insert(f.end(), payload.begin(), payload.end());
    return f;
}

inline Bytes vlan(std::uint16_t inner_type, const Bytes& payload) {
    Bytes tag{0x00, 0x64, static_cast<unsigned char>(inner_type >> 8), static_cast<unsigned char>(inner_type)};
    tag.insert(tag.end(), payload.begin(), payload.end());
    return ethernet(0x8100, tag);
}

inline Bytes arp() { return ethernet(0x0806, Bytes(28, 0)); }

}  // namespace fixture
