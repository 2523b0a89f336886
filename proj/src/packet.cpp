#include "rgmkl/packet.hpp"

#include <charconv>

namespace rgmkl {

std::string Ipv4::to_string() const {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((value >> shift) & 0xffu);
        if (shift != 0) out += '.';
    }
    return out;
}

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
    std::uint32_t acc = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        if (octet != 0) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
        if (p == end || *p < '0' || *p > '9') return std::nullopt;
        unsigned v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{} || v > 255 || next - p > 3) return std::nullopt;
        acc = (acc << 8) | v;
        p = next;
    }
    if (p != end) return std::nullopt;
    return Ipv4{acc};
}

}  // namespace rgmkl
