#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace rgmkl {

/// IPv4 address in host byte order.
struct Ipv4 {
    std::uint32_t value = 0;

    constexpr Ipv4() = default;
    constexpr explicit Ipv4(std::uint32_t v) : value(v) {}
    constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

    friend constexpr auto operator<=>(Ipv4, Ipv4) = default;

    std::string to_string() const;

    /// Strict dotted-quad parse; no leading '+', no empty octets, each octet 0-255.
    static std::optional<Ipv4> parse(std::string_view text);
};

/// One captured packet: time since trace start, endpoints, destination port.
struct PacketRecord {
    double t = 0.0;
    Ipv4 src;
    Ipv4 dst;
    std::uint16_t port = 0;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

}  // namespace rgmkl

template <>
struct std::hash<rgmkl::Ipv4> {
    std::size_t operator()(rgmkl::Ipv4 a) const noexcept { return std::hash<std::uint32_t>{}(a.value); }
};
