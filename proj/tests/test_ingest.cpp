#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcap_fixture.hpp"
#include "rgmkl/errors.hpp"
#include "rgmkl/ingest.hpp"
#include "rgmkl/traffic_gen.hpp"

using namespace rgmkl;

namespace {

constexpr std::uint32_t kA = 0x0a000001;  // 10.0.0.1
constexpr std::uint32_t kB = 0x0a000002;  // 10.0.0.2
constexpr std::uint32_t kC = 0xc0a8010a;  // 192.168.1.10

PcapReadResult parse(const fixture::Pcap& p) {
    std::istringstream in(p.str());
    return read_pcap(in);
}

fixture::Pcap mixed_capture(bool big_endian) {
    using namespace fixture;
    Pcap p(big_endian);
    p.record(100, 500000, ethernet(0x0800, ipv4(kA, kB, 17, 53)));
    p.record(100, 0, ethernet(0x0800, ipv4(kB, kC, 6, 443, 6)));  // options: IHL 6
    p.record(101, 250000, vlan(0x0800, ipv4(kC, kA, 17, 8080)));
    p.record(101, 300000, arp());
    p.record(101, 400000, ethernet(0x86dd, Bytes(40, 0)));        // IPv6
    p.record(101, 500000, ethernet(0x0800, ipv4(kA, kB, 1, 0)));  // ICMP
    p.record(101, 600000, ethernet(0x0800, ipv4(kA, kB, 17, 53, 5, 0x0010)));  // later fragment
    p.record(101, 700000, ethernet(0x0800, Bytes{0x45, 0x00}));                 // truncated IP header
    return p;
}

}  // namespace

TEST_CASE("canonical CSV") {
    SUBCASE("single row") {
        std::istringstream in("t,src,dst,port\n0.100,10.0.0.1,10.0.0.2,80\n");
        const auto r = read_csv(in);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0] == PacketRecord{0.1, Ipv4{10, 0, 0, 1}, Ipv4{10, 0, 0, 2}, 80});
        CHECK(r.errors.empty());
    }
    SUBCASE("header only") {
        std::istringstream in("t,src,dst,port\n");
        CHECK(read_csv(in).packets.empty());
    }
    SUBCASE("missing header") {
        std::istringstream in("0.1,10.0.0.1,10.0.0.2,80\n");
        CHECK_THROWS_AS(read_csv(in), DataError);
    }
    SUBCASE("rows sorted stably by time") {
        std::istringstream in("t,src,dst,port\n2,1.1.1.1,2.2.2.2,1\n1,1.1.1.1,2.2.2.2,2\n1,1.1.1.1,2.2.2.2,3\n");
        const auto r = read_csv(in);
        REQUIRE(r.packets.size() == 3);
        CHECK(r.packets[0].port == 2);
        CHECK(r.packets[1].port == 3);
        CHECK(r.packets[2].port == 1);
    }
    SUBCASE("malformed rows are reported with line numbers, and too many fail the file") {
        std::ostringstream ok;
        ok << "t,src,dst,port\n";
        for (int i = 0; i < 199; ++i) ok << i << ".5,10.0.0.1,10.0.0.2,80\n";
        ok << "1.0,10.0.0.256,10.0.0.2,80\n";
        std::istringstream in(ok.str());
        const auto r = read_csv(in);
        CHECK(r.packets.size() == 199);
        REQUIRE(r.errors.size() == 1);
        CHECK(r.errors[0].line == 201);

        for (const char* bad : {"x,10.0.0.1,10.0.0.2,80", "1,10.0.0.1,10.0.0.2,70000", "1,10.0.0.1,10.0.0.2",
                                "-1,10.0.0.1,10.0.0.2,80", "1,10.0.0,10.0.0.2,80"}) {
            std::istringstream one(std::string("t,src,dst,port\n") + bad + "\n");
            CHECK_THROWS_AS(read_csv(one), DataError);
        }
    }
    SUBCASE("generated traffic round-trips losslessly") {
        auto spec = ScenarioSpec::preset(ScenarioKind::Intermittent, 3);
        spec.duration = 30.0;
        spec.attack_intervals = {{5.0, 12.0}, {20.0, 25.0}};
        const auto sc = gen_scenario(spec);
        std::stringstream ss;
        write_csv(ss, sc.packets);
        const auto back = read_csv(ss);
        CHECK(back.errors.empty());
        CHECK(back.packets == sc.packets);
    }
}

TEST_CASE("pcap fixtures") {
    SUBCASE("one UDP packet") {
        fixture::Pcap p(false);
        p.record(1700000000, 123456, fixture::ethernet(0x0800, fixture::ipv4(kA, kB, 17, 53)));
        const auto r = parse(p);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0] == PacketRecord{0.0, Ipv4{10, 0, 0, 1}, Ipv4{10, 0, 0, 2}, 53});
        CHECK(r.total_records == 1);
        CHECK(r.source.format == TraceFormat::Pcap);
    }
    SUBCASE("ARP only") {
        fixture::Pcap p(false);
        p.record(5, 0, fixture::arp());
        const auto r = parse(p);
        CHECK(r.packets.empty());
        CHECK(r.source.skipped.non_ipv4 == 1);
    }
    SUBCASE("mixed capture in both byte orders") {
        const auto le = parse(mixed_capture(false));
        const auto be = parse(mixed_capture(true));
        CHECK(le.packets == be.packets);
        REQUIRE(le.packets.size() == 3);
        CHECK(le.packets[0] == PacketRecord{0.0, Ipv4{kB}, Ipv4{kC}, 443});
        CHECK(le.packets[1] == PacketRecord{0.5, Ipv4{kA}, Ipv4{kB}, 53});
        CHECK(le.packets[2] == PacketRecord{1.25, Ipv4{kC}, Ipv4{kA}, 8080});
        CHECK(le.source.skipped.non_ipv4 == 2);
        CHECK(le.source.skipped.non_transport == 2);
        CHECK(le.source.skipped.malformed == 1);
        CHECK(le.packets.size() + le.source.skipped.total() == le.total_records);
        CHECK(le.total_records == 8);
    }
    SUBCASE("raw IPv4 link type") {
        fixture::Pcap p(true, 101);
        p.record(0, 10, fixture::ipv4(kA, kC, 6, 22));
        const auto r = parse(p);
        REQUIRE(r.packets.size() == 1);
        CHECK(r.packets[0].port == 22);
    }
    SUBCASE("truncated record stops the read") {
        auto p = mixed_capture(false);
        p.record(102, 0, fixture::ethernet(0x0800, fixture::ipv4(kA, kB, 17, 53)));
        p.bytes.resize(p.bytes.size() - 10);
        const auto r = parse(p);
        CHECK(r.packets.size() == 3);
        CHECK(r.source.skipped.malformed == 2);
        CHECK(r.packets.size() + r.source.skipped.total() == r.total_records);
    }
    SUBCASE("unsupported containers") {
        CHECK_THROWS_AS(parse(fixture::Pcap(false, 1, 0xa1b23c4d)), DataError);
        CHECK_THROWS_AS(parse(fixture::Pcap(false, 1, 0x0a0d0d0a)), DataError);
        CHECK_THROWS_AS(parse(fixture::Pcap(false, 1, 0x12345678)), DataError);
        CHECK_THROWS_AS(parse(fixture::Pcap(false, 113)), DataError);
        std::istringstream tiny("abc");
        CHECK_THROWS_AS(read_pcap(tiny), DataError);
    }
}

TEST_CASE("pcap writer and format detection") {
    auto spec = ScenarioSpec::preset(ScenarioKind::Early, 5);
    spec.duration = 10.0;
    spec.attack_intervals = {{0.0, 4.0}};
    const auto sc = gen_scenario(spec);
    std::vector<PacketRecord> rebased = sc.packets;
    for (auto& p : rebased) p.t -= sc.packets.front().t;

    const auto dir = std::filesystem::temp_directory_path() / "rgmkl_ingest_test";
    std::filesystem::create_directories(dir);
    const auto pcap_path = (dir / "trace.pcap").string();
    const auto csv_path = (dir / "trace.csv").string();
    write_pcap(pcap_path, rebased);
    write_csv(csv_path, rebased);
    CHECK(detect_format(pcap_path) == TraceFormat::Pcap);
    CHECK(detect_format(csv_path) == TraceFormat::CanonicalCsv);

    const auto from_pcap = read_trace(pcap_path);
    const auto from_csv = read_trace(csv_path);
    CHECK(from_pcap.packets.size() == rebased.size());
    CHECK(from_csv.packets == rebased);
    for (std::size_t i = 0; i < rebased.size(); ++i) {
        CHECK(from_pcap.packets[i].src == rebased[i].src);
        CHECK(from_pcap.packets[i].port == rebased[i].port);
        CHECK(std::abs(from_pcap.packets[i].t - rebased[i].t) <= 5e-7);
    }
    CHECK_THROWS_AS(read_trace((dir / "missing.csv").string()), DataError);
    std::filesystem::remove_all(dir);
}
