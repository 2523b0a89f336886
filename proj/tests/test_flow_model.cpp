#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "rgmkl/flow_model.hpp"

using namespace rgmkl;

namespace {

const Ipv4 A{10, 0, 0, 1};
const Ipv4 B{10, 0, 0, 2};
const Ipv4 C{10, 0, 0, 3};
const Ipv4 V{192, 168, 1, 10};

PacketRecord pkt(double t, Ipv4 s, Ipv4 d, std::uint16_t port) { return {t, s, d, port}; }

}  // namespace

TEST_CASE("partition_windows emits a gap-free grid anchored at zero") {
    SUBCASE("two windows") {
        std::vector<PacketRecord> ps{pkt(0.1, A, B, 1), pkt(0.9, A, B, 1), pkt(1.5, A, B, 1)};
        const auto w = partition_windows(ps, 1.0);
        REQUIRE(w.size() == 2);
        CHECK(w[0].packets.size() == 2);
        CHECK(w[1].packets.size() == 1);
        CHECK(w[1].start == 1.0);
    }
    SUBCASE("leading empty windows") {
        std::vector<PacketRecord> ps{pkt(2.5, A, B, 1)};
        const auto w = partition_windows(ps, 1.0);
        REQUIRE(w.size() == 3);
        CHECK(w[0].packets.empty());
        CHECK(w[1].packets.empty());
        CHECK(w[2].packets.size() == 1);
    }
    SUBCASE("a 116 s trace at 1 s gives 116 windows") {
        std::vector<PacketRecord> ps;
        for (int k = 0; k < 116; ++k) ps.push_back(pkt(k + 0.5, A, B, 80));
        CHECK(partition_windows(ps, 1.0).size() == 116);
        CHECK(partition_windows(std::vector<PacketRecord>{}, 1.0, 116.0).size() == 116);
    }
    SUBCASE("empty input") { CHECK(partition_windows(std::vector<PacketRecord>{}, 1.0).empty()); }
    SUBCASE("unsorted input is sorted and boundaries are half-open") {
        std::vector<PacketRecord> ps{pkt(2.0, A, B, 1), pkt(0.0, A, B, 2), pkt(1.0, A, B, 3), pkt(0.999999, B, A, 4)};
        const auto w = partition_windows(ps, 1.0);
        REQUIRE(w.size() == 3);
        CHECK(w[0].packets.size() == 2);
        CHECK(w[1].packets.front().t == 1.0);
        CHECK(w[2].packets.front().t == 2.0);
        for (const auto& win : w)
            for (const auto& p : win.packets) CHECK((p.t >= win.start && p.t < win.start + win.duration));
    }
    SUBCASE("non-integral window lengths keep every packet inside its window") {
        std::mt19937_64 gen(5);
        std::uniform_real_distribution<double> t(0.0, 50.0);
        std::vector<PacketRecord> ps;
        for (int i = 0; i < 2000; ++i) ps.push_back(pkt(t(gen), A, B, 1));
        ps.push_back(pkt(0.3, A, B, 1));
        ps.push_back(pkt(0.6, A, B, 1));
        const auto w = partition_windows(ps, 0.1);
        std::size_t total = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const auto& win = w[k];
            total += win.packets.size();
            const double end = static_cast<double>(k + 1) * 0.1;  // next grid point, not start + duration
            for (const auto& p : win.packets) CHECK((p.t >= win.start && p.t < end));
            CHECK(std::is_sorted(win.packets.begin(), win.packets.end(),
                                 [](const auto& a, const auto& b) { return a.t < b.t; }));
        }
        CHECK(total == ps.size());
    }
    CHECK_THROWS_AS(partition_windows(std::vector<PacketRecord>{}, 0.0), std::invalid_argument);
}

TEST_CASE("classify_flows on hand-enumerated windows") {
    SUBCASE("request and reply") {
        const auto fc = classify_flows(std::vector<PacketRecord>{pkt(0.1, A, B, 80), pkt(0.2, B, A, 1234)});
        CHECK(fc.if_set == std::set<Ipv4>{A, B});
        CHECK(fc.sh.empty());
        CHECK(fc.dh.empty());
        CHECK(fc.acs.size() == 2);
        CHECK(fc.sdd.empty());
        CHECK(fc.hsd.empty());
    }
    SUBCASE("spoofed sources converging on one victim") {
        const auto fc = classify_flows(
            std::vector<PacketRecord>{pkt(0.1, A, V, 80), pkt(0.2, B, V, 80), pkt(0.3, C, V, 443)});
        CHECK(fc.if_set.empty());
        CHECK(fc.sh.size() == 3);
        REQUIRE(fc.dh.size() == 1);
        CHECK(fc.dh.count(V) == 1);
        REQUIRE(fc.sdd.size() == 1);
        CHECK(fc.sdd.at(V).size() == 3);
        REQUIRE(fc.hsd.size() == 1);
        CHECK(fc.hsd.at(V) == HalfInteractionGroup{3, 2});
    }
    SUBCASE("a source with two destinations leaves ACS") {
        const auto fc = classify_flows(std::vector<PacketRecord>{pkt(0.1, A, B, 80), pkt(0.2, A, C, 80)});
        CHECK(fc.acs.empty());
        CHECK(fc.sd.size() == 2);
    }
    SUBCASE("self traffic is an interaction") {
        const auto fc = classify_flows(std::vector<PacketRecord>{pkt(0.1, A, A, 7)});
        CHECK(fc.if_set == std::set<Ipv4>{A});
        CHECK(fc.sh.empty());
        CHECK(fc.dh.empty());
    }
    SUBCASE("empty window") { CHECK(classify_flows(std::vector<PacketRecord>{}) == FlowClasses{}); }
}

TEST_CASE("classify_flows matches the scan oracle and its invariants hold") {
    std::mt19937_64 gen(20240101);
    for (int trial = 0; trial < 300; ++trial) {
        auto w = oracle::random_window(gen);
        const auto fc = classify_flows(w);
        REQUIRE(fc == oracle::classify(w));

        // Permutation invariance.
        std::shuffle(w.begin(), w.end(), gen);
        CHECK(classify_flows(w) == fc);

        std::set<Ipv4> sources, destinations;
        for (const auto& p : w) {
            sources.insert(p.src);
            destinations.insert(p.dst);
        }
        // Every source is either an interaction address or an SH key, never both.
        for (Ipv4 s : sources) CHECK((fc.if_set.count(s) + fc.sh.count(s)) == 1);
        for (Ipv4 d : destinations) CHECK((fc.if_set.count(d) + fc.dh.count(d)) == 1);
        for (const auto& [d, _] : fc.dh) CHECK(sources.count(d) == 0);

        for (const auto& [key, _] : fc.acs) {
            std::set<Ipv4> dsts;
            for (const auto& [k2, __] : fc.sd)
                if (k2.first == key.first) dsts.insert(k2.second);
            CHECK(dsts.size() == 1);
        }
        for (const auto& [_, list] : fc.sdd) {
            std::set<Ipv4> srcs;
            for (const auto& p : list) srcs.insert(p.src);
            CHECK(srcs.size() >= 2);
        }
        // hn counts distinct SH senders per destination, so the total is
        // bounded by the number of distinct (SH source, destination) pairs.
        std::set<AddressPair> sh_pairs;
        for (const auto& [src, list] : fc.sh)
            for (const auto& p : list) sh_pairs.insert({src, p.dst});
        std::size_t hn_total = 0;
        for (const auto& [_, g] : fc.hsd) {
            CHECK(g.hn >= 1);
            CHECK(g.port_count >= 1);
            hn_total += g.hn;
        }
        CHECK(hn_total <= sh_pairs.size());
    }
}

TEST_CASE("distinct_ports") {
    CHECK(distinct_ports({}) == 0);
    CHECK(distinct_ports({pkt(0, A, B, 80), pkt(0, A, B, 80), pkt(0, A, B, 443)}) == 2);
}
