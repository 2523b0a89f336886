#include "rgmkl/traffic_gen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "rgmkl/errors.hpp"
#include "rgmkl/rng.hpp"
#include "rgmkl/text.hpp"

namespace rgmkl {

namespace {

constexpr std::uint16_t kServicePorts[] = {80, 443, 53, 22, 25, 8080, 123, 993};

// Timestamps are kept on a microsecond grid so the canonical CSV round-trips.
double to_micros(double t) { return std::floor(t * 1e6) / 1e6; }

Ipv4 normal_host(std::size_t index) {
    // 10.0.0.0/16, skipping .0 in the last octet.
    const auto id = static_cast<std::uint32_t>(index + 1);
    return Ipv4{(10u << 24) | ((id / 255) << 8) | (id % 255 + 1)};
}

Ipv4 victim_host(std::size_t index) { return Ipv4{192, 168, 1, static_cast<std::uint8_t>(10 + index)}; }

std::vector<Ipv4> spoof_pool(std::size_t size, Rng& rng) {
    std::vector<Ipv4> pool(size);
    for (auto& a : pool) a = Ipv4{(172u << 24) | (16u << 16) | static_cast<std::uint32_t>(rng.below(1u << 20))};
    return pool;
}

bool time_less(const PacketRecord& a, const PacketRecord& b) {
    return std::tie(a.t, a.src, a.dst, a.port) < std::tie(b.t, b.src, b.dst, b.port);
}

struct AttackShape {
    double start = 0.0;
    double end = 0.0;
    double rate = 0.0;
    double ramp_seconds = 0.0;
    double ramp_floor = 1.0;
    double low_phase_probability = 0.0;
    double low_phase_intensity = 1.0;
    double window = 1.0;
    bool fill_windows = false;  // guarantee one packet per overlapped window
};

void emit_attack(const AttackShape& shape, const std::vector<Ipv4>& pool, std::size_t victims, Rng& rng,
                 std::vector<PacketRecord>& out) {
    auto packet_at = [&](double t) {
        PacketRecord p;
        p.t = to_micros(t);
        p.src = pool[rng.below(pool.size())];
        p.dst = victim_host(rng.below(victims));
        p.port = static_cast<std::uint16_t>(1 + rng.below(65535));
        return p;
    };
    auto intensity = [&](double t) {
        if (shape.ramp_seconds <= 0.0) return 1.0;
        const double progress = std::min(1.0, (t - shape.start) / shape.ramp_seconds);
        return shape.ramp_floor + (1.0 - shape.ramp_floor) * progress;
    };

    const auto k0 = static_cast<std::size_t>(std::floor(shape.start / shape.window));
    const auto k1 = static_cast<std::size_t>(std::ceil(shape.end / shape.window));
    std::vector<double> phase(k1 - k0, 1.0);
    if (shape.low_phase_probability > 0.0)
        for (auto& p : phase)
            if (rng.uniform() < shape.low_phase_probability) p = shape.low_phase_intensity;

    const std::size_t first = out.size();
    // Thinning of a homogeneous process at the peak rate.
    for (double t = shape.start + rng.exponential(shape.rate); t < shape.end; t += rng.exponential(shape.rate)) {
        const auto k = std::min(static_cast<std::size_t>(std::floor(t / shape.window)), k1 - 1);
        const double keep = intensity(t) * phase[k - k0];
        if (rng.uniform() < keep) out.push_back(packet_at(t));
    }
    if (!shape.fill_windows) return;

    std::vector<bool> seen(k1 - k0, false);
    for (std::size_t i = first; i < out.size(); ++i) {
        const auto k = static_cast<std::size_t>(std::floor(out[i].t / shape.window));
        if (k >= k0 && k < k1) seen[k - k0] = true;
    }
    for (std::size_t k = k0; k < k1; ++k) {
        if (seen[k - k0]) continue;
        const double lo = std::max(shape.start, static_cast<double>(k) * shape.window);
        const double hi = std::min(shape.end, static_cast<double>(k + 1) * shape.window);
        out.push_back(packet_at(lo + rng.uniform() * (hi - lo)));
    }
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Early: return "early";
        case ScenarioKind::Impulse: return "impulse";
        case ScenarioKind::Intermittent: return "intermittent";
    }
    return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
    if (name == "early") return ScenarioKind::Early;
    if (name == "impulse") return ScenarioKind::Impulse;
    if (name == "intermittent") return ScenarioKind::Intermittent;
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "' (expected early, impulse or intermittent)");
}

void ScenarioSpec::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("scenario duration must be positive");
    if (!(window > 0.0)) throw std::invalid_argument("scenario window must be positive");
    if (!(normal_rate > 0.0) || !(attack_rate > 0.0)) throw std::invalid_argument("rates must be positive");
    if (normal_host_count < 2) throw std::invalid_argument("at least two normal hosts are required");
    if (victim_count < 1 || victim_count > 240) throw std::invalid_argument("victim count must be in [1, 240]");
    if (spoof_pool_size < 10 * victim_count) throw std::invalid_argument("spoof pool must be at least 10x the victim count");
    if (!(ramp_seconds >= 0.0) || !(ramp_floor > 0.0 && ramp_floor <= 1.0))
        throw std::invalid_argument("ramp needs seconds >= 0 and floor in (0, 1]");
    if (!(reply_loss >= 0.0 && reply_loss < 1.0)) throw std::invalid_argument("reply loss must lie in [0, 1)");
    if (!(low_phase_probability >= 0.0 && low_phase_probability <= 1.0) ||
        !(low_phase_intensity > 0.0 && low_phase_intensity <= 1.0))
        throw std::invalid_argument("low phase needs probability in [0, 1] and intensity in (0, 1]");
    if (!(background_rate >= 0.0)) throw std::invalid_argument("background rate must be non-negative");
    for (const auto& iv : attack_intervals) {
        if (!(iv.start >= 0.0 && iv.start < iv.end && iv.end <= duration))
            throw std::invalid_argument("attack intervals must lie within [0, duration)");
    }
    auto sorted = attack_intervals;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].start < sorted[i - 1].end) throw std::invalid_argument("attack intervals must be disjoint");
}

ScenarioSpec ScenarioSpec::preset(ScenarioKind kind, std::uint64_t seed) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.seed = seed;
    switch (kind) {
        case ScenarioKind::Early:
            spec.attack_intervals = {{0.0, 280.0}};
            break;
        case ScenarioKind::Impulse:
            spec.attack_intervals = {{200.0, 307.0}};
            break;
        case ScenarioKind::Intermittent:
            spec.attack_intervals = {{0.0, 100.0}, {120.0, 250.0}, {270.0, 400.0}, {420.0, 471.0}};
            break;
    }
    return spec;
}

std::vector<PacketRecord> gen_normal(double duration, double rate, std::size_t hosts, std::uint64_t seed,
                                     const NormalTrafficOptions& options) {
    if (hosts < 2) throw std::invalid_argument("gen_normal needs at least two hosts");
    if (!(rate > 0.0) || !(duration > 0.0)) throw std::invalid_argument("gen_normal needs positive rate and duration");
    if (!(options.window > 0.0)) throw std::invalid_argument("gen_normal needs a positive window");

    Rng rng = Rng::stream(seed, 1);
    const std::size_t servers = std::max<std::size_t>(1, hosts / 20);
    const std::size_t clients = hosts - servers;

    // Each server offers one or two services.
    std::vector<std::vector<std::uint16_t>> services(servers);
    for (auto& s : services) {
        const std::size_t count = 1 + rng.below(2);
        for (std::size_t k = 0; k < count; ++k)
            s.push_back(kServicePorts[rng.below(std::size(kServicePorts))]);
    }

    struct Session {
        std::uint16_t service;
        std::uint16_t ephemeral;
    };
    std::map<std::pair<std::size_t, std::size_t>, Session> sessions;

    // The packet count is Poisson(rate * duration); packets are laid out as
    // request/reply sessions, with an odd packet sent as a retransmission.
    std::size_t packets = 0;
    for (double t = rng.exponential(rate); t < duration; t += rng.exponential(rate)) ++packets;
    std::vector<double> starts(packets / 2);
    for (auto& t : starts) t = rng.uniform() * duration;
    std::sort(starts.begin(), starts.end());

    std::vector<PacketRecord> out;
    out.reserve(packets);
    for (const double t : starts) {
        const std::size_t client = rng.below(clients);
        const std::size_t server = rng.below(servers);
        auto [it, inserted] = sessions.try_emplace({client, server}, Session{});
        if (inserted) {
            const auto& offered = services[server];
            it->second.service = offered[rng.below(offered.size())];
            it->second.ephemeral = static_cast<std::uint16_t>(49152 + rng.below(16384));
        }
        const Ipv4 client_addr = normal_host(servers + client);
        const Ipv4 server_addr = normal_host(server);

        const double request_t = to_micros(t);
        out.push_back({request_t, client_addr, server_addr, it->second.service});

        const double delay = rng.exponential(1.0 / options.mean_reply_delay);
        const bool lost = rng.uniform() < options.reply_loss;
        if (lost) continue;
        const double window_end = (std::floor(request_t / options.window) + 1.0) * options.window;
        const double room = std::min(window_end, duration) - request_t;
        const double reply_t = to_micros(request_t + std::min(delay, 0.5 * room));
        out.push_back({reply_t, server_addr, client_addr, it->second.ephemeral});
    }
    if (packets % 2 == 1 && !out.empty()) out.push_back(out[rng.below(out.size())]);
    std::stable_sort(out.begin(), out.end(), time_less);
    return out;
}

std::vector<PacketRecord> gen_attack(double duration, double rate, std::size_t spoof_pool_size, std::size_t victims,
                                     std::uint64_t seed) {
    if (victims < 1 || victims > 240) throw std::invalid_argument("gen_attack victim count must be in [1, 240]");
    if (spoof_pool_size < 10 * victims) throw std::invalid_argument("spoof pool must be at least 10x the victim count");
    if (!(rate > 0.0) || !(duration > 0.0)) throw std::invalid_argument("gen_attack needs positive rate and duration");

    Rng pool_rng = Rng::stream(seed, 2);
    const auto pool = spoof_pool(spoof_pool_size, pool_rng);
    Rng rng = Rng::stream(seed, 3);
    std::vector<PacketRecord> out;
    AttackShape shape;
    shape.end = duration;
    shape.rate = rate;
    emit_attack(shape, pool, victims, rng, out);
    std::stable_sort(out.begin(), out.end(), time_less);
    return out;
}

std::vector<int> window_labels(const ScenarioSpec& spec) {
    const auto count = static_cast<std::size_t>(std::ceil(spec.duration / spec.window));
    std::vector<int> labels(count, 1);
    for (std::size_t k = 0; k < count; ++k) {
        const double lo = static_cast<double>(k) * spec.window;
        const double hi = lo + spec.window;
        for (const auto& iv : spec.attack_intervals)
            if (lo < iv.end && hi > iv.start) labels[k] = -1;
    }
    return labels;
}

Scenario gen_scenario(const ScenarioSpec& spec) {
    spec.validate();
    Scenario sc;
    NormalTrafficOptions normal;
    normal.reply_loss = spec.reply_loss;
    normal.window = spec.window;
    sc.packets = gen_normal(spec.duration, spec.normal_rate, spec.normal_host_count, spec.seed, normal);

    if (spec.background_rate > 0.0) {
        Rng rng = Rng::stream(spec.seed, 4);
        const std::size_t servers = std::max<std::size_t>(1, spec.normal_host_count / 20);
        for (double t = rng.exponential(spec.background_rate); t < spec.duration;
             t += rng.exponential(spec.background_rate)) {
            PacketRecord p;
            p.t = to_micros(t);
            p.src = Ipv4{(198u << 24) | (18u << 16) | static_cast<std::uint32_t>(rng.below(1u << 17))};
            p.dst = normal_host(rng.below(servers));
            p.port = static_cast<std::uint16_t>(1 + rng.below(65535));
            sc.packets.push_back(p);
        }
    }

    Rng pool_rng = Rng::stream(spec.seed, 2);
    const auto pool = spoof_pool(spec.spoof_pool_size, pool_rng);
    for (std::size_t i = 0; i < spec.attack_intervals.size(); ++i) {
        Rng rng = Rng::stream(spec.seed, 100 + i);
        const auto& iv = spec.attack_intervals[i];
        AttackShape shape;
        shape.start = iv.start;
        shape.end = iv.end;
        shape.rate = spec.attack_rate;
        shape.ramp_seconds = spec.ramp_seconds;
        shape.ramp_floor = spec.ramp_floor;
        shape.low_phase_probability = spec.low_phase_probability;
        shape.low_phase_intensity = spec.low_phase_intensity;
        shape.window = spec.window;
        shape.fill_windows = true;
        emit_attack(shape, pool, spec.victim_count, rng, sc.packets);
    }
    std::stable_sort(sc.packets.begin(), sc.packets.end(), time_less);
    sc.window_labels = window_labels(spec);
    return sc;
}

ScenarioSpec parse_scenario_spec(std::string_view input) {
    std::map<std::string, std::string, std::less<>> kv;
    std::size_t line_no = 0;
    for (auto raw : text::split(input, '\n')) {
        ++line_no;
        auto line = text::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("scenario spec line " + std::to_string(line_no) + ": expected key = value");
        kv[std::string(text::trim(line.substr(0, eq)))] = std::string(text::trim(line.substr(eq + 1)));
    }

    auto take = [&](std::string_view key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        auto v = it->second;
        kv.erase(it);
        return v;
    };
    auto number = [&](std::string_view key, double& target) {
        if (auto v = take(key)) {
            auto d = text::parse_double(*v);
            if (!d) throw ConfigError("scenario spec: '" + std::string(key) + "' is not a number");
            target = *d;
        }
    };
    auto count = [&](std::string_view key, auto& target) {
        if (auto v = take(key)) {
            auto d = text::parse_int(*v);
            if (!d || *d < 0) throw ConfigError("scenario spec: '" + std::string(key) + "' is not a non-negative integer");
            target = static_cast<std::remove_reference_t<decltype(target)>>(*d);
        }
    };

    ScenarioSpec spec;
    if (auto preset = take("preset")) spec = ScenarioSpec::preset(parse_scenario_kind(*preset), 1);
    if (auto kind = take("kind")) spec.kind = parse_scenario_kind(*kind);
    number("duration", spec.duration);
    number("window", spec.window);
    number("normal_rate", spec.normal_rate);
    number("attack_rate", spec.attack_rate);
    count("normal_host_count", spec.normal_host_count);
    count("spoof_pool_size", spec.spoof_pool_size);
    count("victim_count", spec.victim_count);
    count("seed", spec.seed);
    number("ramp_seconds", spec.ramp_seconds);
    number("ramp_floor", spec.ramp_floor);
    number("reply_loss", spec.reply_loss);
    number("low_phase_probability", spec.low_phase_probability);
    number("low_phase_intensity", spec.low_phase_intensity);
    number("background_rate", spec.background_rate);
    if (auto intervals = take("attack_intervals")) {
        spec.attack_intervals.clear();
        for (auto item : text::split(*intervals, ',')) {
            item = text::trim(item);
            if (item.empty()) continue;
            const auto dash = item.find('-');
            auto lo = dash == std::string_view::npos ? std::nullopt : text::parse_double(item.substr(0, dash));
            auto hi = dash == std::string_view::npos ? std::nullopt : text::parse_double(item.substr(dash + 1));
            if (!lo || !hi) throw ConfigError("scenario spec: bad attack interval '" + std::string(item) + "'");
            spec.attack_intervals.push_back({*lo, *hi});
        }
    }
    if (!kv.empty()) throw ConfigError("scenario spec: unknown key '" + kv.begin()->first + "'");
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scenario spec: ") + e.what());
    }
    return spec;
}

}  // namespace rgmkl
