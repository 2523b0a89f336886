#include "rgmkl/features.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "rgmkl/errors.hpp"
#include "rgmkl/text.hpp"

namespace rgmkl {

namespace {

// Keeps x when its rate over the window exceeds the threshold, else 0.
double gate(double x, double rate_threshold, double window) {
    return x / window > rate_threshold ? x : 0.0;
}

}  // namespace

void Thresholds::validate() const {
    if (!(theta1 > 0.0 && theta1 < 1.0)) throw std::invalid_argument("theta1 must lie in (0, 1)");
    if (!(theta2 >= 0.0 && theta2 <= 1.0)) throw std::invalid_argument("theta2 must lie in [0, 1]");
    const double rates[] = {theta3, theta4, theta5, theta6, theta7, theta8, theta9};
    for (int i = 0; i < 7; ++i) {
        if (!(rates[i] >= 0.0) || !std::isfinite(rates[i]))
            throw std::invalid_argument("theta" + std::to_string(i + 3) + " must be a finite non-negative rate");
    }
    if (!(window > 0.0) || !std::isfinite(window)) throw std::invalid_argument("window length must be positive");
}

double acd(const FlowClasses& classes, const Thresholds& th) {
    double sum = 0.0;
    for (const auto& [_, packets] : classes.acs) {
        const auto ports = static_cast<double>(distinct_ports(packets));
        const auto count = static_cast<double>(packets.size());
        sum += th.theta1 * ports + (1.0 - th.theta1) * count;
    }
    return sum;
}

double ffv(const FlowClasses& classes, const Thresholds& th) {
    double sum = 0.0;
    for (const auto& [_, packets] : classes.sdd) {
        std::map<Ipv4, std::size_t> per_source;
        for (const auto& p : packets) ++per_source[p.src];

        double gated_packets = 0.0;
        for (const auto& [src, count] : per_source) gated_packets += gate(static_cast<double>(count), th.theta3, th.window);

        const double extra_ports = static_cast<double>(distinct_ports(packets)) - 1.0;
        const double cip = static_cast<double>(per_source.size()) + th.theta2 * gated_packets +
                           (1.0 - th.theta2) * gate(extra_ports, th.theta4, th.window);
        sum += cip;
    }
    return sum - static_cast<double>(classes.sdd.size());
}

double ibf(const FlowClasses& classes, const Thresholds& th) {
    const auto s = static_cast<double>(classes.sh.size());
    const auto d = static_cast<double>(classes.dh.size());
    double numerator = std::abs(s - d);
    for (const auto& [_, packets] : classes.sh)
        numerator += gate(static_cast<double>(distinct_ports(packets)), th.theta5, th.window);
    for (const auto& [_, packets] : classes.dh)
        numerator += gate(static_cast<double>(distinct_ports(packets)), th.theta5, th.window);
    return numerator / (static_cast<double>(classes.if_set.size()) + 1.0);
}

double mff(const FlowClasses& classes, const Thresholds& th) {
    double weight_sh = 0.0;
    for (const auto& [_, packets] : classes.sh)
        weight_sh += gate(static_cast<double>(packets.size()), th.theta6, th.window);

    double weight_sd = 0.0;
    for (const auto& [_, packets] : classes.sd)
        weight_sd += gate(static_cast<double>(packets.size()), th.theta7, th.window);

    double weight_port = 0.0;
    for (const auto& [_, packets] : classes.sh)
        weight_port += gate(static_cast<double>(distinct_ports(packets)), th.theta8, th.window);
    for (const auto& [_, packets] : classes.dh)
        weight_port += gate(static_cast<double>(distinct_ports(packets)), th.theta8, th.window);

    const double flag = weight_sd > 0.0 ? 0.0 : 1.0;
    const double weight_packet =
        th.literal_packet_weight ? flag * weight_sd + weight_sd : flag * weight_sh + weight_sd;

    const auto s = static_cast<double>(classes.sh.size());
    return (s + weight_port + weight_packet) / (static_cast<double>(classes.if_set.size()) + 1.0);
}

double hiad(const FlowClasses& classes, const Thresholds& th) {
    double sum = 0.0;
    for (const auto& [_, group] : classes.hsd)
        sum += static_cast<double>(group.hn) + gate(static_cast<double>(group.port_count), th.theta9, th.window);
    return sum;
}

double sfv(double hiad_value, double ffv_value) {
    return std::sqrt(hiad_value / (ffv_value + 1.0)) * (hiad_value + ffv_value);
}

double cdf(double acd_value, double mff_value, double ibf_value) {
    return std::sqrt(acd_value + mff_value) / 2.0 + std::log(ibf_value + 1.0);
}

FeatureVector extract_features(const FlowClasses& classes, const Thresholds& th) {
    FeatureVector fv;
    fv.acd = acd(classes, th);
    fv.ffv = ffv(classes, th);
    fv.ibf = ibf(classes, th);
    fv.mff = mff(classes, th);
    fv.hiad = hiad(classes, th);
    fv.sfv = sfv(fv.hiad, fv.ffv);
    fv.cdf = cdf(fv.acd, fv.mff, fv.ibf);
    return fv;
}

std::vector<FeatureVector> extract_series(std::span<const FlowWindow> windows, const Thresholds& th) {
    th.validate();
    std::vector<FeatureVector> series;
    series.reserve(windows.size());
    for (std::size_t k = 0; k < windows.size(); ++k) {
        auto fv = extract_features(classify_flows(windows[k]), th);
        fv.window_index = k;
        series.push_back(fv);
    }
    return series;
}

void attach_labels(std::vector<FeatureVector>& series, std::span<const int> labels) {
    if (labels.size() != series.size())
        throw DataError("label count " + std::to_string(labels.size()) + " does not match window count " +
                        std::to_string(series.size()));
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (labels[i] != kNormal && labels[i] != kAttack) throw DataError("labels must be +1 or -1");
        series[i].label = labels[i];
    }
}

void write_feature_csv(std::ostream& out, std::span<const FeatureVector> series) {
    out << "window,acd,ffv,ibf,mff,hiad,sfv,cdf,label\n";
    for (const auto& fv : series) {
        out << fv.window_index;
        for (double v : {fv.acd, fv.ffv, fv.ibf, fv.mff, fv.hiad, fv.sfv, fv.cdf}) out << ',' << text::format_double(v);
        out << ',';
        if (fv.label) out << *fv.label;
        out << '\n';
    }
}

void write_feature_csv(const std::string& path, std::span<const FeatureVector> series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    write_feature_csv(out, series);
}

std::vector<FeatureVector> read_feature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "window,acd,ffv,ibf,mff,hiad,sfv,cdf,label")
        throw DataError("feature file: missing or unexpected header");

    std::vector<FeatureVector> series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(text::trim(line), ',');
        const auto where = "feature file line " + std::to_string(line_no) + ": ";
        if (fields.size() != 9) throw DataError(where + "expected 9 fields");

        FeatureVector fv;
        auto index = text::parse_int(fields[0]);
        if (!index || *index < 0) throw DataError(where + "bad window index");
        fv.window_index = static_cast<std::size_t>(*index);
        double* targets[] = {&fv.acd, &fv.ffv, &fv.ibf, &fv.mff, &fv.hiad, &fv.sfv, &fv.cdf};
        for (int i = 0; i < 7; ++i) {
            auto v = text::parse_double(fields[static_cast<std::size_t>(i) + 1]);
            if (!v || !std::isfinite(*v) || *v < 0.0) throw DataError(where + "bad feature value");
            *targets[i] = *v;
        }
        if (!text::trim(fields[8]).empty()) {
            auto label = text::parse_int(fields[8]);
            if (!label || (*label != kNormal && *label != kAttack)) throw DataError(where + "label must be 1, -1 or blank");
            fv.label = static_cast<int>(*label);
        }
        series.push_back(fv);
    }
    return series;
}

std::vector<FeatureVector> read_feature_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return read_feature_csv(in);
}

}  // namespace rgmkl
