#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgmkl/flow_model.hpp"

namespace rgmkl {

/// Window label: +1 for normal traffic, -1 for attack traffic.
inline constexpr int kNormal = 1;
inline constexpr int kAttack = -1;

/// Feature weights and rate thresholds. Rate thresholds are in events per
/// second and are compared against count / window_length.
struct Thresholds {
    double theta1 = 0.5;   // port vs packet weight in ACD, (0,1)
    double theta2 = 0.5;   // packet vs port weight in CIP, [0,1]
    double theta3 = 10.0;  // per-source packet rate in SDD classes
    double theta4 = 5.0;   // extra-port rate in SDD classes
    double theta5 = 10.0;  // half-interaction port rate (IBF)
    double theta6 = 10.0;  // SH packet rate (MFF)
    double theta7 = 10.0;  // SD packet rate (MFF)
    double theta8 = 10.0;  // half-interaction port rate (MFF)
    double theta9 = 10.0;  // HSD port rate (HIAD)
    double window = 1.0;   // window length in seconds

    /// Use the packet-weight combination exactly as printed
    /// (flag(W_sd)*W_sd + W_sd) instead of flag(W_sd)*W_sh + W_sd.
    bool literal_packet_weight = false;

    /// Throws std::invalid_argument naming the first violated bound.
    void validate() const;
};

struct FeatureVector {
    std::size_t window_index = 0;
    double acd = 0.0;
    double ffv = 0.0;
    double ibf = 0.0;
    double mff = 0.0;
    double hiad = 0.0;
    double sfv = 0.0;
    double cdf = 0.0;
    std::optional<int> label;
};

double acd(const FlowClasses& classes, const Thresholds& th);
double ffv(const FlowClasses& classes, const Thresholds& th);
double ibf(const FlowClasses& classes, const Thresholds& th);
double mff(const FlowClasses& classes, const Thresholds& th);
double hiad(const FlowClasses& classes, const Thresholds& th);
double sfv(double hiad, double ffv);
double cdf(double acd, double mff, double ibf);

FeatureVector extract_features(const FlowClasses& classes, const Thresholds& th);
std::vector<FeatureVector> extract_series(std::span<const FlowWindow> windows, const Thresholds& th);

/// Attaches labels by window index; `labels.size()` must equal `series.size()`.
void attach_labels(std::vector<FeatureVector>& series, std::span<const int> labels);

/// CSV with header `window,acd,ffv,ibf,mff,hiad,sfv,cdf,label`; label blank when unknown.
void write_feature_csv(std::ostream& out, std::span<const FeatureVector> series);
void write_feature_csv(const std::string& path, std::span<const FeatureVector> series);
std::vector<FeatureVector> read_feature_csv(std::istream& in);
std::vector<FeatureVector> read_feature_csv(const std::string& path);

}  // namespace rgmkl
