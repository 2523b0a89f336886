#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgmkl/matrix.hpp"

namespace rgmkl {

enum class KernelFamily { SumRbf, ProductRbf };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// One base term: an RBF over a single feature column, or over the whole
/// vector when `feature` is kAllFeatures.
struct BaseKernel {
    static constexpr int kAllFeatures = -1;
    int feature = kAllFeatures;
    double gamma = 1.0;

    friend bool operator==(const BaseKernel&, const BaseKernel&) = default;
};

struct KernelConfig {
    KernelFamily family = KernelFamily::SumRbf;
    std::vector<BaseKernel> terms;
    std::size_t feature_dim = 2;

    std::size_t size() const { return terms.size(); }

    /// Per-feature RBF terms crossed with the given bandwidths.
    static KernelConfig per_feature_grid(KernelFamily family, std::size_t feature_dim,
                                         std::span<const double> gammas);
    /// Default grid: both features x {2^-3, 2^-1, 2^1, 2^3}, eight terms.
    static KernelConfig default_grid(KernelFamily family);

    void validate() const;

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

/// Base matrices for one sample set. For SumRbf these are the base Gram
/// matrices K_m; for ProductRbf the scaled squared distances D_m, so that
/// the combined kernel is exp(-sum_m d_m D_m).
struct GramSet {
    KernelFamily family = KernelFamily::SumRbf;
    std::vector<Matrix> mats;

    std::size_t size() const { return mats.size(); }
    std::size_t samples() const { return mats.empty() ? 0 : mats.front().rows(); }
};

double rbf(std::span<const double> x, std::span<const double> y, double gamma);

/// Samples are the rows of `samples`.
GramSet build_grams(const Matrix& samples, const KernelConfig& config);

Matrix combine(std::span<const double> d, const GramSet& grams);

/// Combined kernel values between `query` and every row of `train`.
std::vector<double> combine_row(std::span<const double> d, const KernelConfig& config, const Matrix& train,
                                std::span<const double> query);

/// Component m is beta^T (dK/dd_m) beta. `combined` must equal combine(d, grams)
/// for the product family; it is ignored for the sum family.
std::vector<double> gradient_quadform(std::span<const double> d, const GramSet& grams, std::span<const double> beta,
                                      const Matrix& combined);
std::vector<double> gradient_quadform(std::span<const double> d, const GramSet& grams, std::span<const double> beta);

double quadratic_form(const Matrix& a, std::span<const double> v);

}  // namespace rgmkl
