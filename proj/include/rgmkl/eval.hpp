#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rgmkl/features.hpp"
#include "rgmkl/mkl.hpp"

namespace rgmkl {

/// Attack-centric confusion counts: "positive" is normal traffic (+1),
/// "negative" is attack traffic (-1).
struct ConfusionCounts {
    std::size_t tp = 0;  // normal marked normal
    std::size_t fp = 0;  // normal marked attack
    std::size_t tn = 0;  // attack marked attack
    std::size_t fn = 0;  // attack marked normal

    std::size_t total() const { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth);

/// Detection rate tn / (tn + fn).
double dr(const ConfusionCounts& c);
/// Error rate (fn + fp) / total.
double er(const ConfusionCounts& c);
/// (tp + tn) / total.
double accuracy(const ConfusionCounts& c);

struct Split {
    std::vector<FeatureVector> train;
    std::vector<FeatureVector> test;
};

/// Stratified split; the training size is round(fraction * n) and is shared
/// between classes by largest remainder. Deterministic per seed.
Split split(std::span<const FeatureVector> samples, double train_fraction, std::uint64_t seed);

using Predictor = std::function<int(const FeatureVector&)>;

struct Method {
    std::string name;
    std::function<Predictor(std::span<const FeatureVector> train)> fit;
};

struct MethodResult {
    std::string name;
    ConfusionCounts counts;
    double dr = 0.0;
    double er = 0.0;
    double accuracy = 0.0;
};

struct MethodOptions {
    MklConfig base;            // C, tolerances, bandwidth grid
    std::uint64_t seed = 1;    // inner validation split for the single-kernel baseline
};

/// Single-kernel SVM: the best single base kernel by inner validation accuracy.
Method single_kernel_svm(const MethodOptions& options = {});
/// Sum of RBF kernels with simplex-constrained weights.
Method simple_mkl(const MethodOptions& options = {});
/// Full selection over {product, sum} x {l1, l2} by minimal R.
Method r_gmkl(const MethodOptions& options = {});

std::vector<Method> default_methods(const MethodOptions& options = {});

std::vector<MethodResult> compare(std::span<const Method> methods, std::span<const FeatureVector> train,
                                  std::span<const FeatureVector> test);

void write_comparison_csv(std::ostream& out, std::span<const MethodResult> results);
void write_comparison_table(std::ostream& out, std::span<const MethodResult> results);

}  // namespace rgmkl
