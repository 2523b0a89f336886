#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rgmkl/features.hpp"
#include "rgmkl/kernels.hpp"
#include "rgmkl/matrix.hpp"
#include "rgmkl/svm.hpp"

namespace rgmkl {

/// L1: weights constrained to the probability simplex.
/// L2: penalty sigma/2 * ||d||^2 with d >= 0.
enum class Regularizer { L1, L2 };

std::string_view to_string(Regularizer reg);
Regularizer parse_regularizer(std::string_view name);

struct LineSearchOptions {
    double initial_step = 1.0;
    double shrink = 0.5;
    double armijo = 1e-4;
    double min_step = 1e-8;
};

struct MklConfig {
    KernelConfig kernel = KernelConfig::default_grid(KernelFamily::ProductRbf);
    Regularizer regularizer = Regularizer::L1;
    double sigma = 1.0;
    double C = 10.0;
    std::size_t outer_max_iter = 100;
    double outer_tol = 1e-6;
    LineSearchOptions line_search;
    double svm_tol = 1e-3;
    /// Label assigned when the decision value is exactly zero.
    int tie_label = kNormal;

    void validate() const;
    std::string name() const;  // e.g. "product/l1"
};

/// Per-column z-score statistics; zero spread is replaced by 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const Matrix& samples);
    Matrix apply(const Matrix& samples) const;
    std::vector<double> apply(std::span<const double> sample) const;
};

/// Raised when the R fitness is undefined for a model.
class FitnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// J(d) = max_alpha Q(alpha; K_d) + r(d) over a fixed training set, with its
/// gradient dJ/dd_m = dr/dd_m - 1/2 beta^T (dK_d/dd_m) beta.
class MklObjective {
public:
    struct Evaluation {
        double value = 0.0;
        DualSolution dual;
        std::vector<double> gradient;
    };

    MklObjective(GramSet grams, std::vector<int> labels, const MklConfig& config);

    Evaluation evaluate(std::span<const double> d, std::span<const double> warm_alpha = {}) const;
    double regularizer(std::span<const double> d) const;

    const GramSet& grams() const { return grams_; }
    std::span<const int> labels() const { return labels_; }

private:
    GramSet grams_;
    std::vector<int> labels_;
    MklConfig config_;
};

struct MklModel {
    MklConfig config;
    std::vector<double> d;
    DualSolution dual;
    Matrix train;  // standardized training samples, one per row
    std::vector<int> labels;
    Standardizer scaler;
    std::optional<double> r;      // empty when undefined
    std::string r_error;          // reason when r is empty
    std::vector<double> objective_trace;
    bool stalled = false;         // stopped because no step passed the line search
};

/// Feasible-set projection: Euclidean projection onto the simplex (L1) or the
/// non-negative orthant (L2).
std::vector<double> project_feasible(std::span<const double> d, Regularizer reg);

/// (sfv, cdf) rows.
Matrix feature_matrix(std::span<const FeatureVector> samples);
std::vector<int> feature_labels(std::span<const FeatureVector> samples);

MklModel train(std::span<const FeatureVector> samples, const MklConfig& config);
MklModel train(const Matrix& raw_samples, std::span<const int> labels, const MklConfig& config);

/// Per-kernel energies h_m = d_m * ||w_m|| with ||w_m|| = d_m * sqrt(beta^T B_m beta).
std::vector<double> kernel_energies(const MklModel& model);

/// |(sum h - sum h^1.5) / (sum h + sum h^1.5) / b|.
double fitness_r(std::span<const double> energies, double bias);
double compute_r(const MklModel& model);

double decision_value(const MklModel& model, std::span<const double> raw_sample);
int predict(const MklModel& model, const FeatureVector& sample);
std::vector<int> predict(const MklModel& model, std::span<const FeatureVector> samples);

struct SelectionRow {
    KernelFamily family = KernelFamily::ProductRbf;
    Regularizer regularizer = Regularizer::L1;
    std::optional<double> r;
    std::optional<double> accuracy;
    std::string note;  // failure reason for degenerate candidates
};

struct SelectionResult {
    std::size_t best = 0;
    std::vector<SelectionRow> report;
    std::vector<std::optional<MklModel>> models;
    const MklModel& best_model() const { return *models[best]; }
};

/// {product, sum} x {L1, L2}, in the column order used by the selection tables.
std::vector<MklConfig> default_candidates(const MklConfig& base = {});

/// Trains every candidate on `train_set` and returns the one with minimal R.
/// Accuracy is measured on `holdout` (or on `train_set` when holdout is empty)
/// and reported only; it never influences the choice.
SelectionResult select_model(std::span<const FeatureVector> train_set, std::span<const FeatureVector> holdout,
                             std::span<const MklConfig> candidates, bool parallel = true);

void write_selection_csv(std::ostream& out, std::span<const SelectionRow> report, int group = 1);

void save_model(std::ostream& out, const MklModel& model);
void save_model(const std::string& path, const MklModel& model);
MklModel load_model(std::istream& in);
MklModel load_model(const std::string& path);

}  // namespace rgmkl
