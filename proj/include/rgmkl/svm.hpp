#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rgmkl/matrix.hpp"

namespace rgmkl {

struct DualSolution {
    std::vector<double> alpha;
    double b = 0.0;
    double objective = 0.0;  // -1/2 sum a_i a_j y_i y_j K_ij + sum a_i
    std::vector<std::size_t> support_indices;
    std::size_t iterations = 0;
    double max_violation = 0.0;
    std::vector<double> objective_trace;  // filled only when tracking is requested
};

struct SolverOptions {
    double tol = 1e-3;
    /// Pair updates allowed; 0 means 10 * n^2.
    std::size_t max_iterations = 0;
    bool track_objective = false;
    /// Feasible starting point (0 <= a_i <= C, sum a_i y_i = 0); zero vector when empty.
    std::vector<double> initial_alpha;
};

/// Raised when SMO exhausts its iteration budget; carries the best iterate.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, DualSolution best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const DualSolution& best() const { return best_; }

private:
    DualSolution best_;
};

/// Maximizes the soft-margin SVM dual for a fixed Gram matrix using SMO with
/// maximal-violating-pair selection. Labels must be +1/-1 with both present.
DualSolution solve_dual(const Matrix& kernel, std::span<const int> y, double C, const SolverOptions& options = {});

/// sum_i alpha_i y_i row_i + b.
double decision(const DualSolution& solution, std::span<const int> y, std::span<const double> kernel_row);

/// Dual objective for arbitrary alpha.
double dual_objective(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha);

/// Largest KKT violation m(alpha) - M(alpha) in the LIBSVM sense (<= 0 at optimum).
double kkt_violation(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha, double C);

}  // namespace rgmkl
