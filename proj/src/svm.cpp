#include "rgmkl/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rgmkl {

namespace {

constexpr double kTau = 1e-12;

void check_problem(const Matrix& kernel, std::span<const int> y, double C) {
    const std::size_t n = y.size();
    if (!kernel.is_square() || kernel.rows() != n) throw std::invalid_argument("kernel must be n x n for n labels");
    if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");
    bool has_pos = false;
    bool has_neg = false;
    for (int label : y) {
        if (label == 1) has_pos = true;
        else if (label == -1) has_neg = true;
        else throw std::invalid_argument("labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("both classes must be present");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = kernel(i, j);
            const double b = kernel(j, i);
            if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
                throw std::invalid_argument("kernel matrix is not symmetric");
        }
    }
}

bool in_up(int y, double a, double C) { return (y == 1 && a < C) || (y == -1 && a > 0.0); }
bool in_low(int y, double a, double C) { return (y == -1 && a < C) || (y == 1 && a > 0.0); }

struct Selection {
    std::size_t i = 0;
    std::size_t j = 0;
    double violation = -std::numeric_limits<double>::infinity();
};

Selection select_pair(std::span<const int> y, std::span<const double> alpha, std::span<const double> grad, double C) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Selection s;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double v = -y[t] * grad[t];
        if (in_up(y[t], alpha[t], C) && v > gmax) {
            gmax = v;
            s.i = t;
        }
        if (in_low(y[t], alpha[t], C) && v < gmin) {
            gmin = v;
            s.j = t;
        }
    }
    if (std::isfinite(gmax) && std::isfinite(gmin)) s.violation = gmax - gmin;
    return s;
}

std::vector<double> full_gradient(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha) {
    const std::size_t n = y.size();
    std::vector<double> grad(n, -1.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (alpha[j] == 0.0) continue;
        const double coef = alpha[j] * y[j];
        for (std::size_t k = 0; k < n; ++k) grad[k] += y[k] * coef * kernel(j, k);
    }
    return grad;
}

double objective_from_gradient(std::span<const double> alpha, std::span<const double> grad) {
    double s = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) s += alpha[k] * (1.0 - grad[k]);
    return 0.5 * s;
}

double recover_bias(std::span<const int> y, std::span<const double> alpha, std::span<const double> grad, double C) {
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double v = -y[k] * grad[k];
        if (alpha[k] > 0.0 && alpha[k] < C) {
            free_sum += v;
            ++free_count;
        } else if ((alpha[k] == 0.0 && y[k] == 1) || (alpha[k] >= C && y[k] == -1)) {
            lower = std::max(lower, v);
        } else {
            upper = std::min(upper, v);
        }
    }
    if (free_count > 0) return free_sum / static_cast<double>(free_count);
    if (std::isfinite(lower) && std::isfinite(upper)) return 0.5 * (lower + upper);
    if (std::isfinite(lower)) return lower;
    if (std::isfinite(upper)) return upper;
    return 0.0;
}

DualSolution finish(const Matrix& kernel, std::span<const int> y, std::vector<double> alpha, double C,
                    std::size_t iterations, std::vector<double> trace) {
    DualSolution sol;
    const auto grad = full_gradient(kernel, y, alpha);
    sol.objective = objective_from_gradient(alpha, grad);
    sol.b = recover_bias(y, alpha, grad, C);
    sol.max_violation = std::max(0.0, select_pair(y, alpha, grad, C).violation);
    for (std::size_t k = 0; k < alpha.size(); ++k)
        if (alpha[k] > 0.0) sol.support_indices.push_back(k);
    sol.alpha = std::move(alpha);
    sol.iterations = iterations;
    sol.objective_trace = std::move(trace);
    return sol;
}

}  // namespace

DualSolution solve_dual(const Matrix& kernel, std::span<const int> y, double C, const SolverOptions& options) {
    check_problem(kernel, y, C);
    if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    const std::size_t n = y.size();

    std::vector<double> alpha(n, 0.0);
    if (!options.initial_alpha.empty()) {
        if (options.initial_alpha.size() != n) throw std::invalid_argument("initial alpha has wrong length");
        double balance = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            alpha[k] = std::clamp(options.initial_alpha[k], 0.0, C);
            balance += alpha[k] * y[k];
        }
        if (std::abs(balance) > 1e-9 * std::max(1.0, C * static_cast<double>(n))) std::fill(alpha.begin(), alpha.end(), 0.0);
    }

    auto grad = full_gradient(kernel, y, alpha);
    const std::size_t budget = options.max_iterations != 0 ? options.max_iterations : 10 * n * n;

    std::vector<double> trace;
    if (options.track_objective) trace.push_back(objective_from_gradient(alpha, grad));

    std::size_t iter = 0;
    for (;; ++iter) {
        const auto sel = select_pair(y, alpha, grad, C);
        if (sel.violation < options.tol) break;
        if (iter >= budget) {
            throw ConvergenceError("SMO did not converge within " + std::to_string(budget) + " pair updates",
                                   finish(kernel, y, std::move(alpha), C, iter, std::move(trace)));
        }

        const std::size_t i = sel.i;
        const std::size_t j = sel.j;
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double kii = kernel(i, i);
        const double kjj = kernel(j, j);
        const double kij = kernel(i, j);

        if (y[i] != y[j]) {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = (alpha[i] - old_i) * y[i];
        const double dj = (alpha[j] - old_j) * y[j];
        for (std::size_t k = 0; k < n; ++k) grad[k] += y[k] * (di * kernel(i, k) + dj * kernel(j, k));

        if (options.track_objective) trace.push_back(objective_from_gradient(alpha, grad));
    }
    return finish(kernel, y, std::move(alpha), C, iter, std::move(trace));
}

double decision(const DualSolution& solution, std::span<const int> y, std::span<const double> kernel_row) {
    if (kernel_row.size() != solution.alpha.size() || y.size() != solution.alpha.size())
        throw std::invalid_argument("decision: length mismatch");
    double f = solution.b;
    for (std::size_t i = 0; i < kernel_row.size(); ++i)
        if (solution.alpha[i] != 0.0) f += solution.alpha[i] * y[i] * kernel_row[i];
    return f;
}

double dual_objective(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha) {
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        linear += alpha[i];
        if (alpha[i] == 0.0) continue;
        for (std::size_t j = 0; j < y.size(); ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(i, j);
    }
    return linear - 0.5 * quad;
}

double kkt_violation(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha, double C) {
    const auto grad = full_gradient(kernel, y, alpha);
    return std::max(0.0, select_pair(y, alpha, grad, C).violation);
}

}  // namespace rgmkl
