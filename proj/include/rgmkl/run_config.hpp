#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgmkl/features.hpp"
#include "rgmkl/mkl.hpp"

namespace rgmkl {

/// Everything a command-line run can tune. Populated from a config file and
/// flags by the front end, then checked with validate() before any work.
struct RunConfig {
    Thresholds thresholds;
    std::vector<double> gammas{0.125, 0.5, 2.0, 8.0};
    std::vector<std::string> families{"product", "sum"};
    std::vector<std::string> regularizers{"l1", "l2"};
    double C = 10.0;
    double sigma = 1.0;
    double svm_tol = 1e-3;
    std::size_t outer_max_iter = 100;
    double outer_tol = 1e-6;
    int tie_label = kNormal;
    double train_fraction = 0.7;
    std::uint64_t seed = 1;

    /// Throws ConfigError describing the first invalid value.
    void validate() const;

    MklConfig base_config() const;
    /// Regularizer-major, family-minor: the selection table column order.
    std::vector<MklConfig> candidates() const;
};

}  // namespace rgmkl
