#include "rgmkl/run_config.hpp"

#include <stdexcept>

#include "rgmkl/errors.hpp"

namespace rgmkl {

void RunConfig::validate() const {
    try {
        thresholds.validate();
        if (gammas.empty()) throw std::invalid_argument("at least one kernel bandwidth is required");
        if (families.empty() || regularizers.empty())
            throw std::invalid_argument("at least one kernel family and one regularizer are required");
        for (const auto& f : families) parse_kernel_family(f);
        for (const auto& r : regularizers) parse_regularizer(r);
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train_fraction must lie in (0, 1)");
        for (const auto& c : candidates()) c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

MklConfig RunConfig::base_config() const {
    MklConfig c;
    c.kernel = KernelConfig::per_feature_grid(KernelFamily::ProductRbf, 2, gammas);
    c.C = C;
    c.sigma = sigma;
    c.svm_tol = svm_tol;
    c.outer_max_iter = outer_max_iter;
    c.outer_tol = outer_tol;
    c.tie_label = tie_label;
    return c;
}

std::vector<MklConfig> RunConfig::candidates() const {
    std::vector<MklConfig> out;
    for (const auto& r : regularizers) {
        for (const auto& f : families) {
            MklConfig c = base_config();
            c.kernel.family = parse_kernel_family(f);
            c.regularizer = parse_regularizer(r);
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace rgmkl
