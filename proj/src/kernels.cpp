#include "rgmkl/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace rgmkl {

namespace {

double term_distance(const BaseKernel& term, std::span<const double> x, std::span<const double> y) {
    if (term.feature == BaseKernel::kAllFeatures) {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double diff = x[k] - y[k];
            s += diff * diff;
        }
        return s;
    }
    const auto f = static_cast<std::size_t>(term.feature);
    const double diff = x[f] - y[f];
    return diff * diff;
}

void check_weights(std::span<const double> d, std::size_t expected) {
    if (d.size() != expected) throw std::invalid_argument("kernel weight count does not match base kernel count");
    for (double w : d)
        if (!(w >= 0.0)) throw std::invalid_argument("kernel weights must be non-negative");
}

}  // namespace

std::string_view to_string(KernelFamily family) {
    return family == KernelFamily::SumRbf ? "sum" : "product";
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "sum") return KernelFamily::SumRbf;
    if (name == "product") return KernelFamily::ProductRbf;
    throw std::invalid_argument("unknown kernel family '" + std::string(name) + "' (expected sum or product)");
}

KernelConfig KernelConfig::per_feature_grid(KernelFamily family, std::size_t feature_dim,
                                            std::span<const double> gammas) {
    KernelConfig config;
    config.family = family;
    config.feature_dim = feature_dim;
    for (std::size_t f = 0; f < feature_dim; ++f)
        for (double g : gammas) config.terms.push_back({static_cast<int>(f), g});
    return config;
}

KernelConfig KernelConfig::default_grid(KernelFamily family) {
    static constexpr double kGammas[] = {0.125, 0.5, 2.0, 8.0};
    return per_feature_grid(family, 2, kGammas);
}

void KernelConfig::validate() const {
    if (feature_dim < 1) throw std::invalid_argument("feature dimension must be at least 1");
    if (terms.empty()) throw std::invalid_argument("kernel needs at least one base term");
    for (const auto& t : terms) {
        if (!(t.gamma > 0.0) || !std::isfinite(t.gamma)) throw std::invalid_argument("bandwidths must be positive");
        if (t.feature != BaseKernel::kAllFeatures &&
            (t.feature < 0 || static_cast<std::size_t>(t.feature) >= feature_dim))
            throw std::invalid_argument("base kernel feature index out of range");
    }
}

double rbf(std::span<const double> x, std::span<const double> y, double gamma) {
    if (x.size() != y.size()) throw std::invalid_argument("rbf: dimension mismatch");
    if (!(gamma > 0.0)) throw std::invalid_argument("rbf: bandwidth must be positive");
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - y[k];
        s += diff * diff;
    }
    return std::exp(-gamma * s);
}

GramSet build_grams(const Matrix& samples, const KernelConfig& config) {
    config.validate();
    if (samples.cols() != config.feature_dim) throw std::invalid_argument("sample dimension does not match kernel config");
    const std::size_t n = samples.rows();

    GramSet grams;
    grams.family = config.family;
    grams.mats.reserve(config.size());
    for (const auto& term : config.terms) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = config.family == KernelFamily::SumRbf ? 1.0 : 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dist = term.gamma * term_distance(term, samples.row(i), samples.row(j));
                const double v = config.family == KernelFamily::SumRbf ? std::exp(-dist) : dist;
                m(i, j) = v;
                m(j, i) = v;
            }
        }
        grams.mats.push_back(std::move(m));
    }
    return grams;
}

Matrix combine(std::span<const double> d, const GramSet& grams) {
    check_weights(d, grams.size());
    const std::size_t n = grams.samples();
    Matrix out(n, n);
    auto acc = out.data();
    for (std::size_t m = 0; m < grams.size(); ++m) {
        if (d[m] == 0.0) continue;
        const auto src = grams.mats[m].data();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += d[m] * src[k];
    }
    if (grams.family == KernelFamily::ProductRbf)
        for (double& v : acc) v = std::exp(-v);
    return out;
}

std::vector<double> combine_row(std::span<const double> d, const KernelConfig& config, const Matrix& train,
                                std::span<const double> query) {
    check_weights(d, config.size());
    if (query.size() != config.feature_dim || train.cols() != config.feature_dim)
        throw std::invalid_argument("combine_row: dimension mismatch");
    std::vector<double> row(train.rows(), 0.0);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m < config.size(); ++m) {
            if (d[m] == 0.0) continue;
            const double dist = config.terms[m].gamma * term_distance(config.terms[m], train.row(i), query);
            acc += d[m] * (config.family == KernelFamily::SumRbf ? std::exp(-dist) : dist);
        }
        row[i] = config.family == KernelFamily::SumRbf ? acc : std::exp(-acc);
    }
    return row;
}

double quadratic_form(const Matrix& a, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (v[i] == 0.0) continue;
        double inner = 0.0;
        const auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) inner += r[j] * v[j];
        s += v[i] * inner;
    }
    return s;
}

std::vector<double> gradient_quadform(std::span<const double> d, const GramSet& grams, std::span<const double> beta,
                                      const Matrix& combined) {
    check_weights(d, grams.size());
    if (beta.size() != grams.samples()) throw std::invalid_argument("gradient_quadform: length mismatch");
    std::vector<double> grad(grams.size(), 0.0);
    for (std::size_t m = 0; m < grams.size(); ++m) {
        if (grams.family == KernelFamily::SumRbf) {
            grad[m] = quadratic_form(grams.mats[m], beta);
            continue;
        }
        const auto& dm = grams.mats[m];
        double s = 0.0;
        for (std::size_t i = 0; i < dm.rows(); ++i) {
            if (beta[i] == 0.0) continue;
            double inner = 0.0;
            for (std::size_t j = 0; j < dm.cols(); ++j) inner += dm(i, j) * combined(i, j) * beta[j];
            s += beta[i] * inner;
        }
        grad[m] = -s;
    }
    return grad;
}

std::vector<double> gradient_quadform(std::span<const double> d, const GramSet& grams, std::span<const double> beta) {
    if (grams.family == KernelFamily::SumRbf) return gradient_quadform(d, grams, beta, Matrix{});
    return gradient_quadform(d, grams, beta, combine(d, grams));
}

}  // namespace rgmkl
