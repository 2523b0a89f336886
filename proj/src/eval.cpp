#include "rgmkl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "rgmkl/errors.hpp"
#include "rgmkl/rng.hpp"
#include "rgmkl/text.hpp"

namespace rgmkl {

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("confusion: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("confusion: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool normal_truth = truth[i] == kNormal;
        const bool normal_pred = predicted[i] == kNormal;
        if (normal_truth) (normal_pred ? c.tp : c.fp)++;
        else (normal_pred ? c.fn : c.tn)++;
    }
    return c;
}

double dr(const ConfusionCounts& c) {
    if (c.tn + c.fn == 0) throw std::domain_error("detection rate undefined without attack samples");
    return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fn);
}

double er(const ConfusionCounts& c) {
    if (c.total() == 0) throw std::domain_error("error rate undefined for an empty confusion table");
    return static_cast<double>(c.fn + c.fp) / static_cast<double>(c.total());
}

double accuracy(const ConfusionCounts& c) {
    if (c.total() == 0) throw std::domain_error("accuracy undefined for an empty confusion table");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

Split split(std::span<const FeatureVector> samples, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train fraction must lie in (0, 1)");

    std::vector<std::size_t> normal;
    std::vector<std::size_t> attack;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].label) throw DataError("split needs labelled samples");
        (*samples[i].label == kNormal ? normal : attack).push_back(i);
    }
    if (normal.size() < 2 || attack.size() < 2) throw DataError("split needs at least two samples of each class");

    const auto n = static_cast<double>(samples.size());
    const auto train_total = static_cast<std::size_t>(std::llround(train_fraction * n));
    const double exact_normal = train_fraction * static_cast<double>(normal.size());
    const double exact_attack = train_fraction * static_cast<double>(attack.size());
    auto take_normal = static_cast<std::size_t>(std::floor(exact_normal));
    auto take_attack = static_cast<std::size_t>(std::floor(exact_attack));
    // Largest remainder; ties go to the normal class.
    while (take_normal + take_attack < train_total) {
        const double rem_normal = exact_normal - static_cast<double>(take_normal);
        const double rem_attack = exact_attack - static_cast<double>(take_attack);
        if (rem_normal >= rem_attack && take_normal < normal.size()) ++take_normal;
        else if (take_attack < attack.size()) ++take_attack;
        else ++take_normal;
    }
    // Each side keeps at least one sample of each class.
    take_normal = std::clamp<std::size_t>(take_normal, 1, normal.size() - 1);
    take_attack = std::clamp<std::size_t>(take_attack, 1, attack.size() - 1);

    Rng rng = Rng::stream(seed, 7);
    rng.shuffle(std::span<std::size_t>(normal));
    rng.shuffle(std::span<std::size_t>(attack));

    std::vector<bool> in_train(samples.size(), false);
    for (std::size_t k = 0; k < take_normal; ++k) in_train[normal[k]] = true;
    for (std::size_t k = 0; k < take_attack; ++k) in_train[attack[k]] = true;

    Split s;
    for (std::size_t i = 0; i < samples.size(); ++i) (in_train[i] ? s.train : s.test).push_back(samples[i]);
    return s;
}

namespace {

double holdout_accuracy(const MklModel& model, std::span<const FeatureVector> holdout) {
    const auto predicted = predict(model, holdout);
    const auto truth = feature_labels(holdout);
    return accuracy(confusion(predicted, truth));
}

Predictor wrap(MklModel model) {
    return [m = std::make_shared<MklModel>(std::move(model))](const FeatureVector& fv) { return predict(*m, fv); };
}

}  // namespace

Method single_kernel_svm(const MethodOptions& options) {
    return {"SVM", [options](std::span<const FeatureVector> train_set) -> Predictor {
                const auto inner = split(train_set, 0.7, options.seed);
                const auto& terms = options.base.kernel.terms;
                std::size_t best = 0;
                double best_acc = -1.0;
                for (std::size_t m = 0; m < terms.size(); ++m) {
                    MklConfig config = options.base;
                    config.kernel.family = KernelFamily::SumRbf;
                    config.kernel.terms = {terms[m]};
                    config.regularizer = Regularizer::L1;
                    double acc = -1.0;
                    try {
                        acc = holdout_accuracy(train(inner.train, config), inner.test);
                    } catch (const ConvergenceError&) {
                        continue;
                    }
                    if (acc > best_acc) {
                        best_acc = acc;
                        best = m;
                    }
                }
                MklConfig config = options.base;
                config.kernel.family = KernelFamily::SumRbf;
                config.kernel.terms = {terms[best]};
                config.regularizer = Regularizer::L1;
                return wrap(train(train_set, config));
            }};
}

Method simple_mkl(const MethodOptions& options) {
    return {"SimpleMKL", [options](std::span<const FeatureVector> train_set) -> Predictor {
                MklConfig config = options.base;
                config.kernel.family = KernelFamily::SumRbf;
                config.regularizer = Regularizer::L1;
                return wrap(train(train_set, config));
            }};
}

Method r_gmkl(const MethodOptions& options) {
    return {"R-GMKL", [options](std::span<const FeatureVector> train_set) -> Predictor {
                const auto candidates = default_candidates(options.base);
                auto selection = select_model(train_set, {}, candidates);
                return wrap(std::move(*selection.models[selection.best]));
            }};
}

std::vector<Method> default_methods(const MethodOptions& options) {
    return {simple_mkl(options), single_kernel_svm(options), r_gmkl(options)};
}

std::vector<MethodResult> compare(std::span<const Method> methods, std::span<const FeatureVector> train_set,
                                  std::span<const FeatureVector> test) {
    if (methods.empty()) throw std::invalid_argument("compare needs at least one method");
    const auto truth = feature_labels(test);
    std::vector<MethodResult> results;
    for (const auto& method : methods) {
        const auto predictor = method.fit(train_set);
        std::vector<int> predicted;
        predicted.reserve(test.size());
        for (const auto& fv : test) predicted.push_back(predictor(fv));
        MethodResult r;
        r.name = method.name;
        r.counts = confusion(predicted, truth);
        r.dr = dr(r.counts);
        r.er = er(r.counts);
        r.accuracy = accuracy(r.counts);
        results.push_back(r);
    }
    return results;
}

void write_comparison_csv(std::ostream& out, std::span<const MethodResult> results) {
    out << "method,DR,ER,accuracy,tp,fp,tn,fn\n";
    for (const auto& r : results) {
        out << r.name << ',' << text::format_double(r.dr) << ',' << text::format_double(r.er) << ','
            << text::format_double(r.accuracy) << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.tn << ','
            << r.counts.fn << '\n';
    }
}

void write_comparison_table(std::ostream& out, std::span<const MethodResult> results) {
    out << std::left << std::setw(8) << "";
    for (const auto& r : results) out << std::right << std::setw(12) << r.name;
    out << '\n' << std::left << std::setw(8) << "DR(%)";
    for (const auto& r : results) out << std::right << std::setw(12) << text::format_fixed(100.0 * r.dr, 1);
    out << '\n' << std::left << std::setw(8) << "ER(%)";
    for (const auto& r : results) out << std::right << std::setw(12) << text::format_fixed(100.0 * r.er, 1);
    out << '\n';
}

}  // namespace rgmkl
