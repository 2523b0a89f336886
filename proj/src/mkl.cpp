#include "rgmkl/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>

#include "rgmkl/errors.hpp"
#include "rgmkl/text.hpp"

namespace rgmkl {

std::string_view to_string(Regularizer reg) { return reg == Regularizer::L1 ? "l1" : "l2"; }

Regularizer parse_regularizer(std::string_view name) {
    if (name == "l1" || name == "L1") return Regularizer::L1;
    if (name == "l2" || name == "L2") return Regularizer::L2;
    throw std::invalid_argument("unknown regularizer '" + std::string(name) + "' (expected l1 or l2)");
}

void MklConfig::validate() const {
    kernel.validate();
    if (regularizer == Regularizer::L2 && !(sigma > 0.0)) throw std::invalid_argument("sigma must be positive for l2");
    if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");
    if (outer_max_iter == 0) throw std::invalid_argument("outer_max_iter must be at least 1");
    if (!(outer_tol > 0.0)) throw std::invalid_argument("outer_tol must be positive");
    if (!(svm_tol > 0.0)) throw std::invalid_argument("svm_tol must be positive");
    const auto& ls = line_search;
    if (!(ls.initial_step > 0.0) || !(ls.shrink > 0.0 && ls.shrink < 1.0) || !(ls.armijo >= 0.0 && ls.armijo < 1.0) ||
        !(ls.min_step > 0.0 && ls.min_step <= ls.initial_step))
        throw std::invalid_argument("invalid line search parameters");
    if (tie_label != kNormal && tie_label != kAttack) throw std::invalid_argument("tie label must be +1 or -1");
}

std::string MklConfig::name() const {
    return std::string(to_string(kernel.family)) + "/" + std::string(to_string(regularizer));
}

// ---------------------------------------------------------------------------
// Standardization

Standardizer Standardizer::fit(const Matrix& samples) {
    Standardizer s;
    const std::size_t n = samples.rows();
    s.mean.assign(samples.cols(), 0.0);
    s.stddev.assign(samples.cols(), 1.0);
    if (n == 0) return s;
    for (std::size_t c = 0; c < samples.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += samples(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) var += (samples(r, c) - mean) * (samples(r, c) - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        s.mean[c] = mean;
        s.stddev[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& samples) const {
    Matrix out(samples.rows(), samples.cols());
    for (std::size_t r = 0; r < samples.rows(); ++r)
        for (std::size_t c = 0; c < samples.cols(); ++c) out(r, c) = (samples(r, c) - mean[c]) / stddev[c];
    return out;
}

std::vector<double> Standardizer::apply(std::span<const double> sample) const {
    if (sample.size() != mean.size()) throw std::invalid_argument("sample dimension does not match standardizer");
    std::vector<double> out(sample.size());
    for (std::size_t c = 0; c < sample.size(); ++c) out[c] = (sample[c] - mean[c]) / stddev[c];
    return out;
}

// ---------------------------------------------------------------------------
// Objective

MklObjective::MklObjective(GramSet grams, std::vector<int> labels, const MklConfig& config)
    : grams_(std::move(grams)), labels_(std::move(labels)), config_(config) {}

double MklObjective::regularizer(std::span<const double> d) const {
    if (config_.regularizer == Regularizer::L1) return 0.0;
    double s = 0.0;
    for (double w : d) s += w * w;
    return 0.5 * config_.sigma * s;
}

MklObjective::Evaluation MklObjective::evaluate(std::span<const double> d, std::span<const double> warm_alpha) const {
    const Matrix combined = combine(d, grams_);
    SolverOptions opts;
    opts.tol = config_.svm_tol;
    opts.initial_alpha.assign(warm_alpha.begin(), warm_alpha.end());

    Evaluation ev;
    ev.dual = solve_dual(combined, labels_, config_.C, opts);
    ev.value = ev.dual.objective + regularizer(d);

    std::vector<double> beta(labels_.size());
    for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = ev.dual.alpha[i] * labels_[i];
    const auto quad = gradient_quadform(d, grams_, beta, combined);
    ev.gradient.resize(d.size());
    for (std::size_t m = 0; m < d.size(); ++m) {
        const double reg_grad = config_.regularizer == Regularizer::L2 ? config_.sigma * d[m] : 0.0;
        ev.gradient[m] = reg_grad - 0.5 * quad[m];
    }
    return ev;
}

// ---------------------------------------------------------------------------
// Projection

std::vector<double> project_feasible(std::span<const double> d, Regularizer reg) {
    std::vector<double> out(d.begin(), d.end());
    for (double v : out)
        if (!std::isfinite(v)) throw std::invalid_argument("project_feasible: non-finite weight");
    if (reg == Regularizer::L2) {
        for (double& v : out) v = std::max(v, 0.0);
        return out;
    }
    if (out.empty()) throw std::invalid_argument("project_feasible: empty weight vector");

    const bool nonneg = std::all_of(out.begin(), out.end(), [](double v) { return v >= 0.0; });
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (nonneg && std::abs(total - 1.0) <= 1e-13) return out;

    // Michelot: repeatedly shift the active set onto the hyperplane and drop
    // coordinates that fall to or below zero.
    std::vector<bool> active(out.size(), true);
    double tau = 0.0;
    while (true) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!active[i]) continue;
            sum += out[i];
            ++count;
        }
        tau = (sum - 1.0) / static_cast<double>(count);
        bool removed = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (active[i] && out[i] - tau <= 0.0) {
                active[i] = false;
                removed = true;
            }
        }
        if (!removed) break;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = active[i] ? out[i] - tau : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Training

Matrix feature_matrix(std::span<const FeatureVector> samples) {
    Matrix x(samples.size(), 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        x(i, 0) = samples[i].sfv;
        x(i, 1) = samples[i].cdf;
    }
    return x;
}

std::vector<int> feature_labels(std::span<const FeatureVector> samples) {
    std::vector<int> y;
    y.reserve(samples.size());
    for (const auto& s : samples) {
        if (!s.label) throw DataError("window " + std::to_string(s.window_index) + " has no label");
        y.push_back(*s.label);
    }
    return y;
}

MklModel train(std::span<const FeatureVector> samples, const MklConfig& config) {
    const auto labels = feature_labels(samples);
    return train(feature_matrix(samples), labels, config);
}

MklModel train(const Matrix& raw_samples, std::span<const int> labels, const MklConfig& config) {
    config.validate();
    if (raw_samples.rows() != labels.size()) throw std::invalid_argument("sample and label counts differ");
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNormal));
    const auto negatives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kAttack));
    if (positives + negatives != labels.size()) throw DataError("labels must be +1 or -1");
    if (positives < 2 || negatives < 2) throw DataError("training needs at least two samples of each class");

    MklModel model;
    model.config = config;
    model.scaler = Standardizer::fit(raw_samples);
    model.train = model.scaler.apply(raw_samples);
    model.labels.assign(labels.begin(), labels.end());

    const MklObjective objective(build_grams(model.train, config.kernel), model.labels, config);
    const std::size_t m = config.kernel.size();
    std::vector<double> d(m, config.regularizer == Regularizer::L1 ? 1.0 / static_cast<double>(m) : 1.0);

    auto current = objective.evaluate(d);
    model.objective_trace.push_back(current.value);

    const auto& ls = config.line_search;
    for (std::size_t iter = 0; iter < config.outer_max_iter; ++iter) {
        const auto& grad = current.gradient;
        bool accepted = false;
        std::vector<double> candidate;
        MklObjective::Evaluation next;
        for (double step = ls.initial_step; step >= ls.min_step; step *= ls.shrink) {
            std::vector<double> trial(m);
            for (std::size_t k = 0; k < m; ++k) trial[k] = d[k] - step * grad[k];
            candidate = project_feasible(trial, config.regularizer);

            double descent = 0.0;
            for (std::size_t k = 0; k < m; ++k) descent += grad[k] * (candidate[k] - d[k]);
            next = objective.evaluate(candidate, current.dual.alpha);
            if (next.value <= current.value + ls.armijo * descent) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            model.stalled = true;
            break;
        }
        const double change = current.value - next.value;
        d = std::move(candidate);
        current = std::move(next);
        model.objective_trace.push_back(current.value);
        if (std::abs(change) < config.outer_tol * std::max(1.0, std::abs(current.value))) break;
    }

    model.d = std::move(d);
    model.dual = std::move(current.dual);
    try {
        model.r = compute_r(model);
    } catch (const FitnessError& e) {
        model.r_error = e.what();
    }
    return model;
}

// ---------------------------------------------------------------------------
// Fitness

std::vector<double> kernel_energies(const MklModel& model) {
    const std::size_t n = model.labels.size();
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) beta[i] = model.dual.alpha[i] * model.labels[i];

    const auto grams = build_grams(model.train, model.config.kernel);
    // Sum: beta^T K_m beta. Product: magnitude of beta^T (D_m o K_d) beta.
    auto quad = gradient_quadform(model.d, grams, beta);
    if (grams.family == KernelFamily::ProductRbf)
        for (double& q : quad) q = std::abs(q);
    std::vector<double> h(model.d.size());
    for (std::size_t m = 0; m < h.size(); ++m) {
        const double w_norm = model.d[m] * std::sqrt(std::max(0.0, quad[m]));
        h[m] = model.d[m] * w_norm;
    }
    return h;
}

double fitness_r(std::span<const double> energies, double bias) {
    if (!(std::abs(bias) >= 1e-12)) throw FitnessError("R undefined: bias is zero");
    double linear = 0.0;
    double powered = 0.0;
    for (double h : energies) {
        linear += h;
        powered += h * std::sqrt(h);
    }
    if (!(linear + powered >= 1e-15)) throw FitnessError("R undefined: all kernel energies vanish");
    return std::abs((linear - powered) / (linear + powered) / bias);
}

double compute_r(const MklModel& model) { return fitness_r(kernel_energies(model), model.dual.b); }

// ---------------------------------------------------------------------------
// Prediction

double decision_value(const MklModel& model, std::span<const double> raw_sample) {
    const auto x = model.scaler.apply(raw_sample);
    const auto row = combine_row(model.d, model.config.kernel, model.train, x);
    return decision(model.dual, model.labels, row);
}

int predict(const MklModel& model, const FeatureVector& sample) {
    const double x[2] = {sample.sfv, sample.cdf};
    const double f = decision_value(model, x);
    if (f > 0.0) return kNormal;
    if (f < 0.0) return kAttack;
    return model.config.tie_label;
}

std::vector<int> predict(const MklModel& model, std::span<const FeatureVector> samples) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(predict(model, s));
    return out;
}

// ---------------------------------------------------------------------------
// Selection

std::vector<MklConfig> default_candidates(const MklConfig& base) {
    std::vector<MklConfig> out;
    for (auto reg : {Regularizer::L1, Regularizer::L2}) {
        for (auto family : {KernelFamily::ProductRbf, KernelFamily::SumRbf}) {
            MklConfig c = base;
            c.kernel.family = family;
            c.regularizer = reg;
            out.push_back(c);
        }
    }
    return out;
}

SelectionResult select_model(std::span<const FeatureVector> train_set, std::span<const FeatureVector> holdout,
                             std::span<const MklConfig> candidates, bool parallel) {
    if (candidates.empty()) throw std::invalid_argument("select_model needs at least one candidate");
    const auto eval_set = holdout.empty() ? train_set : holdout;
    const auto truth = feature_labels(eval_set);

    auto run = [&](const MklConfig& config) -> std::pair<std::optional<MklModel>, std::string> {
        try {
            return {train(train_set, config), {}};
        } catch (const std::exception& e) {
            return {std::nullopt, e.what()};
        }
    };

    std::vector<std::pair<std::optional<MklModel>, std::string>> outcomes;
    if (parallel && candidates.size() > 1) {
        std::vector<std::future<std::pair<std::optional<MklModel>, std::string>>> jobs;
        for (const auto& c : candidates) jobs.push_back(std::async(std::launch::async, run, std::cref(c)));
        for (auto& j : jobs) outcomes.push_back(j.get());
    } else {
        for (const auto& c : candidates) outcomes.push_back(run(c));
    }

    SelectionResult result;
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        SelectionRow row;
        row.family = candidates[k].kernel.family;
        row.regularizer = candidates[k].regularizer;
        auto& [model, error] = outcomes[k];
        if (model) {
            row.r = model->r;
            if (!model->r) row.note = model->r_error;
            const auto predicted = predict(*model, eval_set);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
            row.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
        } else {
            row.note = error;
        }
        if (candidates.size() == 1 && model) {
            best = k;
        } else if (row.r && (!best || *row.r < *result.report[*best].r)) {
            best = k;
        }
        result.report.push_back(row);
        result.models.push_back(std::move(model));
    }
    if (!best) {
        std::string reasons;
        for (const auto& row : result.report) reasons += "\n  " + row.note;
        throw DataError("every candidate configuration is degenerate:" + reasons);
    }
    result.best = *best;
    return result;
}

void write_selection_csv(std::ostream& out, std::span<const SelectionRow> report, int group) {
    out << "group,kernel_family,regularizer,R,accuracy\n";
    for (const auto& row : report) {
        out << group << ',' << to_string(row.family) << ',' << to_string(row.regularizer) << ',';
        if (row.r) out << text::format_double(*row.r);
        out << ',';
        if (row.accuracy) out << text::format_double(*row.accuracy);
        out << '\n';
        ++group;
    }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::string_view kModelMagic = "rgmkl-model";
constexpr int kModelVersion = 1;

std::string join(std::span<const double> values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ' ';
        s += text::format_double(values[i]);
    }
    return s;
}

class ModelReader {
public:
    explicit ModelReader(std::istream& in) : in_(in) {}

    std::vector<std::string_view> expect(std::string_view key, std::size_t min_values = 1) {
        while (std::getline(in_, line_)) {
            ++line_no_;
            auto t = text::trim(line_);
            if (t.empty() || t.front() == '#') continue;
            tokens_.clear();
            for (auto tok : text::split(t, ' '))
                if (!tok.empty()) tokens_.push_back(tok);
            if (tokens_.front() != key) fail("expected key '" + std::string(key) + "'");
            if (tokens_.size() < min_values + 1) fail("too few values for '" + std::string(key) + "'");
            return {tokens_.begin() + 1, tokens_.end()};
        }
        fail("unexpected end of file, expected '" + std::string(key) + "'");
    }

    double number(std::string_view tok) {
        auto v = text::parse_double(tok);
        if (!v || !std::isfinite(*v)) fail("bad number '" + std::string(tok) + "'");
        return *v;
    }

    long long integer(std::string_view tok) {
        auto v = text::parse_int(tok);
        if (!v) fail("bad integer '" + std::string(tok) + "'");
        return *v;
    }

    std::vector<double> numbers(std::string_view key) {
        std::vector<double> out;
        for (auto tok : expect(key)) out.push_back(number(tok));
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError("model file line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& in_;
    std::string line_;
    std::vector<std::string_view> tokens_;
    std::size_t line_no_ = 0;
};

}  // namespace

void save_model(std::ostream& out, const MklModel& model) {
    const auto& c = model.config;
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "family " << to_string(c.kernel.family) << '\n';
    out << "regularizer " << to_string(c.regularizer) << '\n';
    out << "sigma " << text::format_double(c.sigma) << '\n';
    out << "C " << text::format_double(c.C) << '\n';
    out << "svm_tol " << text::format_double(c.svm_tol) << '\n';
    out << "outer_max_iter " << c.outer_max_iter << '\n';
    out << "outer_tol " << text::format_double(c.outer_tol) << '\n';
    out << "line_search " << text::format_double(c.line_search.initial_step) << ' '
        << text::format_double(c.line_search.shrink) << ' ' << text::format_double(c.line_search.armijo) << ' '
        << text::format_double(c.line_search.min_step) << '\n';
    out << "tie_label " << c.tie_label << '\n';
    out << "feature_dim " << c.kernel.feature_dim << '\n';
    out << "terms " << c.kernel.terms.size() << '\n';
    for (const auto& t : c.kernel.terms) out << "term " << t.feature << ' ' << text::format_double(t.gamma) << '\n';
    out << "mean " << join(model.scaler.mean) << '\n';
    out << "stddev " << join(model.scaler.stddev) << '\n';
    out << "weights " << join(model.d) << '\n';
    out << "bias " << text::format_double(model.dual.b) << '\n';
    out << "dual_objective " << text::format_double(model.dual.objective) << '\n';
    out << "R " << (model.r ? text::format_double(*model.r) : std::string("undefined")) << '\n';
    out << "stalled " << (model.stalled ? 1 : 0) << '\n';
    out << "trace " << model.objective_trace.size();
    for (double v : model.objective_trace) out << ' ' << text::format_double(v);
    out << '\n';
    out << "samples " << model.labels.size() << '\n';
    for (std::size_t i = 0; i < model.labels.size(); ++i) {
        out << "sample " << model.labels[i] << ' ' << text::format_double(model.dual.alpha[i]);
        for (double v : model.train.row(i)) out << ' ' << text::format_double(v);
        out << '\n';
    }
}

void save_model(const std::string& path, const MklModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    save_model(out, model);
}

MklModel load_model(std::istream& in) {
    ModelReader r(in);
    MklModel model;
    auto& c = model.config;

    auto header = r.expect(kModelMagic);
    if (r.integer(header[0]) != kModelVersion) r.fail("unsupported model version");
    c.kernel.family = parse_kernel_family(r.expect("family")[0]);
    c.regularizer = parse_regularizer(r.expect("regularizer")[0]);
    c.sigma = r.number(r.expect("sigma")[0]);
    c.C = r.number(r.expect("C")[0]);
    c.svm_tol = r.number(r.expect("svm_tol")[0]);
    c.outer_max_iter = static_cast<std::size_t>(r.integer(r.expect("outer_max_iter")[0]));
    c.outer_tol = r.number(r.expect("outer_tol")[0]);
    auto ls = r.numbers("line_search");
    if (ls.size() != 4) r.fail("line_search needs four values");
    c.line_search = {ls[0], ls[1], ls[2], ls[3]};
    c.tie_label = static_cast<int>(r.integer(r.expect("tie_label")[0]));
    c.kernel.feature_dim = static_cast<std::size_t>(r.integer(r.expect("feature_dim")[0]));
    const auto term_count = r.integer(r.expect("terms")[0]);
    if (term_count < 1) r.fail("model needs at least one kernel term");
    c.kernel.terms.clear();
    for (long long k = 0; k < term_count; ++k) {
        auto t = r.expect("term", 2);
        c.kernel.terms.push_back({static_cast<int>(r.integer(t[0])), r.number(t[1])});
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        r.fail(e.what());
    }

    const std::size_t dim = c.kernel.feature_dim;
    model.scaler.mean = r.numbers("mean");
    model.scaler.stddev = r.numbers("stddev");
    if (model.scaler.mean.size() != dim || model.scaler.stddev.size() != dim) r.fail("standardizer dimension mismatch");
    model.d = r.numbers("weights");
    if (model.d.size() != c.kernel.size()) r.fail("weight count does not match kernel terms");
    model.dual.b = r.number(r.expect("bias")[0]);
    model.dual.objective = r.number(r.expect("dual_objective")[0]);
    auto rtok = r.expect("R")[0];
    if (rtok != "undefined") model.r = r.number(rtok);
    model.stalled = r.integer(r.expect("stalled")[0]) != 0;
    auto trace = r.expect("trace");
    const auto trace_len = r.integer(trace[0]);
    if (trace_len < 0 || static_cast<std::size_t>(trace_len) + 1 != trace.size()) r.fail("trace length mismatch");
    for (std::size_t k = 1; k < trace.size(); ++k) model.objective_trace.push_back(r.number(trace[k]));

    const auto n = r.integer(r.expect("samples")[0]);
    if (n < 2) r.fail("model needs at least two training samples");
    model.train = Matrix(static_cast<std::size_t>(n), dim);
    model.dual.alpha.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        auto s = r.expect("sample", 2 + dim);
        const auto label = r.integer(s[0]);
        if (label != kNormal && label != kAttack) r.fail("sample label must be +1 or -1");
        model.labels.push_back(static_cast<int>(label));
        model.dual.alpha[i] = r.number(s[1]);
        for (std::size_t k = 0; k < dim; ++k) model.train(i, k) = r.number(s[2 + k]);
        if (model.dual.alpha[i] > 0.0) model.dual.support_indices.push_back(i);
    }
    return model;
}

MklModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return load_model(in);
}

}  // namespace rgmkl
