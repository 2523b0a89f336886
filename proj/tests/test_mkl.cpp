#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rgmkl/errors.hpp"
#include "rgmkl/mkl.hpp"

using namespace rgmkl;
using doctest::Approx;

namespace {

std::vector<FeatureVector> to_features(const oracle::LabelledSamples& s) {
    std::vector<FeatureVector> out(s.y.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].window_index = i;
        out[i].sfv = s.x(i, 0);
        out[i].cdf = s.x(i, 1);
        out[i].label = s.y[i];
    }
    return out;
}

MklConfig small_config(KernelFamily family, Regularizer reg) {
    MklConfig c;
    const double gammas[] = {0.5, 2.0};
    c.kernel = KernelConfig::per_feature_grid(family, 2, gammas);
    c.regularizer = reg;
    c.C = 5.0;
    return c;
}

}  // namespace

TEST_CASE("project_feasible examples") {
    CHECK(project_feasible(std::vector<double>{0.5, 0.5}, Regularizer::L1) == std::vector<double>{0.5, 0.5});
    const auto p = project_feasible(std::vector<double>{1.0, 1.0}, Regularizer::L1);
    CHECK(p[0] == Approx(0.5));
    CHECK(p[1] == Approx(0.5));
    CHECK(project_feasible(std::vector<double>{-0.3, 0.7}, Regularizer::L2) == std::vector<double>{0.0, 0.7});
    CHECK(project_feasible(std::vector<double>{-5.0, 3.0, 0.2}, Regularizer::L1) == std::vector<double>{0.0, 1.0, 0.0});
    CHECK_THROWS(project_feasible(std::vector<double>{NAN, 1.0}, Regularizer::L1));
}

TEST_CASE("simplex projection matches the sort-based algorithm and is idempotent") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> z(0.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 12);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(dim(gen)));
        for (auto& x : v) x = z(gen);
        const auto got = project_feasible(v, Regularizer::L1);
        const auto want = oracle::simplex_project_sort(v);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
        CHECK(project_feasible(got, Regularizer::L1) == got);
        const auto l2 = project_feasible(v, Regularizer::L2);
        CHECK(project_feasible(l2, Regularizer::L2) == l2);
    }
}

TEST_CASE("fitness_r") {
    CHECK(fitness_r(std::vector<double>{4.0}, 2.0) == Approx(1.0 / 6.0));
    CHECK(fitness_r(std::vector<double>{1.0, 1.0, 1.0}, 1.0) == 0.0);
    const std::vector<double> h{0.3, 2.0, 0.05};
    CHECK(fitness_r(h, 2.0) == Approx(fitness_r(h, 1.0) / 2.0));
    CHECK(fitness_r(h, -1.0) == Approx(fitness_r(h, 1.0)));
    CHECK_THROWS_AS(fitness_r(h, 0.0), FitnessError);
    CHECK_THROWS_AS(fitness_r(std::vector<double>{0.0, 0.0}, 1.0), FitnessError);
}

TEST_CASE("gradient of J matches central differences with the SVM re-solved") {
    std::mt19937_64 gen(22);
    for (auto family : {KernelFamily::SumRbf, KernelFamily::ProductRbf}) {
        for (auto reg : {Regularizer::L1, Regularizer::L2}) {
            for (int trial = 0; trial < 3; ++trial) {
                const auto data = oracle::random_two_class(gen, 16);
                auto config = small_config(family, reg);
                config.svm_tol = 1e-11;
                const MklObjective objective(build_grams(data.x, config.kernel), data.y, config);
                std::uniform_real_distribution<double> u(0.2, 1.0);
                std::vector<double> d(config.kernel.size());
                for (auto& v : d) v = u(gen);
                const auto g = objective.evaluate(d).gradient;
                const auto fd = oracle::central_differences(objective, d, 1e-4);
                double scale = 0.0, err = 0.0;
                for (std::size_t m = 0; m < d.size(); ++m) {
                    scale = std::max(scale, std::fabs(fd[m]));
                    err = std::max(err, std::fabs(g[m] - fd[m]));
                }
                CHECK(err <= 1e-3 * scale);
            }
        }
    }
}

TEST_CASE("train") {
    std::mt19937_64 gen(23);

    SUBCASE("one base kernel under L1 is a plain SVM") {
        const auto data = oracle::random_two_class(gen, 30);
        MklConfig c;
        c.kernel = KernelConfig{KernelFamily::SumRbf, {{BaseKernel::kAllFeatures, 0.5}}, 2};
        const auto model = train(data.x, data.y, c);
        REQUIRE(model.d.size() == 1);
        CHECK(model.d[0] == 1.0);
        Matrix k(30, 30);
        for (std::size_t i = 0; i < 30; ++i)
            for (std::size_t j = 0; j < 30; ++j) k(i, j) = rbf(model.train.row(i), model.train.row(j), 0.5);
        SolverOptions opts;
        opts.tol = c.svm_tol;
        CHECK(model.dual.objective == Approx(solve_dual(k, data.y, c.C, opts).objective).epsilon(1e-9));
    }

    SUBCASE("separated clusters are fit perfectly, weights stay feasible, J never rises") {
        for (auto family : {KernelFamily::SumRbf, KernelFamily::ProductRbf}) {
            for (auto reg : {Regularizer::L1, Regularizer::L2}) {
                const auto samples = to_features(oracle::random_two_class(gen, 40, 8.0));
                MklConfig c;
                c.kernel.family = family;
                c.regularizer = reg;
                const auto model = train(samples, c);
                const auto predicted = predict(model, samples);
                CHECK(predicted == feature_labels(samples));
                for (double w : model.d) CHECK(w >= 0.0);
                if (reg == Regularizer::L1)
                    CHECK(std::fabs(std::accumulate(model.d.begin(), model.d.end(), 0.0) - 1.0) <= 1e-10);
                for (std::size_t i = 1; i < model.objective_trace.size(); ++i)
                    CHECK(model.objective_trace[i] <= model.objective_trace[i - 1]);
            }
        }
    }

    SUBCASE("free support vectors predict their own label") {
        const auto samples = to_features(oracle::random_two_class(gen, 40, 1.0));
        auto c = small_config(KernelFamily::SumRbf, Regularizer::L1);
        c.svm_tol = 1e-8;
        const auto model = train(samples, c);
        std::size_t checked = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double a = model.dual.alpha[i];
            if (a > 1e-6 && a < c.C - 1e-6) {
                CHECK(predict(model, samples[i]) == *samples[i].label);
                ++checked;
            }
        }
        CHECK(checked > 0);
    }

    SUBCASE("degenerate input") {
        const auto data = oracle::random_two_class(gen, 6);
        std::vector<int> one_positive{1, -1, -1, -1, -1, -1};
        CHECK_THROWS_AS(train(data.x, one_positive, MklConfig{}), DataError);
        MklConfig bad;
        bad.C = -1.0;
        CHECK_THROWS_AS(train(data.x, data.y, bad), std::invalid_argument);
    }
}

TEST_CASE("prediction with a zero dual falls back to the bias sign and tie label") {
    std::mt19937_64 gen(24);
    const auto samples = to_features(oracle::random_two_class(gen, 10));
    auto model = train(samples, small_config(KernelFamily::SumRbf, Regularizer::L1));
    std::fill(model.dual.alpha.begin(), model.dual.alpha.end(), 0.0);
    model.dual.b = 0.25;
    for (const auto& s : samples) CHECK(predict(model, s) == kNormal);
    model.dual.b = 0.0;
    model.config.tie_label = kAttack;
    CHECK(predict(model, samples[0]) == kAttack);
}

TEST_CASE("standardizer") {
    Matrix x(3, 2);
    x(0, 0) = 1;
    x(1, 0) = 2;
    x(2, 0) = 3;
    for (std::size_t r = 0; r < 3; ++r) x(r, 1) = 4.0;
    const auto s = Standardizer::fit(x);
    CHECK(s.mean[0] == Approx(2.0));
    CHECK(s.stddev[0] == Approx(std::sqrt(2.0 / 3.0)));
    CHECK(s.stddev[1] == 1.0);
    const auto z = s.apply(x);
    CHECK(z(1, 0) == Approx(0.0));
    CHECK(z(2, 1) == 0.0);
}

TEST_CASE("select_model") {
    std::mt19937_64 gen(25);
    const auto train_set = to_features(oracle::random_two_class(gen, 40, 2.0));
    const auto holdout = to_features(oracle::random_two_class(gen, 20, 2.0));

    const auto candidates = default_candidates();
    REQUIRE(candidates.size() == 4);
    CHECK(candidates[0].name() == "product/l1");
    CHECK(candidates[1].name() == "sum/l1");
    CHECK(candidates[2].name() == "product/l2");
    CHECK(candidates[3].name() == "sum/l2");

    const auto result = select_model(train_set, holdout, candidates);
    REQUIRE(result.report.size() == 4);
    for (const auto& row : result.report) {
        if (!row.r) continue;
        CHECK(*result.report[result.best].r <= *row.r);
        REQUIRE(row.accuracy.has_value());
        CHECK((*row.accuracy >= 0.0 && *row.accuracy <= 1.0));
    }
    CHECK(result.best_model().config.name() == candidates[result.best].name());

    // Sequential and parallel runs agree.
    const auto sequential = select_model(train_set, holdout, candidates, false);
    CHECK(sequential.best == result.best);
    for (std::size_t k = 0; k < 4; ++k) CHECK(sequential.report[k].r == result.report[k].r);

    std::ostringstream csv;
    write_selection_csv(csv, result.report, 1);
    CHECK(csv.str().rfind("group,kernel_family,regularizer,R,accuracy\n1,product,l1,", 0) == 0);

    const std::vector<MklConfig> single{candidates[3]};
    CHECK(select_model(train_set, holdout, single).best == 0);

    auto broken = candidates;
    for (auto& c : broken) c.kernel.terms.clear();
    CHECK_THROWS_AS(select_model(train_set, holdout, broken), DataError);
}

TEST_CASE("model files round-trip exactly") {
    std::mt19937_64 gen(26);
    const auto samples = to_features(oracle::random_two_class(gen, 30, 1.5));
    for (auto family : {KernelFamily::SumRbf, KernelFamily::ProductRbf}) {
        for (auto reg : {Regularizer::L1, Regularizer::L2}) {
            MklConfig c;
            c.kernel.family = family;
            c.regularizer = reg;
            const auto model = train(samples, c);
            std::stringstream first;
            save_model(first, model);
            const auto loaded = load_model(first);
            std::stringstream second;
            save_model(second, loaded);
            CHECK(first.str() == second.str());
            CHECK(loaded.d == model.d);
            CHECK(loaded.dual.alpha == model.dual.alpha);
            CHECK(loaded.r == model.r);
            for (const auto& s : samples) {
                const double x[2] = {s.sfv + 0.1, s.cdf - 0.2};
                CHECK(decision_value(loaded, x) == decision_value(model, x));
            }
        }
    }
    std::stringstream garbage("not a model\n");
    CHECK_THROWS_AS(load_model(garbage), DataError);
}
