#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rgmkl/errors.hpp"
#include "rgmkl/eval.hpp"
#include "rgmkl/features.hpp"
#include "rgmkl/flow_model.hpp"
#include "rgmkl/ingest.hpp"
#include "rgmkl/mkl.hpp"
#include "rgmkl/run_config.hpp"
#include "rgmkl/svm.hpp"
#include "rgmkl/text.hpp"
#include "rgmkl/traffic_gen.hpp"

using namespace rgmkl;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kConvergence = 4 };

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    return out;
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
    auto out = open_out(path);
    out << "window,label\n";
    for (std::size_t k = 0; k < labels.size(); ++k) out << k << ',' << labels[k] << '\n';
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "window,label")
        throw DataError(path + ": expected header 'window,label'");
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(text::trim(line), ',');
        const auto window = fields.size() == 2 ? text::parse_int(fields[0]) : std::nullopt;
        const auto label = fields.size() == 2 ? text::parse_int(fields[1]) : std::nullopt;
        if (!window || !label || *window != static_cast<long long>(labels.size()) ||
            (*label != kNormal && *label != kAttack))
            throw DataError(path + ":" + std::to_string(line_no) + ": expected consecutive 'window,label' with label +1 or -1");
        labels.push_back(static_cast<int>(*label));
    }
    return labels;
}

std::vector<FeatureVector> read_labelled(const std::string& path) {
    auto series = read_feature_csv(path);
    for (const auto& fv : series)
        if (!fv.label) throw DataError(path + ": window " + std::to_string(fv.window_index) + " has no label");
    return series;
}

void print_selection(std::ostream& out, const SelectionResult& result) {
    out << "family   regularizer  R            accuracy\n";
    for (std::size_t i = 0; i < result.report.size(); ++i) {
        const auto& row = result.report[i];
        char line[160];
        std::snprintf(line, sizeof line, "%-8s %-12s %-12s %-9s%s\n", std::string(to_string(row.family)).c_str(),
                      std::string(to_string(row.regularizer)).c_str(),
                      row.r ? text::format_fixed(*row.r, 6).c_str() : "undefined",
                      row.accuracy ? text::format_fixed(*row.accuracy, 4).c_str() : "-",
                      i == result.best ? "  <- selected" : (row.note.empty() ? "" : ("  (" + row.note + ")").c_str()));
        out << line;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Windowed flow features and kernel-learning classification for flooding-attack detection"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Plain-text configuration file (key = value); flags override it");
    app.allow_config_extras(false);

    RunConfig rc;
    auto& th = rc.thresholds;
    app.add_option("--seed", rc.seed, "Seed for every random choice (scenarios, splits)");
    app.add_option("--window", th.window, "Window length in seconds")->check(CLI::PositiveNumber);
    app.add_option("--theta1", th.theta1, "ACD port/packet weight, (0,1)");
    app.add_option("--theta2", th.theta2, "Packet/port weight in the half-interaction ratio, [0,1]");
    app.add_option("--theta3", th.theta3, "Per-source packet rate threshold in SDD classes");
    app.add_option("--theta4", th.theta4, "Extra-port rate threshold in SDD classes");
    app.add_option("--theta5", th.theta5, "Half-interaction port rate threshold (IBF)");
    app.add_option("--theta6", th.theta6, "SH packet rate threshold (MFF)");
    app.add_option("--theta7", th.theta7, "SD packet rate threshold (MFF)");
    app.add_option("--theta8", th.theta8, "Half-interaction port rate threshold (MFF)");
    app.add_option("--theta9", th.theta9, "HSD port rate threshold (HIAD)");
    app.add_flag("--literal-packet-weight", th.literal_packet_weight,
                 "Combine packet weights exactly as printed: flag(Wsd)*Wsd + Wsd");
    app.add_option("--gammas", rc.gammas, "RBF bandwidths per feature")->delimiter(',');
    app.add_option("--families", rc.families, "Kernel families to try: product, sum")->delimiter(',');
    app.add_option("--regularizers", rc.regularizers, "Regularizers to try: l1, l2")->delimiter(',');
    app.add_option("--C", rc.C, "SVM cost");
    app.add_option("--sigma", rc.sigma, "L2 penalty strength");
    app.add_option("--svm-tol", rc.svm_tol, "SMO stopping tolerance");
    app.add_option("--outer-max-iter", rc.outer_max_iter, "Kernel-weight iterations");
    app.add_option("--outer-tol", rc.outer_tol, "Stop when the objective changes less than this");
    app.add_option("--tie-label", rc.tie_label, "Label for a zero decision value (+1 or -1)");
    app.add_option("--train-fraction", rc.train_fraction, "Training share of the stratified split");

    auto* simulate = app.add_subcommand("simulate", "Generate a labelled synthetic trace");
    std::string scenario = "early", spec_path, sim_out, sim_labels;
    simulate->add_option("--scenario", scenario, "Preset: early, impulse or intermittent")
        ->check(CLI::IsMember({"early", "impulse", "intermittent"}));
    simulate->add_option("--spec", spec_path, "Scenario file (key = value) instead of a bare preset");
    simulate->add_option("--out", sim_out, "Trace output (.csv, or .pcap)")->required();
    simulate->add_option("--labels", sim_labels, "Per-window label CSV (default: <out>.labels.csv)");

    auto* extract = app.add_subcommand("extract", "Turn a trace into per-window features");
    std::string trace_path, extract_labels, extract_out;
    extract->add_option("--trace", trace_path, "Packet trace (pcap or canonical CSV)")->required();
    extract->add_option("--labels", extract_labels, "Per-window label CSV to attach");
    extract->add_option("--out", extract_out, "Feature CSV output")->required();

    auto* train_cmd = app.add_subcommand("train", "Select a kernel configuration by R and train it");
    std::string train_features, model_out, report_out;
    train_cmd->add_option("--features", train_features, "Labelled feature CSV")->required();
    train_cmd->add_option("--model", model_out, "Model output")->required();
    train_cmd->add_option("--report", report_out, "Selection report CSV");

    auto* detect = app.add_subcommand("detect", "Flag windows with a trained model");
    std::string model_path, detect_features, detect_out;
    detect->add_option("--model", model_path, "Trained model")->required();
    detect->add_option("--features", detect_features, "Feature CSV")->required();
    detect->add_option("--out", detect_out, "Flag CSV output (window,flag); stdout if omitted");

    auto* evaluate = app.add_subcommand("evaluate", "Compare SimpleMKL, single-kernel SVM and R-GMKL");
    std::string eval_features, eval_out;
    evaluate->add_option("--features", eval_features, "Labelled feature CSV")->required();
    evaluate->add_option("--out", eval_out, "Comparison CSV output");

    for (auto* sub : {simulate, extract, train_cmd, detect, evaluate}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        rc.validate();

        if (simulate->parsed()) {
            ScenarioSpec spec;
            if (!spec_path.empty()) {
                spec = parse_scenario_spec(slurp(spec_path));
                if (app.count("--seed") > 0) spec.seed = rc.seed;
                if (app.count("--window") > 0) spec.window = th.window;
            } else {
                spec = ScenarioSpec::preset(parse_scenario_kind(scenario), rc.seed);
                spec.window = th.window;
            }
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            const auto sc = gen_scenario(spec);
            if (ends_with(sim_out, ".pcap"))
                write_pcap(sim_out, sc.packets);
            else
                write_csv(sim_out, sc.packets);
            write_labels(sim_labels.empty() ? sim_out + ".labels.csv" : sim_labels, sc.window_labels);
            std::cerr << sc.packets.size() << " packets, " << sc.window_labels.size() << " windows\n";
        } else if (extract->parsed()) {
            const auto trace = read_trace(trace_path);
            const auto& skipped = trace.source.skipped;
            if (skipped.total() > 0)
                std::cerr << "skipped " << skipped.non_ipv4 << " non-IPv4, " << skipped.non_transport
                          << " non-TCP/UDP, " << skipped.malformed << " malformed records\n";
            std::optional<double> span;
            std::vector<int> labels;
            if (!extract_labels.empty()) {
                labels = read_labels(extract_labels);
                span = static_cast<double>(labels.size()) * th.window;
            }
            auto series = extract_series(partition_windows(trace.packets, th.window, span), th);
            if (!extract_labels.empty()) attach_labels(series, labels);
            write_feature_csv(extract_out, series);
            std::cerr << series.size() << " windows\n";
        } else if (train_cmd->parsed()) {
            const auto samples = read_labelled(train_features);
            const auto s = split(samples, rc.train_fraction, rc.seed);
            const auto candidates = rc.candidates();
            const auto result = select_model(s.train, s.test, candidates);
            print_selection(std::cout, result);
            save_model(model_out, result.best_model());
            if (!report_out.empty()) {
                auto out = open_out(report_out);
                write_selection_csv(out, result.report);
            }
        } else if (detect->parsed()) {
            const auto model = load_model(model_path);
            const auto samples = read_feature_csv(detect_features);
            std::ofstream file;
            if (!detect_out.empty()) file = open_out(detect_out);
            std::ostream& out = detect_out.empty() ? std::cout : file;
            out << "window,flag\n";
            for (const auto& fv : samples) out << fv.window_index << ',' << predict(model, fv) << '\n';
        } else if (evaluate->parsed()) {
            const auto samples = read_labelled(eval_features);
            const auto s = split(samples, rc.train_fraction, rc.seed);
            MethodOptions opts;
            opts.base = rc.base_config();
            opts.seed = rc.seed;
            const auto methods = default_methods(opts);
            const auto results = compare(methods, s.train, s.test);
            write_comparison_table(std::cout, results);
            if (!eval_out.empty()) {
                auto out = open_out(eval_out);
                write_comparison_csv(out, results);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << '\n';
        return kConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}
