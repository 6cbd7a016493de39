// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eqlsr/errors.hpp"
#include "eqlsr/harness.hpp"

namespace fs = std::filesystem;
using namespace eqlsr;

namespace {

auto env(char const* name) -> std::optional<std::string>
{
    if (auto const* v = std::getenv(name); v != nullptr && *v != '\0') { return std::string(v); }
    return std::nullopt;
}

auto env_seed() -> std::optional<std::uint64_t>
{
    auto const v = env("EQLSR_SEED");
    if (!v) { return std::nullopt; }
    try {
        std::size_t used = 0;
        auto const s = std::stoull(*v, &used);
        if (used != v->size()) { throw std::invalid_argument(*v); }
        return s;
    } catch (std::exception const&) {
        throw ConfigError("EQLSR_SEED: expected a non-negative integer, got '" + *v + "'");
    }
}

auto open_out(std::string const& path, std::ofstream& file) -> std::ostream&
{
    if (path.empty() || path == "-") { return std::cout; }
    file.open(path, std::ios::binary);
    if (!file) { throw DataError("cannot write " + path); }
    return file;
}

int cmd_gen_data(std::string const& problem, std::uint64_t seed, std::string out, std::size_t size, double current, double noise, bool raw)
{
    ProblemParams p;
    p.name = problem;
    p.seed = env_seed().value_or(seed);
    p.size = size;
    p.current = current;
    p.noise = noise;
    p.normalize = !raw;
    out = env("EQLSR_OUT").value_or(out);
    auto const bundle = generate_problem(p);
    write_bundle(bundle, out);
    std::cout << "wrote " << problem << " bundle to " << out << " (train " << bundle.train.size() << ", valid " << bundle.valid.size()
              << ", interp " << bundle.interp.size() << ", extrap " << bundle.extrap.size() << ")\n";
    return 0;
}

int cmd_train(std::string const& config, std::string out)
{
    auto cfg = load_config(config);
    if (auto const s = env_seed()) { cfg.seeds = { *s }; }
    out = env("EQLSR_OUT").value_or(out);
    auto const result = campaign(cfg, fs::path(out));
    for (auto const& r : result.records) {
        if (r.ok) {
            std::cout << "seed " << r.seed << ": " << r.complexity.links << " links, " << r.complexity.units << " units, RMSE_int+ext "
                      << r.metrics.rmse_int_ext << "\n  " << r.expression << '\n';
        } else {
            std::cout << "seed " << r.seed << ": failed: " << r.error << '\n';
        }
    }
    write_report_markdown(std::cout, { result.summary });
    return 0;
}

int cmd_eval(std::string const& model_path, std::string const& bundle_dir)
{
    std::ifstream is(model_path);
    if (!is) { throw DataError("cannot open " + model_path); }
    auto const doc = nlohmann::json::parse(is);
    auto const spec = spec_from_json(doc.at("architecture"));
    auto const snapshot = snapshot_from_json(doc.at("snapshot"));
    auto const guard = doc.value("division_guard", 1e-4);
    auto const bundle = load_bundle(bundle_dir);
    auto const m = evaluate_snapshot(spec, snapshot, bundle, guard);
    std::cout << metrics_to_json(m).dump(2) << '\n';
    return 0;
}

int cmd_report(std::string const& runs, std::string const& format, std::string const& out)
{
    std::vector<fs::path> files;
    if (fs::is_regular_file(runs)) {
        files.push_back(runs);
    } else {
        for (auto const& e : fs::recursive_directory_iterator(runs)) {
            if (e.is_regular_file() && e.path().filename() == "records.jsonl") { files.push_back(e.path()); }
        }
        std::ranges::sort(files);
    }
    if (files.empty()) { throw DataError("no records.jsonl under " + runs); }
    std::vector<RunRecord> records;
    for (auto const& f : files) {
        std::ifstream is(f);
        auto part = read_records(is);
        records.insert(records.end(), part.begin(), part.end());
    }
    std::ofstream file;
    auto& os = open_out(out, file);
    auto const rows = summarize_groups(records);
    if (format == "csv") {
        write_report_csv(os, rows);
    } else {
        write_report_markdown(os, rows);
    }
    return 0;
}

int cmd_trace(std::string const& run, std::string const& out)
{
    std::ifstream is(run);
    if (!is) { throw DataError("cannot open " + run); }
    std::ofstream file;
    write_trace_csv(is, open_out(out, file));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Equation learner with prior knowledge constraints" };
    app.require_subcommand(1);

    std::string problem;
    std::uint64_t seed = 1;
    std::string out = "bundle";
    std::size_t size = 500;
    double current = 1.0;
    double noise = 1e-3;
    bool raw = false;
    auto* gen = app.add_subcommand("gen-data", "Generate a problem's data sets");
    gen->add_option("problem", problem, "resistors | magic | magman | turtlebot")->required();
    gen->add_option("--seed", seed, "Generator seed");
    gen->add_option("--out", out, "Output directory");
    gen->add_option("--size", size, "Resistors sample count (10 or 500)");
    gen->add_option("--current", current, "Magman coil current");
    gen->add_option("--noise", noise, "Turtlebot target noise");
    gen->add_flag("--raw", raw, "Magic: keep forces in newtons");

    std::string config;
    std::string train_out = "runs";
    auto* train = app.add_subcommand("train", "Run a multi-seed training campaign");
    train->add_option("--config", config, "JSON run configuration")->required();
    train->add_option("--out", train_out, "Output directory");

    std::string model;
    std::string bundle_dir;
    auto* eval = app.add_subcommand("eval", "Recompute a saved model's metrics");
    eval->add_option("--model", model, "Model JSON written by train")->required();
    eval->add_option("--bundle", bundle_dir, "Bundle directory")->required();

    std::string runs;
    std::string format = "md";
    std::string report_out;
    auto* report = app.add_subcommand("report", "Summarize run records");
    report->add_option("--runs", runs, "Campaign directory or records file")->required();
    report->add_option("--format", format, "md or csv")->check(CLI::IsMember({ "md", "csv" }));
    report->add_option("--out", report_out, "Output file (default stdout)");

    std::string run_log;
    std::string trace_out;
    auto* trace = app.add_subcommand("trace", "Convert a run log to per-iteration CSV");
    trace->add_option("--run", run_log, "Run log (JSONL)")->required();
    trace->add_option("--out", trace_out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) { return cmd_gen_data(problem, seed, out, size, current, noise, raw); }
        if (*train) { return cmd_train(config, train_out); }
        if (*eval) { return cmd_eval(model, bundle_dir); }
        if (*report) { return cmd_report(runs, format, report_out); }
        if (*trace) { return cmd_trace(run_log, trace_out); }
    } catch (ConfigError const& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
