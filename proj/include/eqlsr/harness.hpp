// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_HARNESS_HPP
#define EQLSR_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqlsr/problems.hpp"
#include "eqlsr/trainer.hpp"

namespace eqlsr {

struct RunConfig {
    ProblemParams problem;
    // "default" (the problem's own), "general", "general-arctan", "informed",
    // or "custom" with `custom_architecture` set.
    std::string architecture { "default" };
    std::optional<ArchitectureSpec> custom_architecture;
    TrainerConfig trainer;
    std::vector<std::uint64_t> seeds { 1 };
    std::size_t threads { 0 }; // 0: one per hardware thread
};

// Unknown keys and wrong types raise ConfigError naming the field path.
[[nodiscard]] auto config_from_json(nlohmann::json const& doc) -> RunConfig;
[[nodiscard]] auto config_to_json(RunConfig const& cfg) -> nlohmann::json;
// Parse errors carry the line and column.
[[nodiscard]] auto load_config(std::filesystem::path const& path) -> RunConfig;
[[nodiscard]] auto resolve_architecture(RunConfig const& cfg, ProblemBundle const& bundle) -> ArchitectureSpec;

struct Metrics {
    double rmse_int { 0.0 };
    double rmse_ext { 0.0 };
    double rmse_int_ext { 0.0 };
    std::vector<std::string> constraint_names;
    std::vector<double> rho_c;
    // Closed-loop problems only.
    std::optional<double> rmse_valid;
    std::vector<double> rmse_sim;
    std::optional<double> rmse_sum;
};

[[nodiscard]] auto metrics_to_json(Metrics const& m) -> nlohmann::json;
[[nodiscard]] auto metrics_from_json(nlohmann::json const& doc) -> Metrics;

// Rolls `model` out along `seq` from the recorded initial x position, feeding
// back only the predicted x; every other argument is read from the record.
[[nodiscard]] auto simulation_rmse(ModelEval const& model, Sequence const& seq) -> double;

// Throws DataError if the bundle lacks a required set.
[[nodiscard]] auto evaluate_model(ModelEval const& model, ProblemBundle const& bundle) -> Metrics;
[[nodiscard]] auto evaluate_snapshot(ArchitectureSpec const& spec, ModelSnapshot const& snapshot, ProblemBundle const& bundle,
    double division_guard = 1e-4) -> Metrics;

struct RunRecord {
    std::uint64_t seed { 0 };
    std::string problem;
    std::string variant;
    bool ok { true };
    std::string error;
    std::string expression;
    Complexity complexity;
    bool nontrivial { false };
    Metrics metrics;
    ModelSnapshot snapshot;
    double wall_time { 0.0 }; // seconds; kept out of the JSON form
};

[[nodiscard]] auto record_to_json(RunRecord const& r) -> nlohmann::json;
[[nodiscard]] auto record_from_json(nlohmann::json const& doc) -> RunRecord;
[[nodiscard]] auto read_records(std::istream& is) -> std::vector<RunRecord>;

// Trains one seed and evaluates its model*. Failures are captured in the record.
[[nodiscard]] auto run_single(RunConfig const& cfg, ProblemBundle const& bundle, std::uint64_t seed, std::ostream* log = nullptr)
    -> RunRecord;

struct Summary {
    std::string problem;
    std::string variant;
    std::size_t runs { 0 };
    std::size_t failed { 0 };
    std::size_t n_nt { 0 };
    double links { 0.0 };
    double units { 0.0 };
    double rmse_int { 0.0 };
    double rmse_ext { 0.0 };
    double rmse_int_ext { 0.0 };
    std::optional<double> rmse_valid;
    std::vector<double> rmse_sim;
    std::optional<double> rmse_sum;
};

// Middle value; the mean of the two middle values for even counts. Throws on empty input.
[[nodiscard]] auto median(std::vector<double> values) -> double;
// Medians over the successful records; n_nt counts records with links > 1.
[[nodiscard]] auto summarize(std::vector<RunRecord> const& records) -> Summary;

struct CampaignResult {
    std::vector<RunRecord> records; // in seed-list order
    Summary summary;
};

// Runs every seed (in parallel when threads allow) and, when `out` is set,
// writes bundle/, logs/, models/, records.jsonl, timing.csv, summary.md,
// summary.csv and config.json into it. Throws only when every run fails.
[[nodiscard]] auto campaign(RunConfig const& cfg, std::optional<std::filesystem::path> const& out = std::nullopt) -> CampaignResult;

// Table in the layout of the published comparisons: one row per variant.
void write_report_markdown(std::ostream& os, std::vector<Summary> const& rows);
void write_report_csv(std::ostream& os, std::vector<Summary> const& rows);
// Groups records by (problem, variant) in first-seen order.
[[nodiscard]] auto summarize_groups(std::vector<RunRecord> const& records) -> std::vector<Summary>;

// Per-iteration CSV for plotting loss and complexity traces.
void write_trace_csv(std::istream& log, std::ostream& os);

} // namespace eqlsr

#endif
