// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_TRAINER_HPP
#define EQLSR_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqlsr/autodiff.hpp"
#include "eqlsr/dataset.hpp"
#include "eqlsr/lossfn.hpp"
#include "eqlsr/netgraph.hpp"
#include "eqlsr/priors.hpp"

namespace eqlsr {

struct StageSchedule {
    std::size_t n_init { 2000 };
    std::size_t n_e { 20 };
    std::size_t n_f { 980 };
    std::size_t epochs { 87 };
    std::size_t n_final { 1000 };

    [[nodiscard]] auto total() const noexcept -> std::size_t { return n_init + epochs * (n_e + n_f) + n_final; }
    // 1000 + 8 * (20 + 980) + 1000 = 10000 iterations.
    [[nodiscard]] static auto scaled() -> StageSchedule { return { 1000, 20, 980, 8, 1000 }; }
};

enum class Selection { ConstraintBased, ExtrapolationBased };
enum class EpochMode { EpochWise, SingleEpoch };

// Four-letter variant code: weighting (A|S), selection (C|E), constraints
// (Y|N), learning (E|S). "ACYE" is the reference configuration.
struct VariantConfig {
    WeightingMode weighting { WeightingMode::Adaptive };
    Selection selection { Selection::ConstraintBased };
    bool use_constraints { true };
    EpochMode epochs { EpochMode::EpochWise };

    // Throws ConfigError. Disabling constraints forces extrapolation-based selection.
    [[nodiscard]] static auto parse(std::string const& code) -> VariantConfig;
    [[nodiscard]] auto code() const -> std::string;
};

// The schedule actually executed: single-epoch variants run one epoch whose
// focus phase absorbs the iterations of the others.
[[nodiscard]] auto effective_schedule(StageSchedule const& s, VariantConfig const& v) -> StageSchedule;

struct TrainerConfig {
    StageSchedule schedule;
    VariantConfig variant;
    LossConfig loss;
    AdamConfig adam;
    double active_threshold { 1e-4 };
    double division_guard { 1e-4 };
    double epsilon { 0.5 };
    std::size_t history_k { 10 };
    bool reset_adam { true };
};

struct Complexity {
    std::size_t links { 0 };
    std::size_t units { 0 };

    friend auto operator<=>(Complexity const&, Complexity const&) = default;
};

struct ModelSnapshot {
    std::vector<double> weights; // inactive weights zeroed
    Complexity complexity;
    double valid_rmse { 0.0 };
    std::vector<double> rho_s;
    std::vector<double> rho_c;
    std::optional<double> ext_rmse;
    std::size_t iteration { 0 };
};

[[nodiscard]] auto snapshot_to_json(ModelSnapshot const& s) -> nlohmann::json;
[[nodiscard]] auto snapshot_from_json(nlohmann::json const& doc) -> ModelSnapshot;

// Lower complexity wins; at equal complexity every rho^s, rho^c and the
// validation RMSE must be no worse.
[[nodiscard]] auto select_accept(ModelSnapshot const& candidate, ModelSnapshot const& incumbent) -> bool;
// Complexity first, then extrapolation-validation RMSE. Throws DataError without it.
[[nodiscard]] auto select_accept_ext(ModelSnapshot const& candidate, ModelSnapshot const& incumbent) -> bool;
[[nodiscard]] auto epoch_accept(ModelSnapshot const& candidate, ModelSnapshot const& m_star, double theta_v) -> bool;
// (1 + epsilon) * mean validation RMSE of the snapshots.
[[nodiscard]] auto theta_v(std::deque<ModelSnapshot> const& history, double epsilon) -> double;
[[nodiscard]] auto is_nontrivial(Complexity const& c) noexcept -> bool;

// Computes snapshot metrics for a network whose inactive weights are already zero.
class SnapshotMeter {
public:
    SnapshotMeter(Dataset const& train, Dataset const& valid, ConstraintSet const& constraints, Dataset const* extrap_valid,
        LossConfig const& loss, double active_threshold);

    [[nodiscard]] auto measure(Network const& masked, ActivityReport const& report, std::size_t iteration) -> ModelSnapshot;
    // Same, reading a pass `objective` already made over `masked`.
    [[nodiscard]] auto measure_evaluated(Objective const& objective, Network const& masked, ActivityReport const& report,
        std::size_t iteration) const -> ModelSnapshot;

private:
    Objective objective_;
    Dataset const* extrap_valid_;
    double active_threshold_;
    double singularity_threshold_;
};

enum class Phase { InitL1, InitL2, Explore, Focus, Final };
[[nodiscard]] auto to_string(Phase p) -> std::string;

struct TrainingData {
    Dataset const* train { nullptr };
    Dataset const* valid { nullptr };
    Dataset const* extrap_valid { nullptr }; // required by extrapolation-based selection
    ConstraintSet const* constraints { nullptr };
};

struct RunResult {
    ModelSnapshot model_star;
    ModelSnapshot m_star;
    std::vector<double> final_weights;
    std::size_t iterations { 0 };
};

// Runs the staged schedule from a freshly initialized network. One JSON line
// per iteration goes to `log` when it is non-null. Throws NumericalError
// carrying the iteration index on non-finite values.
[[nodiscard]] auto run(ArchitectureSpec const& spec, TrainingData const& data, TrainerConfig const& config, std::uint64_t seed,
    std::ostream* log = nullptr) -> RunResult;

} // namespace eqlsr

#endif
