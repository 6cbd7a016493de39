// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_LOSSFN_HPP
#define EQLSR_LOSSFN_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eqlsr/autodiff.hpp"
#include "eqlsr/dataset.hpp"
#include "eqlsr/netgraph.hpp"
#include "eqlsr/priors.hpp"

namespace eqlsr {

enum class Stage { L1, L2, L3 };
enum class WeightingMode { Adaptive, Static };

// Desired ratios of L^s, L^c, L^r to L^t.
struct Ratios {
    double s { 0.5 };
    double c { 0.5 };
    double r { 0.5 };
};

struct LossConfig {
    Ratios ratios;
    std::size_t window { 10 };
    WeightingMode mode { WeightingMode::Adaptive };
    double singularity_threshold { 1e-4 };
    double l05_a { 0.01 };
};

// Fixed-capacity FIFO of the most recent values.
class RingBuffer {
public:
    explicit RingBuffer(std::size_t capacity = 10);

    void push(double v);
    [[nodiscard]] auto size() const noexcept -> std::size_t { return count_; }
    [[nodiscard]] auto empty() const noexcept -> bool { return count_ == 0; }
    [[nodiscard]] auto capacity() const noexcept -> std::size_t { return data_.size(); }
    // Mean over present entries; 0 when empty.
    [[nodiscard]] auto mean() const noexcept -> double;
    // Oldest first.
    [[nodiscard]] auto values() const -> std::vector<double>;

private:
    std::vector<double> data_;
    std::size_t head_ { 0 };
    std::size_t count_ { 0 };
};

[[nodiscard]] auto training_rmse(Network const& net, Dataset const& train) -> double;

// max(theta - z, 0) for z != 0, exactly 10 at z == 0.
[[nodiscard]] auto singularity_metric(double theta, double z) noexcept -> double;
// Derivative w.r.t. z: -1 on the active branch, 0 elsewhere (the z == 0 spike is constant).
[[nodiscard]] auto singularity_metric_slope(double theta, double z) noexcept -> double;

// sqrt(sum of metric^2 / (n_units * n_points)) over the critical z values of
// one singularity type. 0 if there are no units or no points.
[[nodiscard]] auto singularity_rho(double theta, std::span<double const> z, std::size_t n_units, std::size_t n_points) -> double;

// |w|^(1/2) outside (-a, a); inside, the square root of the even quartic that
// matches value and slope at |w| = a and is flat at 0.
[[nodiscard]] auto smoothed_l05(double w, double a) noexcept -> double;
[[nodiscard]] auto smoothed_l05_slope(double w, double a) noexcept -> double;
[[nodiscard]] auto regularization_rho(std::span<double const> weights, std::span<std::size_t const> active, double a) -> double;

// Singular units of one kind; `znodes` are their critical (denominator) nodes.
struct SingularitySpec {
    UnitKind kind { UnitKind::Divide };
    double threshold { 1e-4 };
    std::vector<std::size_t> znodes;
};

// One spec per singular unit kind present in the architecture. With
// `unit_active`, only active units are members (a kind stays listed, possibly empty).
[[nodiscard]] auto singularity_specs(Network const& net, double threshold, std::vector<bool> const* unit_active = nullptr)
    -> std::vector<SingularitySpec>;

struct LossTerms {
    std::optional<double> t;
    std::optional<double> s;
    std::optional<double> c;
    std::optional<double> r;
};

// Caps each secondary term at ratio * L^t.
[[nodiscard]] auto clamp_terms(LossTerms terms, Ratios const& ratios) -> LossTerms;
// L1 = t + s, L2 = L1 + c, L3 = L2 + r. Throws std::logic_error on a missing term.
[[nodiscard]] auto compose(Stage stage, LossTerms const& terms) -> double;

// Term-weighting state: history windows and alpha, beta, gamma.
class LossState {
public:
    enum class Coefficient { Alpha, Beta, Gamma };

    LossState(LossConfig config, std::size_t n_singularity_types, std::size_t n_constraints);

    [[nodiscard]] auto config() const noexcept -> LossConfig const& { return config_; }
    [[nodiscard]] auto alpha() const noexcept -> double { return alpha_; }
    [[nodiscard]] auto beta() const noexcept -> double { return beta_; }
    [[nodiscard]] auto gamma() const noexcept -> double { return gamma_; }

    // History scale of a raw term: mean of its window, 1 when empty or zero,
    // always 1 in static mode.
    [[nodiscard]] auto h_s(std::size_t j) const -> double;
    [[nodiscard]] auto h_c(std::size_t j) const -> double;

    // Appends this iteration's values. Normalized entries use h from before the append.
    void record(double l_t, std::span<double const> rho_s, std::span<double const> rho_c, std::optional<double> rho_r);

    // Adaptive update of the selected coefficients; no-op in static mode.
    void adapt(bool update_alpha, bool update_beta, bool update_gamma);

    // Static mode: coefficient = ratio * l_t / denominator (1 if the
    // denominator is 0), frozen thereafter. Throws std::logic_error when called twice.
    void init_static(Coefficient which, double l_t, double denominator);
    [[nodiscard]] auto is_frozen(Coefficient which) const noexcept -> bool;

    [[nodiscard]] auto train_history() const noexcept -> RingBuffer const& { return train_; }
    [[nodiscard]] auto rho_s_history(std::size_t j) const -> RingBuffer const& { return rho_s_.at(j); }
    [[nodiscard]] auto rho_c_history(std::size_t j) const -> RingBuffer const& { return rho_c_.at(j); }
    [[nodiscard]] auto rho_r_history() const noexcept -> RingBuffer const& { return rho_r_; }

private:
    LossConfig config_;
    double alpha_ { 1.0 };
    double beta_ { 1.0 };
    double gamma_ { 1.0 };
    bool frozen_[3] { false, false, false };
    RingBuffer train_;
    std::vector<RingBuffer> rho_s_;
    std::vector<RingBuffer> rho_s_norm_;
    std::vector<RingBuffer> rho_c_;
    std::vector<RingBuffer> rho_c_norm_;
    RingBuffer rho_r_;
};

struct RawTerms {
    double l_t { 0.0 };
    std::vector<double> rho_s;
    std::vector<double> rho_c;
    double rho_r { 0.0 };
};

// Coefficients, history scales and clamp factors held fixed while the loss
// and its gradient are evaluated. Clamping enters as a constant factor on the
// clamped term, so its gradient is scaled rather than cut.
struct WeightingContext {
    double alpha { 1.0 };
    double beta { 1.0 };
    double gamma { 1.0 };
    std::vector<double> h_s;
    std::vector<double> h_c;
    double scale_s { 1.0 };
    double scale_c { 1.0 };
    double scale_r { 1.0 };
};

// Loss over a fixed point set: D_t rows (with targets), then extra input-only
// points (D_v inputs), then every constraint sample point.
class Objective {
public:
    Objective(Dataset const& train, Dataset const& valid, ConstraintSet const& constraints, LossConfig config);

    [[nodiscard]] auto num_points() const noexcept -> std::size_t { return points_.size(); }
    [[nodiscard]] auto config() const noexcept -> LossConfig const& { return config_; }

    // Forward pass of `net` over every point; later calls read these caches.
    void evaluate(Network const& net);

    // Raw terms on the cached pass. `reg_weights` selects the weights summed in rho^r.
    [[nodiscard]] auto raw_terms(Network const& net, std::span<SingularitySpec const> sing,
        std::span<std::size_t const> reg_weights) const -> RawTerms;
    [[nodiscard]] auto valid_rmse() const -> double;

    // Freezes the state's coefficients and scales, then derives clamp factors from `raw`.
    [[nodiscard]] auto context(LossState const& state, RawTerms const& raw, Stage stage) const -> WeightingContext;
    [[nodiscard]] auto weighted_terms(RawTerms const& raw, WeightingContext const& ctx, Stage stage) const -> LossTerms;

    // Stage loss value and gradient on the cached pass under a frozen context.
    [[nodiscard]] auto value(Network const& net, WeightingContext const& ctx, Stage stage, std::span<SingularitySpec const> sing,
        std::span<std::size_t const> reg_weights) const -> double;
    void gradient(Network const& net, WeightingContext const& ctx, Stage stage, std::span<SingularitySpec const> sing,
        std::span<std::size_t const> reg_weights, std::span<double> grad);

    // Encodes every piecewise branch taken on the cached pass (division
    // guards, metric branches, residual kinks, L0.5 branch). Equal signatures
    // at two weight vectors mean the loss is smooth between them along a line.
    [[nodiscard]] auto branch_signature(Network const& net, std::span<SingularitySpec const> sing,
        std::span<std::size_t const> reg_weights) const -> std::vector<std::int8_t>;

private:
    struct ConstraintPoints {
        std::size_t constraint;
        std::size_t sample;
        std::size_t first_point;
        std::size_t n_points;
    };

    [[nodiscard]] auto constraint_values(ConstraintPoints const& cp) const -> std::array<double, 3>;

    Dataset const* train_;
    ConstraintSet const* constraints_;
    LossConfig config_;
    std::vector<std::vector<double>> points_;
    std::size_t n_train_ { 0 };
    std::size_t n_valid_ { 0 };
    std::vector<double> valid_targets_;
    std::vector<ConstraintPoints> cpoints_;
    std::vector<ForwardCache> caches_;
    BackwardPass backward_;
};

} // namespace eqlsr

#endif
