// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/lossfn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "eqlsr/errors.hpp"

namespace eqlsr {

RingBuffer::RingBuffer(std::size_t capacity)
    : data_(capacity, 0.0)
{
    if (capacity == 0) {
        throw ConfigError("history window must be positive");
    }
}

void RingBuffer::push(double v)
{
    data_[head_] = v;
    head_ = (head_ + 1) % data_.size();
    count_ = std::min(count_ + 1, data_.size());
}

auto RingBuffer::mean() const noexcept -> double
{
    if (count_ == 0) { return 0.0; }
    double sum = 0.0;
    for (auto v : values()) { sum += v; }
    return sum / static_cast<double>(count_);
}

auto RingBuffer::values() const -> std::vector<double>
{
    std::vector<double> out;
    out.reserve(count_);
    auto const cap = data_.size();
    auto const start = (head_ + cap - count_) % cap;
    for (std::size_t i = 0; i < count_; ++i) {
        out.push_back(data_[(start + i) % cap]);
    }
    return out;
}

auto training_rmse(Network const& net, Dataset const& train) -> double
{
    ForwardCache cache;
    return rmse([&](std::span<double const> x) { return forward(net, x, cache); }, train);
}

auto singularity_metric(double theta, double z) noexcept -> double
{
    if (z == 0.0) { return 10.0; }
    return std::max(theta - z, 0.0);
}

auto singularity_metric_slope(double theta, double z) noexcept -> double
{
    return (z != 0.0 && theta - z > 0.0) ? -1.0 : 0.0;
}

auto singularity_rho(double theta, std::span<double const> z, std::size_t n_units, std::size_t n_points) -> double
{
    if (n_units == 0 || n_points == 0) { return 0.0; }
    double sum = 0.0;
    for (auto v : z) {
        auto const m = singularity_metric(theta, v);
        sum += m * m;
    }
    return std::sqrt(sum / static_cast<double>(n_units * n_points));
}

auto smoothed_l05(double w, double a) noexcept -> double
{
    auto const x = std::abs(w);
    if (x >= a) { return std::sqrt(x); }
    auto const w2 = w * w;
    return std::sqrt(-w2 * w2 / (8.0 * a * a * a) + 3.0 * w2 / (4.0 * a) + 3.0 * a / 8.0);
}

auto smoothed_l05_slope(double w, double a) noexcept -> double
{
    auto const x = std::abs(w);
    if (x >= a) {
        return (w > 0 ? 0.5 : -0.5) / std::sqrt(x);
    }
    auto const w2 = w * w;
    auto const inner = -w2 * w2 / (8.0 * a * a * a) + 3.0 * w2 / (4.0 * a) + 3.0 * a / 8.0;
    auto const d_inner = -w2 * w / (2.0 * a * a * a) + 3.0 * w / (2.0 * a);
    return d_inner / (2.0 * std::sqrt(inner));
}

auto regularization_rho(std::span<double const> weights, std::span<std::size_t const> active, double a) -> double
{
    double sum = 0.0;
    for (auto i : active) { sum += smoothed_l05(weights[i], a); }
    return sum;
}

auto singularity_specs(Network const& net, double threshold, std::vector<bool> const* unit_active) -> std::vector<SingularitySpec>
{
    std::map<UnitKind, SingularitySpec> by_kind;
    auto const& units = net.units();
    for (std::size_t u = 0; u < units.size(); ++u) {
        auto const& slot = units[u];
        if (!has_singularity(slot.kind)) { continue; }
        auto& spec = by_kind[slot.kind];
        spec.kind = slot.kind;
        spec.threshold = threshold;
        bool const member = unit_active == nullptr || u >= unit_active->size() || (*unit_active)[u];
        if (member) {
            spec.znodes.push_back(slot.first_z + 1);
        }
    }
    std::vector<SingularitySpec> out;
    for (auto& [kind, spec] : by_kind) { out.push_back(std::move(spec)); }
    return out;
}

auto clamp_terms(LossTerms terms, Ratios const& ratios) -> LossTerms
{
    if (!terms.t) { return terms; }
    auto const lt = *terms.t;
    auto cap = [lt](std::optional<double>& term, double ratio) {
        if (term) { term = std::min(*term, ratio * lt); }
    };
    cap(terms.s, ratios.s);
    cap(terms.c, ratios.c);
    cap(terms.r, ratios.r);
    return terms;
}

auto compose(Stage stage, LossTerms const& terms) -> double
{
    auto need = [](std::optional<double> const& v, char const* name) {
        if (!v) {
            throw std::logic_error(std::string("loss term ") + name + " missing for this stage");
        }
        return *v;
    };
    auto sum = need(terms.t, "L^t") + need(terms.s, "L^s");
    if (stage == Stage::L1) { return sum; }
    sum += need(terms.c, "L^c");
    if (stage == Stage::L2) { return sum; }
    return sum + need(terms.r, "L^r");
}

LossState::LossState(LossConfig config, std::size_t n_singularity_types, std::size_t n_constraints)
    : config_(config)
    , train_(config.window)
    , rho_s_(n_singularity_types, RingBuffer(config.window))
    , rho_s_norm_(n_singularity_types, RingBuffer(config.window))
    , rho_c_(n_constraints, RingBuffer(config.window))
    , rho_c_norm_(n_constraints, RingBuffer(config.window))
    , rho_r_(config.window)
{
}

namespace {
    auto history_scale(RingBuffer const& buf) -> double
    {
        auto const m = buf.mean();
        return (buf.empty() || m == 0.0) ? 1.0 : m;
    }

    auto ratio_or_one(double numerator, double denominator) -> double
    {
        return denominator == 0.0 ? 1.0 : numerator / denominator;
    }
} // namespace

auto LossState::h_s(std::size_t j) const -> double
{
    return config_.mode == WeightingMode::Static ? 1.0 : history_scale(rho_s_.at(j));
}

auto LossState::h_c(std::size_t j) const -> double
{
    return config_.mode == WeightingMode::Static ? 1.0 : history_scale(rho_c_.at(j));
}

void LossState::record(double l_t, std::span<double const> rho_s, std::span<double const> rho_c, std::optional<double> rho_r)
{
    train_.push(l_t);
    for (std::size_t j = 0; j < rho_s.size() && j < rho_s_.size(); ++j) {
        rho_s_norm_[j].push(rho_s[j] / h_s(j));
        rho_s_[j].push(rho_s[j]);
    }
    for (std::size_t j = 0; j < rho_c.size() && j < rho_c_.size(); ++j) {
        rho_c_norm_[j].push(rho_c[j] / h_c(j));
        rho_c_[j].push(rho_c[j]);
    }
    if (rho_r) { rho_r_.push(*rho_r); }
}

void LossState::adapt(bool update_alpha, bool update_beta, bool update_gamma)
{
    if (config_.mode == WeightingMode::Static || train_.empty()) { return; }
    auto const bt = train_.mean();
    if (update_alpha) {
        double denom = 0.0;
        for (auto const& b : rho_s_norm_) { denom += b.mean(); }
        alpha_ = ratio_or_one(config_.ratios.s * bt, denom);
    }
    if (update_beta) {
        double denom = 0.0;
        for (auto const& b : rho_c_norm_) { denom += b.mean(); }
        beta_ = ratio_or_one(config_.ratios.c * bt, denom);
    }
    if (update_gamma) {
        gamma_ = ratio_or_one(config_.ratios.r * bt, rho_r_.mean());
    }
}

void LossState::init_static(Coefficient which, double l_t, double denominator)
{
    auto const k = static_cast<std::size_t>(which);
    if (frozen_[k]) {
        throw std::logic_error("static weighting coefficient initialized twice");
    }
    frozen_[k] = true;
    switch (which) {
    case Coefficient::Alpha:
        alpha_ = ratio_or_one(config_.ratios.s * l_t, denominator);
        break;
    case Coefficient::Beta:
        beta_ = ratio_or_one(config_.ratios.c * l_t, denominator);
        break;
    case Coefficient::Gamma:
        gamma_ = ratio_or_one(config_.ratios.r * l_t, denominator);
        break;
    }
}

auto LossState::is_frozen(Coefficient which) const noexcept -> bool
{
    return frozen_[static_cast<std::size_t>(which)];
}

Objective::Objective(Dataset const& train, Dataset const& valid, ConstraintSet const& constraints, LossConfig config)
    : train_(&train)
    , constraints_(&constraints)
    , config_(config)
{
    if (train.empty()) {
        throw DataError("training set is empty");
    }
    for (std::size_t i = 0; i < train.size(); ++i) {
        auto x = train.x(i);
        points_.emplace_back(x.begin(), x.end());
    }
    n_train_ = train.size();
    for (std::size_t i = 0; i < valid.size(); ++i) {
        auto x = valid.x(i);
        points_.emplace_back(x.begin(), x.end());
        valid_targets_.push_back(valid.y(i));
    }
    n_valid_ = valid.size();
    for (std::size_t c = 0; c < constraints.size(); ++c) {
        auto const& con = constraints.constraints[c];
        if (con.samples.empty()) {
            throw DataError("constraint '" + con.name + "' has no samples");
        }
        for (std::size_t s = 0; s < con.samples.size(); ++s) {
            auto const& smp = con.samples[s];
            cpoints_.push_back({ c, s, points_.size(), smp.points.size() });
            for (auto const& p : smp.points) { points_.push_back(p); }
        }
    }
    caches_.resize(points_.size());
}

void Objective::evaluate(Network const& net)
{
    for (std::size_t i = 0; i < points_.size(); ++i) {
        forward(net, points_[i], caches_[i]);
    }
}

auto Objective::constraint_values(ConstraintPoints const& cp) const -> std::array<double, 3>
{
    std::array<double, 3> f {};
    for (std::size_t p = 0; p < cp.n_points; ++p) {
        f[p] = caches_[cp.first_point + p].output;
    }
    return f;
}

auto Objective::raw_terms(Network const& net, std::span<SingularitySpec const> sing, std::span<std::size_t const> reg_weights) const
    -> RawTerms
{
    RawTerms raw;
    double sum = 0.0;
    for (std::size_t i = 0; i < n_train_; ++i) {
        auto const r = caches_[i].output - train_->y(i);
        sum += r * r;
    }
    raw.l_t = std::sqrt(sum / static_cast<double>(n_train_));

    for (auto const& spec : sing) {
        double s = 0.0;
        for (auto const& cache : caches_) {
            for (auto zi : spec.znodes) {
                auto const m = singularity_metric(spec.threshold, cache.z[zi]);
                s += m * m;
            }
        }
        auto const denom = static_cast<double>(spec.znodes.size() * caches_.size());
        raw.rho_s.push_back(spec.znodes.empty() ? 0.0 : std::sqrt(s / denom));
    }

    std::vector<double> sq(constraints_->size(), 0.0);
    for (auto const& cp : cpoints_) {
        auto const& con = constraints_->constraints[cp.constraint];
        auto const f = constraint_values(cp);
        auto const e = residual_from_values(con, con.samples[cp.sample], std::span<double const>(f.data(), cp.n_points)).value;
        sq[cp.constraint] += e * e;
    }
    for (std::size_t c = 0; c < sq.size(); ++c) {
        raw.rho_c.push_back(std::sqrt(sq[c] / static_cast<double>(constraints_->constraints[c].samples.size())));
    }

    raw.rho_r = regularization_rho(net.weights(), reg_weights, config_.l05_a);
    return raw;
}

auto Objective::valid_rmse() const -> double
{
    if (n_valid_ == 0) {
        throw DataError("validation set is empty");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n_valid_; ++i) {
        auto const r = caches_[n_train_ + i].output - valid_targets_[i];
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(n_valid_));
}

namespace {
    auto weighted_sum(std::span<double const> rho, std::span<double const> h) -> double
    {
        double s = 0.0;
        for (std::size_t j = 0; j < rho.size(); ++j) { s += rho[j] / h[j]; }
        return s;
    }

    auto clamp_factor(double term, double ratio, double l_t) -> double
    {
        auto const cap = ratio * l_t;
        if (term <= cap) { return 1.0; }
        auto f = cap / term;
        while (f * term > cap) { f = std::nextafter(f, 0.0); }
        return f;
    }
} // namespace

auto Objective::context(LossState const& state, RawTerms const& raw, Stage stage) const -> WeightingContext
{
    WeightingContext ctx;
    ctx.alpha = state.alpha();
    ctx.beta = state.beta();
    ctx.gamma = state.gamma();
    for (std::size_t j = 0; j < raw.rho_s.size(); ++j) { ctx.h_s.push_back(state.h_s(j)); }
    for (std::size_t j = 0; j < raw.rho_c.size(); ++j) { ctx.h_c.push_back(state.h_c(j)); }
    auto const& r = config_.ratios;
    ctx.scale_s = clamp_factor(ctx.alpha * weighted_sum(raw.rho_s, ctx.h_s), r.s, raw.l_t);
    if (stage != Stage::L1) {
        ctx.scale_c = clamp_factor(ctx.beta * weighted_sum(raw.rho_c, ctx.h_c), r.c, raw.l_t);
    }
    if (stage == Stage::L3) {
        ctx.scale_r = clamp_factor(ctx.gamma * raw.rho_r, r.r, raw.l_t);
    }
    return ctx;
}

auto Objective::weighted_terms(RawTerms const& raw, WeightingContext const& ctx, Stage stage) const -> LossTerms
{
    LossTerms t;
    t.t = raw.l_t;
    // Same association as the clamp factor so the cap holds bit-exactly.
    t.s = ctx.scale_s * (ctx.alpha * weighted_sum(raw.rho_s, ctx.h_s));
    if (stage != Stage::L1) {
        t.c = ctx.scale_c * (ctx.beta * weighted_sum(raw.rho_c, ctx.h_c));
    }
    if (stage == Stage::L3) {
        t.r = ctx.scale_r * (ctx.gamma * raw.rho_r);
    }
    return t;
}

auto Objective::value(Network const& net, WeightingContext const& ctx, Stage stage, std::span<SingularitySpec const> sing,
    std::span<std::size_t const> reg_weights) const -> double
{
    return compose(stage, weighted_terms(raw_terms(net, sing, reg_weights), ctx, stage));
}

void Objective::gradient(Network const& net, WeightingContext const& ctx, Stage stage, std::span<SingularitySpec const> sing,
    std::span<std::size_t const> reg_weights, std::span<double> grad)
{
    auto const raw = raw_terms(net, sing, reg_weights);
    std::vector<double> out_adj(points_.size(), 0.0);

    if (raw.l_t > 0.0) {
        auto const k = 1.0 / (static_cast<double>(n_train_) * raw.l_t);
        for (std::size_t i = 0; i < n_train_; ++i) {
            out_adj[i] = k * (caches_[i].output - train_->y(i));
        }
    }

    if (stage != Stage::L1) {
        for (auto const& cp : cpoints_) {
            auto const c = cp.constraint;
            auto const rho = raw.rho_c[c];
            if (rho == 0.0) { continue; }
            auto const& con = constraints_->constraints[c];
            auto const f = constraint_values(cp);
            auto const rp = residual_from_values(con, con.samples[cp.sample], std::span<double const>(f.data(), cp.n_points));
            auto const k = ctx.scale_c * ctx.beta / ctx.h_c[c] * rp.value / (static_cast<double>(con.samples.size()) * rho);
            for (std::size_t p = 0; p < cp.n_points; ++p) {
                out_adj[cp.first_point + p] += k * rp.d_values[p];
            }
        }
    }

    // Per-node seeds for the singularity term; one coefficient per type.
    std::vector<double> z_coef(net.znodes().size(), 0.0);
    std::vector<double> z_theta(net.znodes().size(), 0.0);
    bool any_sing = false;
    for (std::size_t j = 0; j < sing.size(); ++j) {
        auto const& spec = sing[j];
        if (raw.rho_s[j] == 0.0) { continue; }
        auto const k = ctx.scale_s * ctx.alpha / ctx.h_s[j]
            / (static_cast<double>(spec.znodes.size() * caches_.size()) * raw.rho_s[j]);
        for (auto zi : spec.znodes) {
            z_coef[zi] += k;
            z_theta[zi] = spec.threshold;
            any_sing = true;
        }
    }

    std::vector<double> z_adj;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        auto const& cache = caches_[i];
        bool seeded = false;
        if (any_sing) {
            z_adj.assign(z_coef.size(), 0.0);
            for (std::size_t zi = 0; zi < z_coef.size(); ++zi) {
                if (z_coef[zi] == 0.0) { continue; }
                auto const z = cache.z[zi];
                auto const slope = singularity_metric_slope(z_theta[zi], z);
                if (slope == 0.0) { continue; }
                z_adj[zi] = z_coef[zi] * singularity_metric(z_theta[zi], z) * slope;
                seeded = true;
            }
        }
        if (out_adj[i] == 0.0 && !seeded) { continue; }
        backward_.accumulate(net, cache, out_adj[i], seeded ? std::span<double const>(z_adj) : std::span<double const>(), grad);
    }

    if (stage == Stage::L3) {
        auto const k = ctx.scale_r * ctx.gamma;
        auto const w = net.weights();
        for (auto i : reg_weights) {
            grad[i] += k * smoothed_l05_slope(w[i], config_.l05_a);
        }
    }
}

auto Objective::branch_signature(Network const& net, std::span<SingularitySpec const> sing,
    std::span<std::size_t const> reg_weights) const -> std::vector<std::int8_t>
{
    std::vector<std::int8_t> sig;
    auto const guard = net.division_guard();
    auto const theta = sing.empty() ? config_.singularity_threshold : sing.front().threshold;
    for (auto const& cache : caches_) {
        for (auto zi : net.singular_znodes()) {
            auto const z = cache.z[zi];
            sig.push_back(static_cast<std::int8_t>((z > guard ? 1 : 0) | (z == 0.0 ? 2 : 0) | (theta - z > 0.0 ? 4 : 0)));
        }
    }
    for (auto const& cp : cpoints_) {
        auto const& con = constraints_->constraints[cp.constraint];
        auto const f = constraint_values(cp);
        auto const rp = residual_from_values(con, con.samples[cp.sample], std::span<double const>(f.data(), cp.n_points));
        for (auto d : rp.d_values) { sig.push_back(static_cast<std::int8_t>(std::lround(d))); }
    }
    auto const w = net.weights();
    for (auto i : reg_weights) {
        sig.push_back(static_cast<std::int8_t>(std::abs(w[i]) < config_.l05_a ? 1 : 0));
    }
    return sig;
}

} // namespace eqlsr
