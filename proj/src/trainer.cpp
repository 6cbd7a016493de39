// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "eqlsr/errors.hpp"

namespace eqlsr {

auto VariantConfig::parse(std::string const& code) -> VariantConfig
{
    if (code.size() != 4) {
        throw ConfigError("variant: expected four letters such as ACYE, got '" + code + "'");
    }
    VariantConfig v;
    auto pick = [&code](std::size_t i, char a, char b, char const* what) {
        if (code[i] == a) { return true; }
        if (code[i] == b) { return false; }
        throw ConfigError(std::string("variant: position ") + std::to_string(i + 1) + " (" + what + ") must be " + a + " or " + b);
    };
    v.weighting = pick(0, 'A', 'S', "weighting") ? WeightingMode::Adaptive : WeightingMode::Static;
    v.selection = pick(1, 'C', 'E', "selection") ? Selection::ConstraintBased : Selection::ExtrapolationBased;
    v.use_constraints = pick(2, 'Y', 'N', "constraints");
    v.epochs = pick(3, 'E', 'S', "learning") ? EpochMode::EpochWise : EpochMode::SingleEpoch;
    if (!v.use_constraints) { v.selection = Selection::ExtrapolationBased; }
    return v;
}

auto VariantConfig::code() const -> std::string
{
    std::string s;
    s += weighting == WeightingMode::Adaptive ? 'A' : 'S';
    s += selection == Selection::ConstraintBased ? 'C' : 'E';
    s += use_constraints ? 'Y' : 'N';
    s += epochs == EpochMode::EpochWise ? 'E' : 'S';
    return s;
}

auto effective_schedule(StageSchedule const& s, VariantConfig const& v) -> StageSchedule
{
    if (v.epochs == EpochMode::EpochWise || s.epochs == 0) { return s; }
    auto out = s;
    out.epochs = 1;
    out.n_f = s.epochs * (s.n_e + s.n_f) - s.n_e;
    return out;
}

auto snapshot_to_json(ModelSnapshot const& s) -> nlohmann::json
{
    nlohmann::json doc { { "weights", s.weights }, { "links", s.complexity.links }, { "units", s.complexity.units },
        { "valid_rmse", s.valid_rmse }, { "rho_s", s.rho_s }, { "rho_c", s.rho_c }, { "iteration", s.iteration } };
    if (s.ext_rmse) { doc["ext_rmse"] = *s.ext_rmse; }
    return doc;
}

auto snapshot_from_json(nlohmann::json const& doc) -> ModelSnapshot
{
    ModelSnapshot s;
    try {
        s.weights = doc.at("weights").get<std::vector<double>>();
        s.complexity = { doc.at("links").get<std::size_t>(), doc.at("units").get<std::size_t>() };
        s.valid_rmse = doc.at("valid_rmse").get<double>();
        s.rho_s = doc.at("rho_s").get<std::vector<double>>();
        s.rho_c = doc.at("rho_c").get<std::vector<double>>();
        s.iteration = doc.at("iteration").get<std::size_t>();
        if (doc.contains("ext_rmse")) { s.ext_rmse = doc.at("ext_rmse").get<double>(); }
    } catch (nlohmann::json::exception const& e) {
        throw DataError(std::string("malformed snapshot: ") + e.what());
    }
    return s;
}

namespace {
    auto all_no_worse(std::vector<double> const& a, std::vector<double> const& b) -> bool
    {
        for (std::size_t j = 0; j < a.size() && j < b.size(); ++j) {
            if (!(a[j] <= b[j])) { return false; }
        }
        return true;
    }
} // namespace

auto select_accept(ModelSnapshot const& candidate, ModelSnapshot const& incumbent) -> bool
{
    if (candidate.complexity < incumbent.complexity) { return true; }
    if (candidate.complexity != incumbent.complexity) { return false; }
    return all_no_worse(candidate.rho_s, incumbent.rho_s) && all_no_worse(candidate.rho_c, incumbent.rho_c)
        && candidate.valid_rmse <= incumbent.valid_rmse;
}

auto select_accept_ext(ModelSnapshot const& candidate, ModelSnapshot const& incumbent) -> bool
{
    if (!candidate.ext_rmse || !incumbent.ext_rmse) {
        throw DataError("extrapolation-based selection needs the extrapolation validation set");
    }
    if (candidate.complexity < incumbent.complexity) { return true; }
    if (candidate.complexity != incumbent.complexity) { return false; }
    return *candidate.ext_rmse <= *incumbent.ext_rmse;
}

auto epoch_accept(ModelSnapshot const& candidate, ModelSnapshot const& m_star, double theta) -> bool
{
    return candidate.complexity <= m_star.complexity && candidate.valid_rmse <= theta;
}

auto theta_v(std::deque<ModelSnapshot> const& history, double epsilon) -> double
{
    if (history.empty()) { return std::numeric_limits<double>::infinity(); }
    double sum = 0.0;
    for (auto const& s : history) { sum += s.valid_rmse; }
    return (1.0 + epsilon) * sum / static_cast<double>(history.size());
}

auto is_nontrivial(Complexity const& c) noexcept -> bool
{
    return c.links > 1;
}

SnapshotMeter::SnapshotMeter(Dataset const& train, Dataset const& valid, ConstraintSet const& constraints, Dataset const* extrap_valid,
    LossConfig const& loss, double active_threshold)
    : objective_(train, valid, constraints, loss)
    , extrap_valid_(extrap_valid)
    , active_threshold_(active_threshold)
    , singularity_threshold_(loss.singularity_threshold)
{
}

auto SnapshotMeter::measure(Network const& masked, ActivityReport const& report, std::size_t iteration) -> ModelSnapshot
{
    objective_.evaluate(masked);
    return measure_evaluated(objective_, masked, report, iteration);
}

auto SnapshotMeter::measure_evaluated(Objective const& objective, Network const& masked, ActivityReport const& report,
    std::size_t iteration) const -> ModelSnapshot
{
    ModelSnapshot s;
    s.weights.assign(masked.weights().begin(), masked.weights().end());
    s.complexity = { report.n_active_links, report.n_active_units };
    auto const sing = singularity_specs(masked, singularity_threshold_, &report.unit_active);
    auto raw = objective.raw_terms(masked, sing, {});
    s.rho_s = std::move(raw.rho_s);
    s.rho_c = std::move(raw.rho_c);
    s.valid_rmse = objective.valid_rmse();
    if (extrap_valid_ != nullptr) {
        ForwardCache cache;
        s.ext_rmse = rmse([&](std::span<double const> x) { return forward(masked, x, cache); }, *extrap_valid_);
    }
    s.iteration = iteration;
    (void)active_threshold_;
    return s;
}

auto to_string(Phase p) -> std::string
{
    switch (p) {
    case Phase::InitL1:
        return "init_l1";
    case Phase::InitL2:
        return "init_l2";
    case Phase::Explore:
        return "explore";
    case Phase::Focus:
        return "focus";
    case Phase::Final:
        return "final";
    }
    return "?";
}

namespace {
    auto sum_of(std::vector<double> const& v) -> double
    {
        return std::accumulate(v.begin(), v.end(), 0.0);
    }

    class Trainer {
    public:
        Trainer(ArchitectureSpec const& spec, TrainingData const& data, TrainerConfig const& config, std::uint64_t seed, std::ostream* log)
            : config_(config)
            , constraints_(config.variant.use_constraints && data.constraints != nullptr ? *data.constraints : ConstraintSet {})
            , loss_(with_mode(config.loss, config.variant.weighting))
            , net_(build_network(spec, seed, config.division_guard))
            , masked_(net_)
            , objective_(*data.train, *data.valid, constraints_, loss_)
            , meter_(*data.train, *data.valid, constraints_,
                  config.variant.selection == Selection::ExtrapolationBased ? data.extrap_valid : nullptr, loss_, config.active_threshold)
            , state_(loss_, singularity_specs(net_, loss_.singularity_threshold).size(), constraints_.size())
            , sing_all_(singularity_specs(net_, loss_.singularity_threshold))
            , adam_(net_.num_weights(), config.adam)
            , log_(log)
        {
        }

        auto run() -> RunResult
        {
            auto const s = effective_schedule(config_.schedule, config_.variant);
            for (std::size_t i = 0; i < s.n_init / 2; ++i) { step(Phase::InitL1); }
            for (std::size_t i = s.n_init / 2; i < s.n_init; ++i) { step(Phase::InitL2); }
            if (s.epochs > 0) {
                if (!m_star_) {
                    auto const report = activity(net_, config_.active_threshold);
                    m_star_ = candidate(report);
                }
                push_history();
            }
            for (epoch_ = 0; epoch_ < s.epochs; ++epoch_) {
                net_.set_weights(m_star_->weights);
                if (config_.reset_adam) { adam_.reset(); }
                theta_ = theta_v(history_, config_.epsilon);
                for (std::size_t i = 0; i < s.n_e; ++i) { step(Phase::Explore); }
                for (std::size_t i = 0; i < s.n_f; ++i) { step(Phase::Focus); }
                push_history();
            }
            if (config_.reset_adam) { adam_.reset(); }
            for (std::size_t i = 0; i < s.n_final; ++i) { step(Phase::Final); }

            RunResult r;
            if (!model_star_) {
                auto const report = activity(net_, config_.active_threshold);
                model_star_ = candidate(report);
            }
            r.model_star = *model_star_;
            r.m_star = m_star_ ? *m_star_ : *model_star_;
            r.final_weights.assign(net_.weights().begin(), net_.weights().end());
            r.iterations = iter_;
            return r;
        }

    private:
        static auto with_mode(LossConfig cfg, WeightingMode mode) -> LossConfig
        {
            cfg.mode = mode;
            return cfg;
        }

        void push_history()
        {
            history_.push_back(*m_star_);
            while (history_.size() > config_.history_k) { history_.pop_front(); }
        }

        auto candidate(ActivityReport const& report) -> ModelSnapshot
        {
            masked_.set_weights(net_.weights());
            zero_masked(masked_, IndexSet::of(net_.num_weights(), report.active_weights));
            if (std::ranges::equal(masked_.weights(), net_.weights())) {
                return meter_.measure_evaluated(objective_, masked_, report, iter_);
            }
            return meter_.measure(masked_, report, iter_);
        }

        auto accept_model(ModelSnapshot const& c, ModelSnapshot const& inc) const -> bool
        {
            return config_.variant.selection == Selection::ExtrapolationBased ? select_accept_ext(c, inc) : select_accept(c, inc);
        }

        void step(Phase phase)
        {
            auto const stage = phase == Phase::InitL1 ? Stage::L1 : (phase == Phase::Focus ? Stage::L3 : Stage::L2);
            bool const masked_phase = phase == Phase::Focus || phase == Phase::Final;
            auto const n = net_.num_weights();

            auto const report = activity(net_, config_.active_threshold);
            auto const active = IndexSet::of(n, report.active_weights);
            if (phase == Phase::Final) { zero_masked(net_, active); }
            objective_.evaluate(net_);

            auto cand = candidate(report);
            if (!model_star_ || accept_model(cand, *model_star_)) { model_star_ = cand; }
            if (phase == Phase::InitL2 && (!m_star_ || select_accept(cand, *m_star_))) { m_star_ = cand; }
            if (phase == Phase::Focus && epoch_accept(cand, *m_star_, theta_) && select_accept(cand, *m_star_)) { m_star_ = cand; }

            static std::vector<std::size_t> const none;
            auto const& reg = phase == Phase::Focus ? report.active_weights : none;
            auto const sing = masked_phase ? singularity_specs(net_, loss_.singularity_threshold, &report.unit_active) : sing_all_;
            auto const raw = objective_.raw_terms(net_, sing, reg);

            if (loss_.mode == WeightingMode::Static) {
                using C = LossState::Coefficient;
                if (!state_.is_frozen(C::Alpha)) { state_.init_static(C::Alpha, raw.l_t, sum_of(raw.rho_s)); }
                if (stage != Stage::L1 && !state_.is_frozen(C::Beta)) { state_.init_static(C::Beta, raw.l_t, sum_of(raw.rho_c)); }
                if (stage == Stage::L3 && !state_.is_frozen(C::Gamma)) { state_.init_static(C::Gamma, raw.l_t, raw.rho_r); }
            }

            auto const ctx = objective_.context(state_, raw, stage);
            auto const terms = objective_.weighted_terms(raw, ctx, stage);
            auto const loss = compose(stage, terms);
            if (!std::isfinite(loss)) {
                throw NumericalError("non-finite loss", iter_);
            }

            std::vector<double> grad(n, 0.0);
            objective_.gradient(net_, ctx, stage, sing, reg, grad);
            GradientVector g;
            try {
                g = finalize_gradient(std::move(grad), masked_phase ? active : IndexSet::all(n));
            } catch (NumericalError const& e) {
                throw NumericalError("non-finite gradient at weight " + std::to_string(e.index()), iter_);
            }
            adam_step(net_, g, adam_, masked_phase ? active : IndexSet::all(n));

            static std::vector<double> const no_rho;
            state_.record(raw.l_t, raw.rho_s, stage != Stage::L1 ? raw.rho_c : no_rho,
                stage == Stage::L3 ? std::optional<double>(raw.rho_r) : std::nullopt);
            state_.adapt(true, stage != Stage::L1, stage == Stage::L3);

            if (log_ != nullptr) { write_log(phase, raw, terms, ctx, cand); }
            ++iter_;
        }

        void write_log(Phase phase, RawTerms const& raw, LossTerms const& terms, WeightingContext const& ctx, ModelSnapshot const& cand)
        {
            nlohmann::json rec;
            rec["iter"] = iter_;
            rec["phase"] = to_string(phase);
            rec["epoch"] = (phase == Phase::Explore || phase == Phase::Focus) ? static_cast<long long>(epoch_) : -1LL;
            rec["l_t"] = raw.l_t;
            rec["l_s"] = terms.s.value_or(0.0);
            rec["l_c"] = terms.c.value_or(0.0);
            rec["l_r"] = terms.r.value_or(0.0);
            rec["rho_s"] = raw.rho_s;
            rec["rho_c"] = raw.rho_c;
            rec["rho_r"] = raw.rho_r;
            rec["alpha"] = ctx.alpha;
            rec["beta"] = ctx.beta;
            rec["gamma"] = ctx.gamma;
            nlohmann::json c { { "links", cand.complexity.links }, { "units", cand.complexity.units }, { "valid", cand.valid_rmse },
                { "rho_s", cand.rho_s }, { "rho_c", cand.rho_c } };
            if (cand.ext_rmse) { c["ext"] = *cand.ext_rmse; }
            rec["cand"] = c;
            rec["model_star"] = { { "iter", model_star_->iteration }, { "links", model_star_->complexity.links },
                { "units", model_star_->complexity.units } };
            if (m_star_) {
                rec["m_star"] = m_star_->iteration;
            } else {
                rec["m_star"] = nullptr;
            }
            rec["theta_v"] = std::isfinite(theta_) ? nlohmann::json(theta_) : nlohmann::json(nullptr);
            *log_ << rec.dump() << '\n';
        }

        TrainerConfig config_;
        ConstraintSet constraints_;
        LossConfig loss_;
        Network net_;
        Network masked_;
        Objective objective_;
        SnapshotMeter meter_;
        LossState state_;
        std::vector<SingularitySpec> sing_all_;
        AdamState adam_;
        std::ostream* log_;
        std::optional<ModelSnapshot> model_star_;
        std::optional<ModelSnapshot> m_star_;
        std::deque<ModelSnapshot> history_;
        double theta_ { std::numeric_limits<double>::infinity() };
        std::size_t epoch_ { 0 };
        std::size_t iter_ { 0 };
    };
} // namespace

auto run(ArchitectureSpec const& spec, TrainingData const& data, TrainerConfig const& config, std::uint64_t seed, std::ostream* log)
    -> RunResult
{
    if (data.train == nullptr || data.train->empty()) {
        throw DataError("training set is empty");
    }
    if (data.valid == nullptr || data.valid->empty()) {
        throw DataError("validation set is empty");
    }
    if (config.variant.selection == Selection::ExtrapolationBased && (data.extrap_valid == nullptr || data.extrap_valid->empty())) {
        throw DataError("extrapolation-based selection needs the extrapolation validation set");
    }
    spec.validate();
    Trainer t(spec, data, config, seed, log);
    return t.run();
}

} // namespace eqlsr
