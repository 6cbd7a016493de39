// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any of them fails.
//
//   acceptance [--configs DIR] [--work DIR] [criterion...]

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <quadmath.h>

#include "eqlsr/autodiff.hpp"
#include "eqlsr/extract.hpp"
#include "eqlsr/harness.hpp"
#include "eqlsr/lossfn.hpp"
#include "eqlsr/netgraph.hpp"
#include "eqlsr/problems.hpp"
#include "eqlsr/trainer.hpp"

#ifndef EQLSR_ACCEPTANCE_CONFIGS
#define EQLSR_ACCEPTANCE_CONFIGS "tests/acceptance/configs"
#endif

using namespace eqlsr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass { false };
    std::string detail;
};

auto fmt(double v) -> std::string
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// A finished campaign with everything needed to re-evaluate its models.
struct Campaign {
    RunConfig config;
    ProblemBundle bundle;
    ArchitectureSpec spec;
    std::vector<RunRecord> records;
    fs::path dir;

    [[nodiscard]] auto network(RunRecord const& r) const -> Network
    {
        auto net = build_network(spec, 0, config.trainer.division_guard);
        net.set_weights(r.snapshot.weights);
        return net;
    }

    [[nodiscard]] auto log_lines(std::uint64_t seed) const -> std::vector<json>
    {
        std::ifstream is(dir / "logs" / ("seed-" + std::to_string(seed) + ".jsonl"));
        std::vector<json> lines;
        for (std::string line; std::getline(is, line);) { lines.push_back(json::parse(line)); }
        return lines;
    }
};

class Context {
public:
    Context(fs::path configs, fs::path work)
        : configs_(std::move(configs))
        , work_(std::move(work))
    {
    }

    auto campaign(std::string const& name, std::optional<std::vector<std::uint64_t>> seeds = std::nullopt) -> Campaign const&
    {
        auto key = name;
        if (seeds) {
            for (auto s : *seeds) { key += "-" + std::to_string(s); }
        }
        if (auto it = cache_.find(key); it != cache_.end()) { return it->second; }
        Campaign c;
        c.config = load_config(configs_ / (name + ".json"));
        if (seeds) { c.config.seeds = *seeds; }
        c.dir = work_ / key;
        fs::remove_all(c.dir);
        std::cerr << "running campaign " << key << " (" << c.config.seeds.size() << " seeds, " << c.config.trainer.schedule.total()
                  << " iterations each)\n";
        c.records = eqlsr::campaign(c.config, c.dir).records;
        c.bundle = generate_problem(c.config.problem);
        c.spec = resolve_architecture(c.config, c.bundle);
        return cache_.emplace(key, std::move(c)).first->second;
    }

    [[nodiscard]] auto configs() const -> fs::path const& { return configs_; }
    [[nodiscard]] auto work() const -> fs::path const& { return work_; }

private:
    fs::path configs_;
    fs::path work_;
    std::map<std::string, Campaign> cache_;
};

auto bundle_of(std::string const& name) -> ProblemBundle
{
    ProblemParams p;
    p.name = name;
    return generate_problem(p);
}

auto model_of(Network const& net) -> ModelEval
{
    return [&net](std::span<double const> x) { return forward(net, x); };
}

// ---------------------------------------------------------------------------

auto criterion_1(Context&) -> Verdict
{
    std::vector<std::pair<ArchitectureSpec, std::size_t>> const cases {
        { general_architecture({ "x" }), 363 },
        { general_architecture({ "x", "y" }), 396 },
        { general_architecture({ "a", "b", "c", "d", "e" }), 495 },
        { informed_architecture({ "r1", "r2" }), 403 },
    };
    Verdict v { true, "" };
    for (auto const& [spec, expected] : cases) {
        auto const counted = verify_weight_count(spec);
        auto const built = build_network(spec, 1).num_weights();
        v.pass = v.pass && counted == expected && built == expected;
        v.detail += std::to_string(built) + "/" + std::to_string(expected) + " ";
    }
    return v;
}

// Loss recomputed in quad precision. At h = 1e-6 a double-precision central
// difference loses about eps*|L|/h to rounding, which is the same order as the
// tolerance when L is large or a curvature residual cancels.
class WideLoss {
public:
    using Real = __float128;

    WideLoss(Network const& net, ProblemBundle const& b, std::vector<SingularitySpec> sing, std::vector<std::size_t> reg, LossConfig cfg)
        : net_(&net)
        , b_(&b)
        , sing_(std::move(sing))
        , reg_(std::move(reg))
        , cfg_(cfg)
    {
        auto add = [&](std::span<double const> x) { points_.emplace_back(x.begin(), x.end()); };
        for (std::size_t i = 0; i < b.train.size(); ++i) { add(b.train.x(i)); }
        for (std::size_t i = 0; i < b.valid.size(); ++i) { add(b.valid.x(i)); }
        for (auto const& con : b.constraints.constraints) {
            for (auto const& smp : con.samples) {
                for (auto const& p : smp.points) { add(p); }
            }
        }
    }

    auto value(std::vector<Real> const& w, WeightingContext const& ctx, Stage stage) const -> Real
    {
        std::vector<Real> out(points_.size());
        std::vector<std::vector<Real>> z(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) { out[i] = run(w, points_[i], z[i]); }

        auto const n_train = b_->train.size();
        Real lt = 0;
        for (std::size_t i = 0; i < n_train; ++i) {
            auto const r = out[i] - static_cast<Real>(b_->train.y(i));
            lt += r * r;
        }
        lt = sqrtq(lt / static_cast<Real>(n_train));

        Real ls = 0;
        for (std::size_t j = 0; j < sing_.size(); ++j) {
            auto const& spec = sing_[j];
            if (spec.znodes.empty()) { continue; }
            Real s = 0;
            for (auto const& zp : z) {
                for (auto zi : spec.znodes) {
                    auto const m = zp[zi] == 0 ? Real(10) : std::max(static_cast<Real>(spec.threshold) - zp[zi], Real(0));
                    s += m * m;
                }
            }
            ls += sqrtq(s / static_cast<Real>(spec.znodes.size() * points_.size())) / ctx.h_s[j];
        }
        auto total = lt + ctx.scale_s * ctx.alpha * ls;
        if (stage == Stage::L1) { return total; }

        Real lc = 0;
        auto next = n_train + b_->valid.size();
        auto const& cons = b_->constraints.constraints;
        for (std::size_t c = 0; c < cons.size(); ++c) {
            Real sq = 0;
            for (auto const& smp : cons[c].samples) {
                std::array<Real, 3> f {};
                for (std::size_t p = 0; p < smp.points.size(); ++p) { f[p] = out[next++]; }
                auto const e = residual(cons[c], static_cast<Real>(smp.anchor), f);
                sq += e * e;
            }
            lc += sqrtq(sq / static_cast<Real>(cons[c].samples.size())) / ctx.h_c[c];
        }
        total += ctx.scale_c * ctx.beta * lc;
        if (stage == Stage::L2) { return total; }

        Real lr = 0;
        Real const a = cfg_.l05_a;
        for (auto i : reg_) {
            auto const x = fabsq(w[i]);
            lr += x >= a ? sqrtq(x) : sqrtq(-x * x * x * x / (8 * a * a * a) + 3 * x * x / (4 * a) + 3 * a / 8);
        }
        return total + ctx.scale_r * ctx.gamma * lr;
    }

private:
    auto run(std::vector<Real> const& w, std::vector<double> const& x, std::vector<Real>& z) const -> Real
    {
        auto const& net = *net_;
        std::vector<Real> y(net.num_values(), 0);
        for (std::size_t i = 0; i < x.size(); ++i) { y[i] = x[i]; }
        z.assign(net.znodes().size(), 0);
        Real out = 0;
        for (auto const& unit : net.units()) {
            Real zv[2] = { 0, 0 };
            for (std::size_t a = 0; a < arity(unit.kind); ++a) {
                auto const& zn = net.znodes()[unit.first_z + a];
                Real acc = w[zn.bias_index()];
                for (std::size_t j = 0; j < zn.width; ++j) { acc += w[zn.offset + j] * y[j]; }
                z[unit.first_z + a] = acc;
                zv[a] = acc;
            }
            Real v = 0;
            switch (unit.kind) {
            case UnitKind::Sin: v = sinq(zv[0]); break;
            case UnitKind::Tanh: v = tanhq(zv[0]); break;
            case UnitKind::Arctan: v = atanq(zv[0]); break;
            case UnitKind::Identity: v = zv[0]; break;
            case UnitKind::Multiply: v = zv[0] * zv[1]; break;
            case UnitKind::Divide: v = zv[1] > static_cast<Real>(net.division_guard()) ? zv[0] / zv[1] : Real(0); break;
            }
            if (unit.value_index < net.num_values()) {
                y[unit.value_index] = v;
            } else {
                out = v;
            }
        }
        return out;
    }

    static auto residual(Constraint const& con, Real anchor, std::array<Real, 3> const& f) -> Real
    {
        auto pos = [](Real v) { return std::max(v, Real(0)); };
        switch (con.kind) {
        case ConstraintKind::EqualityInvariant:
        case ConstraintKind::ValuePin: return fabsq(f[0] - anchor);
        case ConstraintKind::Symmetry: return fabsq(f[0] - f[1]);
        case ConstraintKind::InequalityBound: return con.sense > 0 ? pos(f[0] - anchor) : pos(anchor - f[0]);
        case ConstraintKind::SignConstraint: return con.sense > 0 ? pos(-f[0]) : pos(f[0]);
        case ConstraintKind::MonotonicityPair: return con.sense > 0 ? pos(f[0] - f[1]) : pos(f[1] - f[0]);
        case ConstraintKind::CurvatureTriple:
            if (con.curvature == Curvature::ConcaveDown) { return pos(f[0] - 2 * f[1] + f[2]); }
            return pos(f[2] - f[1]) + pos(f[1] - f[0]) + pos((f[1] - f[2]) - (f[0] - f[1]));
        }
        return 0;
    }

    Network const* net_;
    ProblemBundle const* b_;
    std::vector<SingularitySpec> sing_;
    std::vector<std::size_t> reg_;
    LossConfig cfg_;
    std::vector<std::vector<double>> points_;
};

auto criterion_2(Context&) -> Verdict
{
    double const h = 1e-6;
    double const tol = 1e-5;
    double const floor = 1e-6;
    Verdict v { true, "" };
    for (auto const* name : { "resistors", "magic", "magman", "turtlebot" }) {
        auto const b = bundle_of(name);
        LossConfig cfg;
        Objective obj(b.train, b.valid, b.constraints, cfg);
        auto net = build_network(b.architecture, 2024);
        auto const sing = singularity_specs(net, cfg.singularity_threshold);
        auto const reg = activity(net, 1e-4).active_weights;
        obj.evaluate(net);
        LossState state(cfg, sing.size(), b.constraints.size());
        auto const raw0 = obj.raw_terms(net, sing, reg);
        state.record(raw0.l_t, raw0.rho_s, raw0.rho_c, raw0.rho_r);
        state.adapt(true, true, true);

        for (auto const stage : { Stage::L1, Stage::L2, Stage::L3 }) {
            obj.evaluate(net);
            auto const raw = obj.raw_terms(net, sing, reg);
            auto const ctx = obj.context(state, raw, stage);
            std::vector<double> grad(net.num_weights(), 0.0);
            obj.gradient(net, ctx, stage, sing, reg, grad);

            auto const w = std::vector<double>(net.weights().begin(), net.weights().end());
            WideLoss const wide(net, b, sing, reg, cfg);
            std::vector<WideLoss::Real> wl(w.begin(), w.end());
            auto at = [&](std::size_t i, double offset) {
                net.weights()[i] = w[i] + offset;
                obj.evaluate(net);
                return obj.value(net, ctx, stage, sing, reg);
            };
            auto wide_at = [&](std::size_t i, double offset) {
                wl[i] = static_cast<WideLoss::Real>(w[i]) + offset;
                auto const v = wide.value(wl, ctx, stage);
                wl[i] = w[i];
                return v;
            };
            auto signature = [&](std::size_t i, double offset) {
                net.weights()[i] = w[i] + offset;
                obj.evaluate(net);
                return obj.branch_signature(net, sing, reg);
            };
            std::size_t checked = 0;
            std::size_t good = 0;
            std::size_t excluded = 0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (signature(i, -10 * h) != signature(i, 10 * h)) {
                    ++excluded;
                    net.weights()[i] = w[i];
                    continue;
                }
                auto agrees = [&](double fd) { return std::abs(fd - grad[i]) / std::max({ std::abs(fd), std::abs(grad[i]), floor }) < tol; };
                // The quad oracle settles coordinates where double rounding is too coarse.
                auto ok = agrees((at(i, h) - at(i, -h)) / (2 * h));
                net.weights()[i] = w[i];
                if (!ok) { ok = agrees(static_cast<double>((wide_at(i, h) - wide_at(i, -h)) / (2 * h))); }
                ++checked;
                if (ok) { ++good; }
            }
            obj.evaluate(net);
            auto const frac = checked == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(checked);
            v.pass = v.pass && frac >= 0.99;
            v.detail += std::string(name) + "/L" + std::to_string(static_cast<int>(stage) + 1) + " " + fmt(100 * frac) + "% (" + std::to_string(excluded)
                + " excl) ";
        }
    }
    return v;
}

auto criterion_3(Context&) -> Verdict
{
    auto const a = singularity_metric(1e-4, 0.0);
    auto const b = singularity_metric(1e-4, 1e-4);
    auto const c = singularity_metric(1e-4, 0.5);
    auto const d = singularity_metric(1e-4, 5e-5);
    bool const pass = a == 10.0 && b == 0.0 && c == 0.0 && d == 5e-5;
    return { pass, "m(0)=" + fmt(a) + " m(1e-4)=" + fmt(b) + " m(0.5)=" + fmt(c) + " m(5e-5)=" + fmt(d) };
}

auto criterion_4(Context&) -> Verdict
{
    double const a = LossConfig {}.l05_a;
    double worst_value = 0.0;
    double worst_slope = 0.0;
    for (double const s : { -1.0, 1.0 }) {
        auto const edge = s * a;
        auto const inner = std::nextafter(edge, 0.0);
        worst_value = std::max(worst_value, std::abs(smoothed_l05(inner, a) - std::sqrt(std::abs(inner))));
        worst_value = std::max(worst_value, std::abs(smoothed_l05(edge, a) - std::sqrt(a)));
        // Inner branch just inside the joint against the outer branch at it.
        auto const outer_slope = s * 0.5 / std::sqrt(a);
        worst_slope = std::max(worst_slope, std::abs(smoothed_l05_slope(inner, a) - outer_slope));
        worst_slope = std::max(worst_slope, std::abs(smoothed_l05_slope(edge, a) - outer_slope));
    }
    auto const at_zero = smoothed_l05_slope(0.0, a);
    bool const pass = worst_value <= 1e-12 && worst_slope <= 1e-8 && at_zero == 0.0;
    return { pass, "value gap " + fmt(worst_value) + ", slope gap " + fmt(worst_slope) + ", slope(0)=" + fmt(at_zero) };
}

auto criterion_5(Context& ctx) -> Verdict
{
    auto const& c = ctx.campaign("resistors");
    auto const warmup = c.config.trainer.loss.window;
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst = 0.0;
    for (auto seed : c.config.seeds) {
        for (auto const& line : c.log_lines(seed)) {
            if (line.at("iter").get<std::size_t>() < warmup) { continue; }
            auto const lt = line.at("l_t").get<double>();
            for (auto const* key : { "l_s", "l_c", "l_r" }) {
                auto const term = line.at(key).get<double>();
                ++checked;
                if (term > 0.5 * lt) { ++violations; }
                if (lt > 0.0) { worst = std::max(worst, term / lt); }
            }
        }
    }
    return { checked > 0 && violations == 0,
        std::to_string(violations) + " violations in " + std::to_string(checked) + " term checks, max ratio " + fmt(worst) };
}

auto criterion_6(Context& ctx) -> Verdict
{
    Verdict v { true, "" };
    std::mt19937_64 rng(6);
    for (auto const* name : { "resistors", "magic", "magman", "turtlebot" }) {
        auto const& c = ctx.campaign(name);
        double worst_ast = 0.0;
        double worst_simple = 0.0;
        std::size_t points = 0;
        for (auto const& r : c.records) {
            if (!r.ok) { continue; }
            auto const net = c.network(r);
            auto const expr = to_expression(net, c.config.trainer.active_threshold);
            auto const simple = simplify(expr);
            auto const& domain = c.bundle.train_domain;
            std::uniform_int_distribution<std::size_t> pick(0, domain.size() - 1);
            for (int k = 0; k < 1000; ++k) {
                auto const& box = domain[pick(rng)];
                std::vector<double> x(box.size());
                for (std::size_t d = 0; d < box.size(); ++d) { x[d] = std::uniform_real_distribution<double>(box[d].lo, box[d].hi)(rng); }
                std::vector<std::vector<double>> const one { x };
                if (!(min_denominator(expr, one) > c.config.trainer.loss.singularity_threshold)) { continue; }
                auto const f = forward(net, x);
                auto const e = eval_expression(*expr, x);
                auto const s = eval_expression(*simple, x);
                worst_ast = std::max(worst_ast, std::abs(e - f) / (1.0 + std::abs(f)));
                worst_simple = std::max(worst_simple, std::abs(s - e) / (1.0 + std::abs(e)));
                ++points;
            }
        }
        v.pass = v.pass && worst_ast <= 1e-9 && worst_simple <= 1e-9 && points > 0;
        v.detail += std::string(name) + " " + fmt(worst_ast) + "/" + fmt(worst_simple) + " ";
    }
    return v;
}

auto snapshot_of(json const& line) -> ModelSnapshot
{
    auto const& c = line.at("cand");
    ModelSnapshot s;
    s.complexity = { c.at("links"), c.at("units") };
    s.valid_rmse = c.at("valid");
    s.rho_s = c.at("rho_s").get<std::vector<double>>();
    s.rho_c = c.at("rho_c").get<std::vector<double>>();
    if (c.contains("ext")) { s.ext_rmse = c.at("ext").get<double>(); }
    s.iteration = line.at("iter");
    return s;
}

// Checks one run log; returns an empty string when it satisfies every property.
auto check_selection(std::vector<json> const& lines, bool ext) -> std::string
{
    std::vector<ModelSnapshot> stream;
    for (auto const& line : lines) { stream.push_back(snapshot_of(line)); }
    std::optional<ModelSnapshot> best;
    std::optional<ModelSnapshot> prev_logged;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto const& cand = stream[i];
        if (!best || (ext ? select_accept_ext(cand, *best) : select_accept(cand, *best))) { best = cand; }
        auto const logged_iter = lines[i].at("model_star").at("iter").get<std::size_t>();
        if (logged_iter != best->iteration) { return "replay diverges at iteration " + std::to_string(i); }
        auto const& logged = stream.at(logged_iter);
        if (prev_logged) {
            if (logged.complexity > prev_logged->complexity) { return "complexity rises at iteration " + std::to_string(i); }
            if (logged.complexity == prev_logged->complexity) {
                bool ok = ext ? logged.ext_rmse <= prev_logged->ext_rmse : logged.valid_rmse <= prev_logged->valid_rmse;
                for (std::size_t j = 0; j < logged.rho_s.size(); ++j) { ok = ok && (ext || logged.rho_s[j] <= prev_logged->rho_s[j]); }
                for (std::size_t j = 0; j < logged.rho_c.size(); ++j) { ok = ok && (ext || logged.rho_c[j] <= prev_logged->rho_c[j]); }
                if (!ok) { return "metric rises within a streak at iteration " + std::to_string(i); }
            }
        }
        prev_logged = logged;
    }
    return {};
}

auto criterion_7(Context& ctx) -> Verdict
{
    std::size_t logs = 0;
    std::size_t lines = 0;
    for (auto const* name : { "resistors", "magic", "magman", "turtlebot", "magman-aene" }) {
        auto const& c = ctx.campaign(name);
        bool const ext = c.config.trainer.variant.selection == Selection::ExtrapolationBased;
        for (auto seed : c.config.seeds) {
            auto const log = c.log_lines(seed);
            auto const problem = check_selection(log, ext);
            if (!problem.empty()) { return { false, std::string(name) + " seed " + std::to_string(seed) + ": " + problem }; }
            ++logs;
            lines += log.size();
        }
    }
    return { logs > 0, std::to_string(logs) + " logs, " + std::to_string(lines) + " iterations replayed" };
}

auto criterion_8(Context& ctx) -> Verdict
{
    auto const& c = ctx.campaign("resistors");
    auto const sym = c.bundle.constraints.index_of("symmetry");
    std::size_t good = 0;
    std::string detail;
    for (auto const& r : c.records) {
        if (!r.ok) { continue; }
        auto const rmse = r.metrics.rmse_int_ext;
        auto const rho = r.metrics.rho_c.at(sym);
        bool const ok = r.nontrivial && rmse < 0.1 && rho < 1e-2;
        good += ok ? 1 : 0;
        detail += std::to_string(r.seed) + ":" + fmt(rmse) + "/" + fmt(rho) + (ok ? "* " : " ");
    }
    return { good >= 3, std::to_string(good) + "/10 qualifying (need 3); seed:RMSE_int+ext/rho_sym " + detail };
}

auto criterion_9(Context& ctx) -> Verdict
{
    auto const& c = ctx.campaign("magic");
    auto const& concave = c.bundle.constraints.constraints[c.bundle.constraints.index_of("peak_concave")];
    std::size_t good = 0;
    std::string detail;
    for (auto const& r : c.records) {
        if (!r.ok) { continue; }
        auto const net = c.network(r);
        std::vector<double> const zero { 0.0 };
        auto const f0 = std::abs(forward(net, zero));
        auto const rho = violation_rmse(concave, model_of(net));
        bool const ok = r.nontrivial && f0 < 1e-2 && rho < 1e-2;
        good += ok ? 1 : 0;
        detail += std::to_string(r.seed) + ":" + fmt(f0) + "/" + fmt(rho) + (ok ? "* " : " ");
    }
    return { good >= 2, std::to_string(good) + "/10 qualifying (need 2); seed:|f(0)|/rho_concave " + detail };
}

// Violation RMSE of the increasing constraint over its samples in [0.008, 0.075].
auto right_increasing_rho(Campaign const& c, RunRecord const& r) -> double
{
    auto const& con = c.bundle.constraints.constraints[c.bundle.constraints.index_of("increasing_outer")];
    auto const net = c.network(r);
    auto const model = model_of(net);
    std::vector<double> res;
    for (auto const& s : con.samples) {
        if (s.points.front()[0] >= 0.008) { res.push_back(residual(con, s, model)); }
    }
    return violation_rmse(con, res);
}

auto criterion_10(Context& ctx) -> Verdict
{
    auto const& with = ctx.campaign("magman");
    bool constrained_ok = true;
    std::size_t nt_with = 0;
    double worst_with = 0.0;
    for (auto const& r : with.records) {
        if (!r.ok || !r.nontrivial) { continue; }
        ++nt_with;
        auto const rho = right_increasing_rho(with, r);
        worst_with = std::max(worst_with, rho);
        constrained_ok = constrained_ok && rho < 1e-2;
    }

    auto ablation = [&](Campaign const& c, std::size_t& nt, double& worst) {
        bool found = false;
        for (auto const& r : c.records) {
            if (!r.ok || !r.nontrivial) { continue; }
            ++nt;
            auto const rho = right_increasing_rho(c, r);
            worst = std::max(worst, rho);
            found = found || rho > 5e-2;
        }
        return found;
    };
    std::size_t nt_without = 0;
    double worst_without = 0.0;
    bool violated = ablation(ctx.campaign("magman-aene"), nt_without, worst_without);
    std::string rerun;
    if (!violated) {
        std::vector<std::uint64_t> fresh(10);
        std::iota(fresh.begin(), fresh.end(), 11);
        std::size_t nt2 = 0;
        double worst2 = 0.0;
        violated = ablation(ctx.campaign("magman-aene", fresh), nt2, worst2);
        rerun = "; rerun seeds 11-20: " + std::to_string(nt2) + " nontrivial, max rho " + fmt(worst2);
    }
    return { constrained_ok && violated,
        "ACYE " + std::to_string(nt_with) + " nontrivial, max rho " + fmt(worst_with) + " (need < 1e-2); AENE " + std::to_string(nt_without)
            + " nontrivial, max rho " + fmt(worst_without) + " (need one > 5e-2)" + rerun };
}

auto criterion_11(Context& ctx) -> Verdict
{
    auto const& c = ctx.campaign("turtlebot");
    auto const& box = c.bundle.train_domain.front();
    std::mt19937_64 rng(11);
    std::vector<std::vector<double>> states;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> s(5, 0.0);
        for (std::size_t d = 0; d < 3; ++d) { s[d] = std::uniform_real_distribution<double>(box[d].lo, box[d].hi)(rng); }
        states.push_back(s);
    }
    bool models_ok = true;
    std::size_t nt = 0;
    double worst = 0.0;
    for (auto const& r : c.records) {
        if (!r.ok || !r.nontrivial) { continue; }
        ++nt;
        auto const net = c.network(r);
        for (auto const& s : states) { worst = std::max(worst, std::abs(forward(net, s) - s[0])); }
    }
    models_ok = nt > 0 && worst < 1e-2;

    double sim = 0.0;
    for (auto const& seq : c.bundle.test_sequences) { sim = std::max(sim, simulation_rmse(c.bundle.reference, seq)); }
    sim = std::max(sim, simulation_rmse(c.bundle.reference, c.bundle.valid_sequence));
    return { models_ok && sim == 0.0,
        std::to_string(nt) + " nontrivial models, max steady-state error " + fmt(worst) + " (need < 1e-2); generator simulation RMSE " + fmt(sim) };
}

auto criterion_12(Context& ctx) -> Verdict
{
    auto const cfg = load_config(ctx.configs() / "determinism.json");
    auto read = [](fs::path const& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream os;
        os << is.rdbuf();
        return os.str();
    };
    std::vector<std::string> records;
    std::vector<std::string> logs;
    for (auto const* run : { "determinism-a", "determinism-b" }) {
        auto const dir = ctx.work() / run;
        fs::remove_all(dir);
        (void)campaign(cfg, dir);
        records.push_back(read(dir / "records.jsonl"));
        std::string all;
        for (auto seed : cfg.seeds) { all += read(dir / "logs" / ("seed-" + std::to_string(seed) + ".jsonl")); }
        logs.push_back(all);
    }
    bool const same = !records[0].empty() && records[0] == records[1] && logs[0] == logs[1];
    return { same, std::to_string(records[0].size()) + " record bytes, " + std::to_string(logs[0].size()) + " log bytes, "
            + (same ? "identical" : "different") + " across two executions (" + std::to_string(cfg.threads) + " threads)" };
}

} // namespace

auto main(int argc, char** argv) -> int
{
    CLI::App app { "acceptance checks" };
    std::string configs = EQLSR_ACCEPTANCE_CONFIGS;
    std::string work = "acceptance-runs";
    std::vector<int> only;
    app.add_option("--configs", configs, "directory of campaign configs");
    app.add_option("--work", work, "scratch directory for campaign outputs");
    app.add_option("criteria", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> const criteria {
        { "architecture weight counts", criterion_1 },
        { "gradients match central differences", criterion_2 },
        { "singularity metric values", criterion_3 },
        { "smoothed L0.5 joins smoothly", criterion_4 },
        { "adaptive weighting clamp holds over resistors runs", criterion_5 },
        { "extracted expressions match the network", criterion_6 },
        { "selection rule properties and replay", criterion_7 },
        { "scaled resistors experiment", criterion_8 },
        { "scaled magic experiment", criterion_9 },
        { "magman constraint ablation", criterion_10 },
        { "turtlebot properties", criterion_11 },
        { "campaign determinism", criterion_12 },
    };

    Context ctx(configs, work);
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto const id = static_cast<int>(i + 1);
        if (!only.empty() && std::ranges::find(only, id) == only.end()) { continue; }
        Verdict v;
        try {
            v = criteria[i].second(ctx);
        } catch (std::exception const& e) {
            v = { false, std::string("error: ") + e.what() };
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[i].first << " | " << v.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
