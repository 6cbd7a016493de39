// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/priors.hpp"

#include <algorithm>
#include <cmath>

#include "eqlsr/errors.hpp"

namespace eqlsr {

auto sample_arity(ConstraintKind kind) noexcept -> std::size_t
{
    switch (kind) {
    case ConstraintKind::Symmetry:
    case ConstraintKind::MonotonicityPair:
        return 2;
    case ConstraintKind::CurvatureTriple:
        return 3;
    default:
        return 1;
    }
}

auto to_string(ConstraintKind kind) -> std::string
{
    switch (kind) {
    case ConstraintKind::EqualityInvariant:
        return "equality";
    case ConstraintKind::Symmetry:
        return "symmetry";
    case ConstraintKind::InequalityBound:
        return "bound";
    case ConstraintKind::SignConstraint:
        return "sign";
    case ConstraintKind::MonotonicityPair:
        return "monotonic";
    case ConstraintKind::CurvatureTriple:
        return "curvature";
    case ConstraintKind::ValuePin:
        return "pin";
    }
    return "?";
}

auto constraint_kind_from_string(std::string const& name) -> ConstraintKind
{
    for (auto k : { ConstraintKind::EqualityInvariant, ConstraintKind::Symmetry, ConstraintKind::InequalityBound,
             ConstraintKind::SignConstraint, ConstraintKind::MonotonicityPair, ConstraintKind::CurvatureTriple,
             ConstraintKind::ValuePin }) {
        if (to_string(k) == name) { return k; }
    }
    throw DataError("unknown constraint kind '" + name + "'");
}

auto AnchorRule::evaluate(std::span<double const> point) const -> double
{
    switch (kind) {
    case Kind::None:
        return 0.0;
    case Kind::Constant:
        return value;
    case Kind::Coordinate:
        return point[i];
    case Kind::HalfCoordinate:
        return 0.5 * point[i];
    case Kind::MinCoordinates:
        return std::min(point[i], point[j]);
    }
    return 0.0;
}

auto ConstraintSet::total_samples() const noexcept -> std::size_t
{
    std::size_t n = 0;
    for (auto const& c : constraints) { n += c.samples.size(); }
    return n;
}

auto ConstraintSet::index_of(std::string const& name) const -> std::size_t
{
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (constraints[i].name == name) { return i; }
    }
    throw DataError("no constraint named '" + name + "'");
}

namespace {
    auto draw_point(SampleRule const& rule, std::size_t step_dim, double lo_shift, double hi_shift, std::mt19937_64& rng)
        -> std::vector<double>
    {
        std::vector<double> p(rule.box.size());
        for (std::size_t d = 0; d < rule.box.size(); ++d) {
            auto lo = rule.box[d].lo;
            auto hi = rule.box[d].hi;
            if (d == step_dim) {
                lo += lo_shift;
                hi -= hi_shift;
            }
            if (hi < lo) {
                throw DataError("constraint region is too narrow for its step");
            }
            if (hi == lo) {
                p[d] = lo;
            } else {
                std::uniform_real_distribution<double> dist(lo, hi);
                p[d] = dist(rng);
            }
        }
        for (auto [dst, src] : rule.ties) {
            p[dst] = p[src];
        }
        return p;
    }

    auto draw_sample(Constraint const& c, SampleRule const& rule, std::size_t ordinal, std::mt19937_64& rng) -> ConstraintSample
    {
        ConstraintSample s;
        switch (c.kind) {
        case ConstraintKind::ValuePin: {
            if (rule.pins.empty()) {
                throw DataError("value pin constraint '" + c.name + "' has no pins");
            }
            auto const& pin = rule.pins[ordinal % rule.pins.size()];
            s.points.push_back(pin.first);
            s.anchor = pin.second;
            return s;
        }
        case ConstraintKind::Symmetry: {
            auto p = draw_point(rule, rule.box.size(), 0, 0, rng);
            auto q = p;
            std::swap(q[rule.swap.first], q[rule.swap.second]);
            s.points = { p, q };
            return s;
        }
        case ConstraintKind::MonotonicityPair: {
            auto p = draw_point(rule, rule.step_dim, 0.0, rule.delta, rng);
            auto q = p;
            q[rule.step_dim] += rule.delta;
            s.points = { p, q };
            return s;
        }
        case ConstraintKind::CurvatureTriple: {
            auto c0 = draw_point(rule, rule.step_dim, rule.delta, rule.delta, rng);
            auto l = c0;
            auto r = c0;
            l[rule.step_dim] -= rule.delta;
            r[rule.step_dim] += rule.delta;
            s.points = { l, c0, r };
            return s;
        }
        default: {
            auto p = draw_point(rule, rule.box.size(), 0, 0, rng);
            s.anchor = rule.anchor.evaluate(p);
            s.points = { std::move(p) };
            return s;
        }
        }
    }

    auto abs_partial(double u) -> double { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); }
} // namespace

auto generate_samples(Constraint const& constraint, std::size_t count, std::mt19937_64& rng) -> std::vector<ConstraintSample>
{
    if (count == 0) {
        throw DataError("constraint '" + constraint.name + "' needs a positive sample count");
    }
    if (constraint.clauses.empty()) {
        throw DataError("constraint '" + constraint.name + "' has no sampling clause");
    }
    std::vector<ConstraintSample> out;
    out.reserve(count);
    auto const k = constraint.clauses.size();
    for (std::size_t c = 0; c < k; ++c) {
        auto const share = count / k + (c < count % k ? 1 : 0);
        for (std::size_t i = 0; i < share; ++i) {
            out.push_back(draw_sample(constraint, constraint.clauses[c], i, rng));
        }
    }
    return out;
}

auto residual_from_values(Constraint const& constraint, ConstraintSample const& sample, std::span<double const> f)
    -> ResidualPartials
{
    ResidualPartials r;
    auto& d = r.d_values;
    auto positive_part = [&](double v, std::array<double, 3> const& dv) {
        if (v > 0.0) {
            r.value += v;
            for (std::size_t i = 0; i < 3; ++i) { d[i] += dv[i]; }
        }
    };
    switch (constraint.kind) {
    case ConstraintKind::EqualityInvariant:
    case ConstraintKind::ValuePin: {
        auto const u = f[0] - sample.anchor;
        r.value = std::abs(u);
        d[0] = abs_partial(u);
        break;
    }
    case ConstraintKind::Symmetry: {
        auto const u = f[0] - f[1];
        r.value = std::abs(u);
        d[0] = abs_partial(u);
        d[1] = -d[0];
        break;
    }
    case ConstraintKind::InequalityBound:
        if (constraint.sense > 0) {
            positive_part(f[0] - sample.anchor, { 1.0, 0.0, 0.0 });
        } else {
            positive_part(sample.anchor - f[0], { -1.0, 0.0, 0.0 });
        }
        break;
    case ConstraintKind::SignConstraint:
        if (constraint.sense > 0) {
            positive_part(-f[0], { -1.0, 0.0, 0.0 });
        } else {
            positive_part(f[0], { 1.0, 0.0, 0.0 });
        }
        break;
    case ConstraintKind::MonotonicityPair:
        if (constraint.sense > 0) {
            positive_part(f[0] - f[1], { 1.0, -1.0, 0.0 });
        } else {
            positive_part(f[1] - f[0], { -1.0, 1.0, 0.0 });
        }
        break;
    case ConstraintKind::CurvatureTriple:
        if (constraint.curvature == Curvature::ConcaveDown) {
            positive_part(f[0] - 2.0 * f[1] + f[2], { 1.0, -2.0, 1.0 });
        } else {
            positive_part(f[2] - f[1], { 0.0, -1.0, 1.0 });
            positive_part(f[1] - f[0], { -1.0, 1.0, 0.0 });
            positive_part((f[1] - f[2]) - (f[0] - f[1]), { -1.0, 2.0, -1.0 });
        }
        break;
    }
    return r;
}

auto residual(Constraint const& constraint, ConstraintSample const& sample, ModelEval const& model) -> double
{
    std::array<double, 3> values {};
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        values[i] = model(sample.points[i]);
    }
    return residual_from_values(constraint, sample, std::span<double const>(values.data(), sample.points.size())).value;
}

auto violation_rmse(Constraint const& constraint, std::span<double const> residuals) -> double
{
    if (residuals.empty()) {
        throw DataError("constraint '" + constraint.name + "' has no samples");
    }
    double sum = 0.0;
    for (auto e : residuals) { sum += e * e; }
    return std::sqrt(sum / static_cast<double>(residuals.size()));
}

auto violation_rmse(Constraint const& constraint, ModelEval const& model) -> double
{
    std::vector<double> residuals;
    residuals.reserve(constraint.samples.size());
    for (auto const& s : constraint.samples) {
        residuals.push_back(residual(constraint, s, model));
    }
    return violation_rmse(constraint, residuals);
}

namespace {
    auto anchor_kind_name(AnchorRule::Kind k) -> std::string
    {
        switch (k) {
        case AnchorRule::Kind::None:
            return "none";
        case AnchorRule::Kind::Constant:
            return "constant";
        case AnchorRule::Kind::Coordinate:
            return "coordinate";
        case AnchorRule::Kind::HalfCoordinate:
            return "half_coordinate";
        case AnchorRule::Kind::MinCoordinates:
            return "min_coordinates";
        }
        return "none";
    }

    auto anchor_kind_from(std::string const& s) -> AnchorRule::Kind
    {
        for (auto k : { AnchorRule::Kind::None, AnchorRule::Kind::Constant, AnchorRule::Kind::Coordinate,
                 AnchorRule::Kind::HalfCoordinate, AnchorRule::Kind::MinCoordinates }) {
            if (anchor_kind_name(k) == s) { return k; }
        }
        throw DataError("unknown anchor rule '" + s + "'");
    }
} // namespace

auto constraint_to_json(Constraint const& c) -> nlohmann::json
{
    nlohmann::json doc;
    doc["name"] = c.name;
    doc["kind"] = to_string(c.kind);
    doc["sense"] = c.sense;
    doc["curvature"] = c.curvature == Curvature::ConcaveDown ? "concave_down" : "decreasing_convex";
    doc["weight"] = c.weight;
    auto clauses = nlohmann::json::array();
    for (auto const& r : c.clauses) {
        nlohmann::json cl;
        auto box = nlohmann::json::array();
        for (auto const& iv : r.box) { box.push_back({ iv.lo, iv.hi }); }
        cl["box"] = box;
        cl["ties"] = r.ties;
        cl["anchor"] = { { "kind", anchor_kind_name(r.anchor.kind) }, { "value", r.anchor.value }, { "i", r.anchor.i }, { "j", r.anchor.j } };
        cl["step_dim"] = r.step_dim;
        cl["delta"] = r.delta;
        cl["swap"] = { r.swap.first, r.swap.second };
        auto pins = nlohmann::json::array();
        for (auto const& [x, y] : r.pins) { pins.push_back({ { "x", x }, { "y", y } }); }
        cl["pins"] = pins;
        clauses.push_back(cl);
    }
    doc["clauses"] = clauses;
    auto samples = nlohmann::json::array();
    for (auto const& s : c.samples) {
        samples.push_back({ { "points", s.points }, { "anchor", s.anchor } });
    }
    doc["samples"] = samples;
    return doc;
}

auto constraint_from_json(nlohmann::json const& doc) -> Constraint
{
    Constraint c;
    try {
        c.name = doc.at("name").get<std::string>();
        c.kind = constraint_kind_from_string(doc.at("kind").get<std::string>());
        c.sense = doc.value("sense", 1);
        c.curvature = doc.value("curvature", std::string("concave_down")) == "concave_down" ? Curvature::ConcaveDown : Curvature::DecreasingConvex;
        c.weight = doc.value("weight", 1.0);
        for (auto const& cl : doc.value("clauses", nlohmann::json::array())) {
            SampleRule r;
            for (auto const& iv : cl.at("box")) { r.box.push_back({ iv.at(0).get<double>(), iv.at(1).get<double>() }); }
            r.ties = cl.value("ties", std::vector<std::pair<std::size_t, std::size_t>> {});
            auto const& a = cl.at("anchor");
            r.anchor = { anchor_kind_from(a.at("kind").get<std::string>()), a.at("value").get<double>(), a.at("i").get<std::size_t>(), a.at("j").get<std::size_t>() };
            r.step_dim = cl.value("step_dim", std::size_t { 0 });
            r.delta = cl.value("delta", 0.0);
            r.swap = { cl.at("swap").at(0).get<std::size_t>(), cl.at("swap").at(1).get<std::size_t>() };
            for (auto const& p : cl.value("pins", nlohmann::json::array())) {
                r.pins.emplace_back(p.at("x").get<std::vector<double>>(), p.at("y").get<double>());
            }
            c.clauses.push_back(std::move(r));
        }
        for (auto const& s : doc.value("samples", nlohmann::json::array())) {
            c.samples.push_back({ s.at("points").get<std::vector<std::vector<double>>>(), s.at("anchor").get<double>() });
        }
    } catch (nlohmann::json::exception const& e) {
        throw DataError(std::string("malformed constraint document: ") + e.what());
    }
    return c;
}

auto constraints_to_json(ConstraintSet const& set) -> nlohmann::json
{
    auto arr = nlohmann::json::array();
    for (auto const& c : set.constraints) { arr.push_back(constraint_to_json(c)); }
    return arr;
}

auto constraints_from_json(nlohmann::json const& doc) -> ConstraintSet
{
    ConstraintSet set;
    for (auto const& c : doc) { set.constraints.push_back(constraint_from_json(c)); }
    return set;
}

} // namespace eqlsr
