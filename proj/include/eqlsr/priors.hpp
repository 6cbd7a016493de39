// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_PRIORS_HPP
#define EQLSR_PRIORS_HPP

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqlsr/dataset.hpp"

namespace eqlsr {

enum class ConstraintKind {
    EqualityInvariant, // f(p) = anchor, anchor derived from p (e.g. a state coordinate)
    Symmetry,          // f(p) = f(swap(p))
    InequalityBound,   // f(p) <= anchor (sense +1) or f(p) >= anchor (sense -1)
    SignConstraint,    // f(p) >= 0 (sense +1) or f(p) <= 0 (sense -1)
    MonotonicityPair,  // increasing (sense +1) or decreasing (sense -1) along a step
    CurvatureTriple,   // second-difference shape on (left, centre, right)
    ValuePin,          // f(p) = fixed value
};

enum class Curvature {
    ConcaveDown,      // f(l) - 2 f(c) + f(r) <= 0
    DecreasingConvex, // non-increasing with non-negative second difference
};

[[nodiscard]] auto sample_arity(ConstraintKind kind) noexcept -> std::size_t;
[[nodiscard]] auto to_string(ConstraintKind kind) -> std::string;
[[nodiscard]] auto constraint_kind_from_string(std::string const& name) -> ConstraintKind;

struct Interval {
    double lo { 0.0 };
    double hi { 0.0 };
    [[nodiscard]] auto width() const noexcept -> double { return hi - lo; }
};

struct AnchorRule {
    enum class Kind { None, Constant, Coordinate, HalfCoordinate, MinCoordinates };
    Kind kind { Kind::None };
    double value { 0.0 };
    std::size_t i { 0 };
    std::size_t j { 0 };

    [[nodiscard]] auto evaluate(std::span<double const> point) const -> double;
};

// One clause of a constraint's sampling region. Samples are drawn uniformly in
// `box` (lo == hi pins a coordinate); `ties` copy coordinates after drawing.
struct SampleRule {
    std::vector<Interval> box;
    std::vector<std::pair<std::size_t, std::size_t>> ties; // (dst, src)
    AnchorRule anchor;
    std::size_t step_dim { 0 };
    double delta { 0.0 };
    std::pair<std::size_t, std::size_t> swap { 0, 1 };
    std::vector<std::pair<std::vector<double>, double>> pins;
};

struct ConstraintSample {
    std::vector<std::vector<double>> points; // 1-3 input-space points
    double anchor { 0.0 };

    friend auto operator==(ConstraintSample const&, ConstraintSample const&) -> bool = default;
};

struct Constraint {
    std::string name;
    ConstraintKind kind { ConstraintKind::ValuePin };
    int sense { 1 };
    Curvature curvature { Curvature::ConcaveDown };
    std::vector<SampleRule> clauses;
    std::vector<ConstraintSample> samples;
    double weight { 1.0 };
};

struct ConstraintSet {
    std::vector<Constraint> constraints;

    [[nodiscard]] auto size() const noexcept -> std::size_t { return constraints.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return constraints.empty(); }
    [[nodiscard]] auto total_samples() const noexcept -> std::size_t;
    [[nodiscard]] auto index_of(std::string const& name) const -> std::size_t;
};

// Draws `count` samples for `constraint`, split evenly over its clauses (the
// first clauses take the remainder). Pair/triple steps keep every point inside
// the clause box. ValuePin cycles through the clause pins. Throws on count == 0.
[[nodiscard]] auto generate_samples(Constraint const& constraint, std::size_t count, std::mt19937_64& rng) -> std::vector<ConstraintSample>;

struct ResidualPartials {
    double value { 0.0 };
    std::array<double, 3> d_values { 0.0, 0.0, 0.0 }; // d residual / d f(point_i)
};

// Residual from model outputs at the sample points. Equality kinds give
// |lhs - rhs|, inequality kinds max(violation, 0). Subgradient 0 at kinks.
[[nodiscard]] auto residual_from_values(Constraint const& constraint, ConstraintSample const& sample,
    std::span<double const> values) -> ResidualPartials;
[[nodiscard]] auto residual(Constraint const& constraint, ConstraintSample const& sample, ModelEval const& model) -> double;

// sqrt(mean residual^2) over the constraint's samples. Throws on an empty sample set.
[[nodiscard]] auto violation_rmse(Constraint const& constraint, ModelEval const& model) -> double;
[[nodiscard]] auto violation_rmse(Constraint const& constraint, std::span<double const> residuals) -> double;

[[nodiscard]] auto constraint_to_json(Constraint const& c) -> nlohmann::json;
[[nodiscard]] auto constraint_from_json(nlohmann::json const& doc) -> Constraint;
[[nodiscard]] auto constraints_to_json(ConstraintSet const& set) -> nlohmann::json;
[[nodiscard]] auto constraints_from_json(nlohmann::json const& doc) -> ConstraintSet;

} // namespace eqlsr

#endif
