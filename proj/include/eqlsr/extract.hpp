// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_EXTRACT_HPP
#define EQLSR_EXTRACT_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqlsr/dataset.hpp"
#include "eqlsr/netgraph.hpp"

namespace eqlsr {

enum class NodeKind { Constant, Variable, Sin, Tanh, Arctan, Add, Mul, Div };

struct Expr;
using ExprPtr = std::shared_ptr<Expr const>;

struct Term {
    double coef { 1.0 };
    ExprPtr child;
};

// Immutable expression node. Subtrees may be shared (the graph is a DAG when
// one network unit feeds several others).
struct Expr {
    NodeKind kind { NodeKind::Constant };
    double value { 0.0 };        // Constant: the value; Add: the additive constant; Div: the guard
    std::size_t var { 0 };       // Variable index
    std::string name;            // Variable name
    std::vector<Term> terms;     // Add: sum of coef * child, plus value
    std::vector<ExprPtr> args;   // Sin/Tanh/Arctan: one; Mul/Div: two
};

[[nodiscard]] auto make_constant(double v) -> ExprPtr;
[[nodiscard]] auto make_variable(std::size_t index, std::string name) -> ExprPtr;
[[nodiscard]] auto make_unary(NodeKind kind, ExprPtr arg) -> ExprPtr;
[[nodiscard]] auto make_binary(NodeKind kind, ExprPtr a, ExprPtr b, double guard = 1e-4) -> ExprPtr;
[[nodiscard]] auto make_add(std::vector<Term> terms, double constant) -> ExprPtr;

// Transliterates the active part of `net`. Weights below `threshold` and
// units outside the active set read as 0.
[[nodiscard]] auto to_expression(Network const& net, double threshold) -> ExprPtr;

// Constant folding, scalar collection out of products and quotient
// numerators, sum flattening with like-term merging, sign normalization of
// odd functions, zero-term removal; iterated to a fixpoint.
[[nodiscard]] auto simplify(ExprPtr const& e) -> ExprPtr;

// Guarded quotient: a/b when b > guard, else 0.
[[nodiscard]] auto eval_expression(Expr const& e, std::span<double const> x) -> double;

[[nodiscard]] auto structurally_equal(Expr const& a, Expr const& b) -> bool;

struct ExprComplexity {
    std::size_t links { 0 };
    std::size_t units { 0 };
};

// Links: coefficients and non-zero constants of sums (a bare non-zero
// constant counts as one). Units: function, product and quotient nodes, plus
// sums used as terms of another sum. Shared subtrees count once.
[[nodiscard]] auto complexity(ExprPtr const& e) -> ExprComplexity;

enum class RenderFormat { Plain, Latex };
[[nodiscard]] auto render(Expr const& e, RenderFormat format = RenderFormat::Plain) -> std::string;

// Parses the plain form. Identifiers resolve against `names`. Throws DataError.
[[nodiscard]] auto parse_expression(std::string_view text, std::vector<std::string> const& names) -> ExprPtr;

// Smallest denominator value over `points` across every quotient node;
// +infinity when the expression has no quotient.
[[nodiscard]] auto min_denominator(ExprPtr const& e, std::span<std::vector<double> const> points) -> double;

} // namespace eqlsr

#endif
