// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/extract.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "eqlsr/errors.hpp"

namespace eqlsr {

auto make_constant(double v) -> ExprPtr
{
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Constant;
    e->value = v;
    return e;
}

auto make_variable(std::size_t index, std::string name) -> ExprPtr
{
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Variable;
    e->var = index;
    e->name = std::move(name);
    return e;
}

auto make_unary(NodeKind kind, ExprPtr arg) -> ExprPtr
{
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->args = { std::move(arg) };
    return e;
}

auto make_binary(NodeKind kind, ExprPtr a, ExprPtr b, double guard) -> ExprPtr
{
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->args = { std::move(a), std::move(b) };
    if (kind == NodeKind::Div) { e->value = guard; }
    return e;
}

auto make_add(std::vector<Term> terms, double constant) -> ExprPtr
{
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Add;
    e->terms = std::move(terms);
    e->value = constant;
    return e;
}

auto to_expression(Network const& net, double threshold) -> ExprPtr
{
    auto const report = activity(net, threshold);
    auto const w = net.weights();
    auto const& zs = net.znodes();
    auto const& units = net.units();
    auto const& names = net.spec().input_names;

    std::vector<ExprPtr> value_expr(net.num_values());
    for (std::size_t i = 0; i < net.num_inputs(); ++i) {
        value_expr[i] = make_variable(i, names[i]);
    }
    auto const zero = make_constant(0.0);

    auto z_sum = [&](std::size_t zi) {
        auto const& zn = zs[zi];
        std::vector<Term> terms;
        for (std::size_t j = 0; j < zn.width; ++j) {
            auto const v = w[zn.offset + j];
            if (std::abs(v) >= threshold) {
                terms.push_back({ v, value_expr[j] ? value_expr[j] : zero });
            }
        }
        auto const b = w[zn.bias_index()];
        return make_add(std::move(terms), std::abs(b) >= threshold ? b : 0.0);
    };

    for (std::size_t u = 0; u + 1 < units.size(); ++u) {
        auto const& slot = units[u];
        if (!report.unit_active[u]) {
            value_expr[slot.value_index] = zero;
            continue;
        }
        switch (slot.kind) {
        case UnitKind::Sin:
            value_expr[slot.value_index] = make_unary(NodeKind::Sin, z_sum(slot.first_z));
            break;
        case UnitKind::Tanh:
            value_expr[slot.value_index] = make_unary(NodeKind::Tanh, z_sum(slot.first_z));
            break;
        case UnitKind::Arctan:
            value_expr[slot.value_index] = make_unary(NodeKind::Arctan, z_sum(slot.first_z));
            break;
        case UnitKind::Identity:
            value_expr[slot.value_index] = z_sum(slot.first_z);
            break;
        case UnitKind::Multiply:
            value_expr[slot.value_index] = make_binary(NodeKind::Mul, z_sum(slot.first_z), z_sum(slot.first_z + 1));
            break;
        case UnitKind::Divide:
            value_expr[slot.value_index] = make_binary(NodeKind::Div, z_sum(slot.first_z), z_sum(slot.first_z + 1), net.division_guard());
            break;
        }
    }

    auto const& out = net.output_unit();
    auto root = z_sum(out.first_z);
    if (root->terms.empty()) {
        return make_constant(root->value);
    }
    return root;
}

auto eval_expression(Expr const& e, std::span<double const> x) -> double
{
    switch (e.kind) {
    case NodeKind::Constant:
        return e.value;
    case NodeKind::Variable:
        return x[e.var];
    case NodeKind::Sin:
        return std::sin(eval_expression(*e.args[0], x));
    case NodeKind::Tanh:
        return std::tanh(eval_expression(*e.args[0], x));
    case NodeKind::Arctan:
        return std::atan(eval_expression(*e.args[0], x));
    case NodeKind::Add: {
        double s = 0.0;
        for (auto const& t : e.terms) { s += t.coef * eval_expression(*t.child, x); }
        return s + e.value;
    }
    case NodeKind::Mul:
        return eval_expression(*e.args[0], x) * eval_expression(*e.args[1], x);
    case NodeKind::Div: {
        auto const b = eval_expression(*e.args[1], x);
        return b > e.value ? eval_expression(*e.args[0], x) / b : 0.0;
    }
    }
    return 0.0;
}

auto structurally_equal(Expr const& a, Expr const& b) -> bool
{
    if (&a == &b) { return true; }
    if (a.kind != b.kind || a.value != b.value) { return false; }
    switch (a.kind) {
    case NodeKind::Constant:
        return true;
    case NodeKind::Variable:
        return a.var == b.var;
    case NodeKind::Add:
        if (a.terms.size() != b.terms.size()) { return false; }
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            if (a.terms[i].coef != b.terms[i].coef || !structurally_equal(*a.terms[i].child, *b.terms[i].child)) {
                return false;
            }
        }
        return true;
    default:
        if (a.args.size() != b.args.size()) { return false; }
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (!structurally_equal(*a.args[i], *b.args[i])) { return false; }
        }
        return true;
    }
}

namespace {
    auto is_odd_function(NodeKind k) -> bool
    {
        return k == NodeKind::Sin || k == NodeKind::Tanh || k == NodeKind::Arctan;
    }

    auto apply_function(NodeKind k, double v) -> double
    {
        switch (k) {
        case NodeKind::Sin:
            return std::sin(v);
        case NodeKind::Tanh:
            return std::tanh(v);
        default:
            return std::atan(v);
        }
    }

    // Splits e into k * core. A null core means e is the constant k.
    auto split_scalar(ExprPtr const& e) -> std::pair<double, ExprPtr>
    {
        if (e->kind == NodeKind::Constant) { return { e->value, nullptr }; }
        if (e->kind == NodeKind::Add && e->terms.size() == 1 && e->value == 0.0) {
            return { e->terms[0].coef, e->terms[0].child };
        }
        return { 1.0, e };
    }

    auto scaled(double k, ExprPtr core) -> ExprPtr
    {
        if (!core || k == 0.0) { return make_constant(core ? 0.0 : k); }
        if (k == 1.0) { return core; }
        return make_add({ { k, std::move(core) } }, 0.0);
    }

    auto negate_sum(Expr const& e) -> ExprPtr
    {
        std::vector<Term> terms;
        for (auto const& t : e.terms) { terms.push_back({ -t.coef, t.child }); }
        return make_add(std::move(terms), -e.value);
    }

    class Simplifier {
    public:
        auto run(ExprPtr const& e) -> ExprPtr
        {
            if (auto it = memo_.find(e.get()); it != memo_.end()) { return it->second; }
            auto out = step(e);
            memo_.emplace(e.get(), out);
            return out;
        }

    private:
        auto step(ExprPtr const& e) -> ExprPtr
        {
            switch (e->kind) {
            case NodeKind::Constant:
            case NodeKind::Variable:
                return e;
            case NodeKind::Sin:
            case NodeKind::Tanh:
            case NodeKind::Arctan:
                return function(e->kind, run(e->args[0]));
            case NodeKind::Add:
                return sum(*e);
            case NodeKind::Mul:
                return product(run(e->args[0]), run(e->args[1]));
            case NodeKind::Div:
                return quotient(run(e->args[0]), run(e->args[1]), e->value);
            }
            return e;
        }

        static auto function(NodeKind kind, ExprPtr arg) -> ExprPtr
        {
            if (arg->kind == NodeKind::Constant) {
                return make_constant(apply_function(kind, arg->value));
            }
            if (is_odd_function(kind) && arg->kind == NodeKind::Add && !arg->terms.empty() && arg->terms.front().coef < 0.0) {
                return make_add({ { -1.0, make_unary(kind, negate_sum(*arg)) } }, 0.0);
            }
            return make_unary(kind, std::move(arg));
        }

        auto sum(Expr const& e) -> ExprPtr
        {
            std::vector<Term> terms;
            double constant = e.value;
            auto push = [&terms](double coef, ExprPtr const& child) {
                for (auto& t : terms) {
                    if (structurally_equal(*t.child, *child)) {
                        t.coef += coef;
                        return;
                    }
                }
                terms.push_back({ coef, child });
            };
            for (auto const& t : e.terms) {
                auto ch = run(t.child);
                if (ch->kind == NodeKind::Constant) {
                    constant += t.coef * ch->value;
                } else if (ch->kind == NodeKind::Add) {
                    for (auto const& inner : ch->terms) { push(t.coef * inner.coef, inner.child); }
                    constant += t.coef * ch->value;
                } else {
                    push(t.coef, ch);
                }
            }
            std::erase_if(terms, [](Term const& t) { return t.coef == 0.0; });
            if (terms.empty()) { return make_constant(constant); }
            if (terms.size() == 1 && constant == 0.0 && terms[0].coef == 1.0) { return terms[0].child; }
            return make_add(std::move(terms), constant);
        }

        static auto product(ExprPtr const& a, ExprPtr const& b) -> ExprPtr
        {
            auto [ka, ca] = split_scalar(a);
            auto [kb, cb] = split_scalar(b);
            auto const k = ka * kb;
            if (!ca && !cb) { return make_constant(k); }
            if (!ca) { return scaled(k, cb); }
            if (!cb) { return scaled(k, ca); }
            return scaled(k, make_binary(NodeKind::Mul, ca, cb));
        }

        static auto quotient(ExprPtr const& n, ExprPtr const& d, double guard) -> ExprPtr
        {
            if (d->kind == NodeKind::Constant) {
                if (!(d->value > guard)) { return make_constant(0.0); }
                auto [kn, cn] = split_scalar(n);
                return cn ? scaled(kn / d->value, cn) : make_constant(kn / d->value);
            }
            if (n->kind == NodeKind::Constant) {
                if (n->value == 0.0) { return make_constant(0.0); }
                return make_binary(NodeKind::Div, n, d, guard);
            }
            auto [kn, cn] = split_scalar(n);
            return scaled(kn, make_binary(NodeKind::Div, cn, d, guard));
        }

        std::unordered_map<Expr const*, ExprPtr> memo_;
    };
} // namespace

auto simplify(ExprPtr const& e) -> ExprPtr
{
    auto cur = e;
    for (int i = 0; i < 64; ++i) {
        Simplifier s;
        auto next = s.run(cur);
        if (structurally_equal(*next, *cur)) { return next; }
        cur = std::move(next);
    }
    return cur;
}

auto complexity(ExprPtr const& e) -> ExprComplexity
{
    ExprComplexity c;
    if (e->kind == NodeKind::Constant) {
        c.links = e->value != 0.0 ? 1 : 0;
        return c;
    }
    std::unordered_set<Expr const*> seen;
    std::unordered_set<Expr const*> unit_sums;
    std::vector<Expr const*> stack { e.get() };
    while (!stack.empty()) {
        auto const* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) { continue; }
        switch (n->kind) {
        case NodeKind::Add:
            c.links += n->terms.size() + (n->value != 0.0 ? 1 : 0);
            for (auto const& t : n->terms) {
                if (t.child->kind == NodeKind::Add) { unit_sums.insert(t.child.get()); }
                stack.push_back(t.child.get());
            }
            break;
        case NodeKind::Sin:
        case NodeKind::Tanh:
        case NodeKind::Arctan:
        case NodeKind::Mul:
        case NodeKind::Div:
            ++c.units;
            for (auto const& a : n->args) { stack.push_back(a.get()); }
            break;
        default:
            break;
        }
    }
    c.units += unit_sums.size();
    return c;
}

namespace {
    auto function_name(NodeKind k) -> std::string
    {
        switch (k) {
        case NodeKind::Sin:
            return "sin";
        case NodeKind::Tanh:
            return "tanh";
        default:
            return "arctan";
        }
    }

    auto render_plain(Expr const& e) -> std::string;

    // Operand of a product or quotient.
    auto plain_factor(Expr const& e, bool right_of_div) -> std::string
    {
        auto s = render_plain(e);
        bool wrap = e.kind == NodeKind::Add || (e.kind == NodeKind::Constant && e.value < 0.0)
            || (right_of_div && (e.kind == NodeKind::Mul || e.kind == NodeKind::Div));
        return wrap ? "(" + s + ")" : s;
    }

    auto plain_term(double coef, Expr const& child) -> std::string
    {
        auto const f = plain_factor(child, false);
        if (coef == 1.0) { return f; }
        return format_double(coef) + "*" + f;
    }

    auto render_plain(Expr const& e) -> std::string
    {
        switch (e.kind) {
        case NodeKind::Constant:
            return format_double(e.value);
        case NodeKind::Variable:
            return e.name;
        case NodeKind::Sin:
        case NodeKind::Tanh:
        case NodeKind::Arctan:
            return function_name(e.kind) + "(" + render_plain(*e.args[0]) + ")";
        case NodeKind::Mul:
            return plain_factor(*e.args[0], false) + "*" + plain_factor(*e.args[1], true);
        case NodeKind::Div:
            return plain_factor(*e.args[0], false) + "/" + plain_factor(*e.args[1], true);
        case NodeKind::Add: {
            std::string s;
            for (auto const& t : e.terms) {
                if (s.empty()) {
                    s = t.coef < 0.0 ? "-" + plain_term(-t.coef, *t.child) : plain_term(t.coef, *t.child);
                } else {
                    s += t.coef < 0.0 ? " - " + plain_term(-t.coef, *t.child) : " + " + plain_term(t.coef, *t.child);
                }
            }
            if (s.empty()) { return format_double(e.value); }
            if (e.value != 0.0) {
                s += e.value < 0.0 ? " - " + format_double(-e.value) : " + " + format_double(e.value);
            }
            return s;
        }
        }
        return {};
    }

    auto render_latex(Expr const& e) -> std::string;

    auto latex_factor(Expr const& e) -> std::string
    {
        auto s = render_latex(e);
        bool wrap = e.kind == NodeKind::Add || (e.kind == NodeKind::Constant && e.value < 0.0);
        return wrap ? "\\left(" + s + "\\right)" : s;
    }

    auto latex_term(double coef, Expr const& child) -> std::string
    {
        auto const f = latex_factor(child);
        if (coef == 1.0) { return f; }
        return format_double(coef) + " \\cdot " + f;
    }

    auto render_latex(Expr const& e) -> std::string
    {
        switch (e.kind) {
        case NodeKind::Constant:
            return format_double(e.value);
        case NodeKind::Variable:
            return e.name;
        case NodeKind::Sin:
        case NodeKind::Tanh:
        case NodeKind::Arctan:
            return "\\" + function_name(e.kind) + "\\left(" + render_latex(*e.args[0]) + "\\right)";
        case NodeKind::Mul:
            return latex_factor(*e.args[0]) + " \\cdot " + latex_factor(*e.args[1]);
        case NodeKind::Div:
            return "\\frac{" + render_latex(*e.args[0]) + "}{" + render_latex(*e.args[1]) + "}";
        case NodeKind::Add: {
            std::string s;
            for (auto const& t : e.terms) {
                if (s.empty()) {
                    s = t.coef < 0.0 ? "-" + latex_term(-t.coef, *t.child) : latex_term(t.coef, *t.child);
                } else {
                    s += t.coef < 0.0 ? " - " + latex_term(-t.coef, *t.child) : " + " + latex_term(t.coef, *t.child);
                }
            }
            if (s.empty()) { return format_double(e.value); }
            if (e.value != 0.0) {
                s += e.value < 0.0 ? " - " + format_double(-e.value) : " + " + format_double(e.value);
            }
            return s;
        }
        }
        return {};
    }
} // namespace

auto render(Expr const& e, RenderFormat format) -> std::string
{
    return format == RenderFormat::Plain ? render_plain(e) : render_latex(e);
}

namespace {
    class Parser {
    public:
        Parser(std::string_view text, std::vector<std::string> const& names)
            : text_(text)
            , names_(names)
        {
        }

        auto parse() -> ExprPtr
        {
            auto e = sum();
            skip_space();
            if (pos_ != text_.size()) { fail("unexpected trailing input"); }
            return e;
        }

    private:
        [[noreturn]] void fail(std::string const& what) const
        {
            throw DataError("expression parse error at " + std::to_string(pos_) + ": " + what);
        }

        void skip_space()
        {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) { ++pos_; }
        }

        auto peek() -> char
        {
            skip_space();
            return pos_ < text_.size() ? text_[pos_] : '\0';
        }

        auto sum() -> ExprPtr
        {
            std::vector<Term> terms;
            double constant = 0.0;
            double sign = 1.0;
            if (peek() == '-') {
                ++pos_;
                sign = -1.0;
            } else if (peek() == '+') {
                ++pos_;
            }
            for (;;) {
                auto p = product();
                auto [k, core] = split_scalar(p);
                if (!core) {
                    constant += sign * k;
                } else {
                    terms.push_back({ sign * k, core });
                }
                auto const c = peek();
                if (c == '+' || c == '-') {
                    ++pos_;
                    sign = c == '+' ? 1.0 : -1.0;
                } else {
                    break;
                }
            }
            if (terms.empty()) { return make_constant(constant); }
            if (terms.size() == 1 && constant == 0.0 && terms[0].coef == 1.0) { return terms[0].child; }
            return make_add(std::move(terms), constant);
        }

        auto product() -> ExprPtr
        {
            auto lhs = unary();
            for (;;) {
                auto const c = peek();
                if (c == '*') {
                    ++pos_;
                    auto rhs = unary();
                    auto [ka, ca] = split_scalar(lhs);
                    auto [kb, cb] = split_scalar(rhs);
                    if (!ca && !cb) {
                        lhs = make_constant(ka * kb);
                    } else if (!ca) {
                        lhs = make_add({ { ka * kb, cb } }, 0.0);
                    } else if (!cb && lhs->kind == NodeKind::Add) {
                        lhs = make_add({ { ka * kb, ca } }, 0.0);
                    } else if (!cb) {
                        lhs = make_add({ { kb, lhs } }, 0.0);
                    } else {
                        lhs = make_binary(NodeKind::Mul, lhs, rhs);
                    }
                } else if (c == '/') {
                    ++pos_;
                    lhs = make_binary(NodeKind::Div, lhs, unary());
                } else {
                    return lhs;
                }
            }
        }

        auto unary() -> ExprPtr
        {
            if (peek() == '-') {
                ++pos_;
                auto e = unary();
                if (e->kind == NodeKind::Constant) { return make_constant(-e->value); }
                return make_add({ { -1.0, e } }, 0.0);
            }
            return primary();
        }

        auto primary() -> ExprPtr
        {
            auto const c = peek();
            if (c == '(') {
                ++pos_;
                auto e = sum();
                if (peek() != ')') { fail("expected ')'"); }
                ++pos_;
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') {
                double v = 0.0;
                auto const* begin = text_.data() + pos_;
                auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
                if (ec != std::errc {}) { fail("malformed number"); }
                pos_ += static_cast<std::size_t>(ptr - begin);
                return make_constant(v);
            }
            if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
                auto const start = pos_;
                while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '_')) { ++pos_; }
                std::string const id(text_.substr(start, pos_ - start));
                if (peek() == '(') {
                    NodeKind kind {};
                    if (id == "sin") {
                        kind = NodeKind::Sin;
                    } else if (id == "tanh") {
                        kind = NodeKind::Tanh;
                    } else if (id == "arctan") {
                        kind = NodeKind::Arctan;
                    } else {
                        fail("unknown function '" + id + "'");
                    }
                    ++pos_;
                    auto arg = sum();
                    if (peek() != ')') { fail("expected ')'"); }
                    ++pos_;
                    return make_unary(kind, std::move(arg));
                }
                auto it = std::find(names_.begin(), names_.end(), id);
                if (it == names_.end()) { fail("unknown variable '" + id + "'"); }
                return make_variable(static_cast<std::size_t>(it - names_.begin()), id);
            }
            fail("unexpected character");
        }

        std::string_view text_;
        std::vector<std::string> const& names_;
        std::size_t pos_ { 0 };
    };
} // namespace

auto parse_expression(std::string_view text, std::vector<std::string> const& names) -> ExprPtr
{
    return Parser(text, names).parse();
}

auto min_denominator(ExprPtr const& e, std::span<std::vector<double> const> points) -> double
{
    std::vector<Expr const*> divs;
    std::unordered_set<Expr const*> seen;
    std::vector<Expr const*> stack { e.get() };
    while (!stack.empty()) {
        auto const* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) { continue; }
        if (n->kind == NodeKind::Div) { divs.push_back(n); }
        for (auto const& t : n->terms) { stack.push_back(t.child.get()); }
        for (auto const& a : n->args) { stack.push_back(a.get()); }
    }
    auto best = std::numeric_limits<double>::infinity();
    for (auto const* d : divs) {
        for (auto const& p : points) {
            best = std::min(best, eval_expression(*d->args[1], p));
        }
    }
    return best;
}

} // namespace eqlsr
