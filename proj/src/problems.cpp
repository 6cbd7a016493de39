// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/problems.hpp"

#include <algorithm>
#include <array>
#include <string_view>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "eqlsr/errors.hpp"

namespace eqlsr {

auto params_to_json(ProblemParams const& p) -> nlohmann::json
{
    return { { "name", p.name }, { "seed", p.seed }, { "size", p.size }, { "current", p.current }, { "normalize", p.normalize },
        { "noise", p.noise } };
}

auto params_from_json(nlohmann::json const& doc) -> ProblemParams
{
    ProblemParams p;
    auto field = [&doc](char const* key, auto& out) {
        if (!doc.contains(key)) { return; }
        try {
            doc.at(key).get_to(out);
        } catch (nlohmann::json::exception const&) {
            throw ConfigError(std::string("problem.") + key + ": wrong type");
        }
    };
    if (!doc.is_object() || !doc.contains("name")) {
        throw ConfigError("problem.name: missing");
    }
    for (auto const& [key, _] : doc.items()) {
        static constexpr std::array known { "name", "seed", "size", "current", "normalize", "noise" };
        if (std::ranges::find(known, std::string_view(key)) == known.end()) {
            throw ConfigError("problem." + key + ": unknown field");
        }
    }
    field("name", p.name);
    field("seed", p.seed);
    field("size", p.size);
    field("current", p.current);
    field("normalize", p.normalize);
    field("noise", p.noise);
    return p;
}

auto ProblemBundle::manifest() const -> nlohmann::json
{
    auto boxes = [](std::vector<Box> const& u) {
        auto arr = nlohmann::json::array();
        for (auto const& b : u) {
            auto box = nlohmann::json::array();
            for (auto const& iv : b) { box.push_back({ iv.lo, iv.hi }); }
            arr.push_back(box);
        }
        return arr;
    };
    return { { "generator", params.name }, { "params", params_to_json(params) }, { "inputs", input_names },
        { "train_domain", boxes(train_domain) }, { "extrapolation_domain", boxes(extrapolation_domain) },
        { "sizes",
            { { "train", train.size() }, { "valid", valid.size() }, { "interp", interp.size() }, { "extrap", extrap.size() },
                { "extrap_valid", extrap_valid.size() }, { "constraint_samples", constraints.total_samples() } } },
        { "architecture", spec_to_json(architecture) } };
}

auto MagicLaw::operator()(std::span<double const> k) const -> double
{
    auto const kappa = k[0];
    auto const f = d * std::sin(c * std::atan(b * (1.0 - e) * kappa + e * std::atan(b * kappa)));
    return normalized ? f : m * g * f;
}

auto MagmanLaw::c1() const -> double
{
    auto const q = 0.075 * 0.075 + c2;
    return 1e-3 * q * q * q / (current * 0.075);
}

auto MagmanLaw::operator()(std::span<double const> x) const -> double
{
    auto const v = x[0];
    auto const q = v * v + c2;
    return -current * c1() * v / (q * q * q);
}

auto UnicycleLaw::operator()(std::span<double const> s) const -> double
{
    return s[0] + ts * s[3] * std::cos(s[2]);
}

namespace {
    auto draw_in(Box const& box, std::mt19937_64& rng) -> std::vector<double>
    {
        std::vector<double> p(box.size());
        for (std::size_t d = 0; d < box.size(); ++d) {
            std::uniform_real_distribution<double> u(box[d].lo, box[d].hi);
            p[d] = box[d].lo == box[d].hi ? box[d].lo : u(rng);
        }
        return p;
    }

    // `count` clean samples spread over the boxes of a union (remainder to the first boxes).
    auto sample_union(std::vector<Box> const& boxes, std::size_t count, ModelEval const& law, std::mt19937_64& rng) -> Dataset
    {
        Dataset out(boxes.front().size());
        for (std::size_t b = 0; b < boxes.size(); ++b) {
            auto const share = count / boxes.size() + (b < count % boxes.size() ? 1 : 0);
            for (std::size_t i = 0; i < share; ++i) {
                auto const x = draw_in(boxes[b], rng);
                out.add(x, law(x));
            }
        }
        return out;
    }

    auto stddev(std::span<double const> v) -> double
    {
        auto const mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double s = 0.0;
        for (auto x : v) { s += (x - mean) * (x - mean); }
        return std::sqrt(s / static_cast<double>(v.size()));
    }

    void add_noise(Dataset& data, double sigma, std::mt19937_64& rng)
    {
        if (sigma <= 0.0) { return; }
        std::normal_distribution<double> n(0.0, sigma);
        for (std::size_t i = 0; i < data.size(); ++i) { data.y_mut(i) += n(rng); }
    }

    // Shuffles rows and cuts the first `n_first` into `first`, the rest into `second`.
    void split(Dataset const& all, std::size_t n_first, std::mt19937_64& rng, Dataset& first, Dataset& second)
    {
        std::vector<std::size_t> idx(all.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        first = Dataset(all.dim());
        second = Dataset(all.dim());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_first ? first : second).add(all.x(idx[i]), all.y(idx[i]));
        }
    }

    auto make_constraint(std::string name, ConstraintKind kind, std::vector<SampleRule> clauses, std::size_t count, std::mt19937_64& rng,
        int sense = 1, Curvature curvature = Curvature::ConcaveDown) -> Constraint
    {
        Constraint c;
        c.name = std::move(name);
        c.kind = kind;
        c.sense = sense;
        c.curvature = curvature;
        c.clauses = std::move(clauses);
        c.samples = generate_samples(c, count, rng);
        return c;
    }
} // namespace

auto gen_resistors(ProblemParams const& p) -> ProblemBundle
{
    if (p.size != 10 && p.size != 500) {
        throw ConfigError("problem.size: resistors supports 10 or 500 samples");
    }
    std::mt19937_64 rng(p.seed);
    ProblemBundle b;
    b.params = p;
    b.input_names = { "r1", "r2" };
    Box const box { { 1e-4, 20.0 }, { 1e-4, 20.0 } };
    Box const ext { { 20.0, 40.0 }, { 20.0, 40.0 } };
    b.train_domain = { box };
    b.extrapolation_domain = { ext };
    b.reference = ResistorsLaw {};
    b.architecture = informed_architecture(b.input_names);

    auto all = sample_union(b.train_domain, p.size, b.reference, rng);
    add_noise(all, 0.05 * stddev(all.targets()), rng);
    split(all, p.size == 10 ? 8 : 350, rng, b.train, b.valid);
    b.interp = sample_union(b.train_domain, 500, b.reference, rng);
    b.extrap_valid = sample_union(b.extrapolation_domain, 40, b.reference, rng);
    b.extrap = sample_union(b.extrapolation_domain, 500, b.reference, rng);

    SampleRule any { .box = box };
    b.constraints.constraints.push_back(make_constraint("symmetry", ConstraintKind::Symmetry, { any }, 50, rng));
    SampleRule diag { .box = box, .ties = { { 1, 0 } }, .anchor = { AnchorRule::Kind::HalfCoordinate, 0.0, 0, 0 } };
    b.constraints.constraints.push_back(make_constraint("equal_halves", ConstraintKind::EqualityInvariant, { diag }, 50, rng));
    SampleRule below { .box = box, .anchor = { AnchorRule::Kind::MinCoordinates, 0.0, 0, 1 } };
    b.constraints.constraints.push_back(make_constraint("below_inputs", ConstraintKind::InequalityBound, { below }, 50, rng, 1));
    return b;
}

auto gen_magic(ProblemParams const& p) -> ProblemBundle
{
    std::mt19937_64 rng(p.seed);
    ProblemBundle b;
    b.params = p;
    b.input_names = { "kappa" };
    b.train_domain = { { { 0.0, 0.02 } }, { { 0.2, 0.99 } } };
    b.extrapolation_domain = { { { 0.03, 0.1 } } };
    MagicLaw law { .normalized = p.normalize };
    b.reference = law;
    b.architecture = general_architecture(b.input_names, true);
    auto const scale = p.normalize ? 1.0 : MagicLaw::m * MagicLaw::g;

    auto left = sample_union({ { { 0.0, 0.02 } } }, 50, b.reference, rng);
    auto right = sample_union({ { { 0.2, 0.99 } } }, 50, b.reference, rng);
    auto peak = sample_union(b.extrapolation_domain, 10, b.reference, rng);
    add_noise(left, 0.0025 * scale, rng);
    add_noise(right, 0.0025 * scale, rng);
    add_noise(peak, 0.005 * scale, rng);
    split(left.merged(right).merged(peak), 88, rng, b.train, b.valid);
    b.interp = sample_union(b.train_domain, 200, b.reference, rng);
    b.extrap_valid = sample_union(b.extrapolation_domain, 40, b.reference, rng);
    b.extrap = sample_union(b.extrapolation_domain, 100, b.reference, rng);

    SampleRule origin { .box = { { 0.0, 0.0 } }, .pins = { { { 0.0 }, 0.0 } } };
    b.constraints.constraints.push_back(make_constraint("origin", ConstraintKind::ValuePin, { origin }, 50, rng));
    SampleRule tail { .box = { { 0.2, 0.99 } }, .step_dim = 0, .delta = 0.001 };
    b.constraints.constraints.push_back(
        make_constraint("tail_decreasing_convex", ConstraintKind::CurvatureTriple, { tail }, 50, rng, 1, Curvature::DecreasingConvex));
    SampleRule crest { .box = { { 0.03, 0.1 } }, .step_dim = 0, .delta = 0.001 };
    b.constraints.constraints.push_back(make_constraint("peak_concave", ConstraintKind::CurvatureTriple, { crest }, 50, rng, 1, Curvature::ConcaveDown));
    return b;
}

auto gen_magman(ProblemParams const& p) -> ProblemBundle
{
    if (!(p.current > 0.0)) {
        throw ConfigError("problem.current: must be positive");
    }
    std::mt19937_64 rng(p.seed);
    ProblemBundle b;
    b.params = p;
    b.input_names = { "x" };
    b.train_domain = { { { -0.027, 0.027 } } };
    b.extrapolation_domain = { { { -0.075, -0.027 } }, { { 0.027, 0.075 } } };
    b.reference = MagmanLaw { .current = p.current };
    b.architecture = general_architecture(b.input_names);

    auto all = sample_union(b.train_domain, 601, b.reference, rng);
    auto const sigma = 0.01 * stddev(all.targets());
    add_noise(all, sigma, rng);
    split(all, 400, rng, b.train, b.valid);
    b.interp = sample_union(b.train_domain, 257, b.reference, rng);
    add_noise(b.interp, sigma, rng);
    b.extrap_valid = sample_union(b.extrapolation_domain, 40, b.reference, rng);
    b.extrap = sample_union(b.extrapolation_domain, 200, b.reference, rng);

    auto pair_rule = [](double lo, double hi) { return SampleRule { .box = { { lo, hi } }, .step_dim = 0, .delta = 1e-3 * (hi - lo) }; };
    b.constraints.constraints.push_back(make_constraint("positive_left", ConstraintKind::SignConstraint, { SampleRule { .box = { { -0.075, 0.0 } } } }, 50, rng, 1));
    b.constraints.constraints.push_back(make_constraint("negative_right", ConstraintKind::SignConstraint, { SampleRule { .box = { { 0.0, 0.075 } } } }, 50, rng, -1));
    b.constraints.constraints.push_back(
        make_constraint("increasing_outer", ConstraintKind::MonotonicityPair, { pair_rule(-0.075, -0.008), pair_rule(0.008, 0.075) }, 50, rng, 1));
    b.constraints.constraints.push_back(make_constraint("decreasing_inner", ConstraintKind::MonotonicityPair, { pair_rule(-0.008, 0.008) }, 50, rng, -1));
    SampleRule pins { .box = { { -0.075, 0.075 } }, .pins = { { { 0.0 }, 0.0 }, { { -0.075 }, 1e-3 }, { { 0.075 }, -1e-3 } } };
    b.constraints.constraints.push_back(make_constraint("pins", ConstraintKind::ValuePin, { pins }, 3, rng));
    return b;
}

namespace {
    auto simulate(std::mt19937_64& rng, std::size_t steps) -> Sequence
    {
        std::uniform_real_distribution<double> vf(0.0, 0.3);
        std::uniform_real_distribution<double> va(-1.0, 1.0);
        Sequence s;
        double x = 0.0;
        double y = 0.0;
        double phi = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            auto const f = vf(rng);
            auto const a = va(rng);
            s.rows.push_back({ x, y, phi, f, a });
            auto const nx = x + UnicycleLaw::ts * f * std::cos(phi);
            auto const ny = y + UnicycleLaw::ts * f * std::sin(phi);
            phi += UnicycleLaw::ts * a;
            x = nx;
            y = ny;
            s.next_x.push_back(x);
        }
        return s;
    }

    auto one_step(Sequence const& s) -> Dataset
    {
        Dataset d(5);
        for (std::size_t k = 0; k < s.rows.size(); ++k) { d.add(s.rows[k], s.next_x[k]); }
        return d;
    }
} // namespace

auto gen_turtlebot(ProblemParams const& p) -> ProblemBundle
{
    std::mt19937_64 rng(p.seed);
    ProblemBundle b;
    b.params = p;
    b.input_names = { "x", "y", "phi", "v_f", "v_a" };
    b.reference = UnicycleLaw {};
    b.architecture = general_architecture(b.input_names);

    std::vector<Sequence> seqs;
    for (int i = 0; i < 5; ++i) { seqs.push_back(simulate(rng, 150)); }
    std::vector<std::size_t> order { 0, 1, 2, 3, 4 };
    std::shuffle(order.begin(), order.end(), rng);

    b.train = one_step(seqs[order[0]]);
    b.valid = one_step(seqs[order[1]]);
    b.valid_sequence = seqs[order[1]];
    b.interp = Dataset(5);
    for (std::size_t i = 2; i < 5; ++i) {
        b.test_sequences.push_back(seqs[order[i]]);
        b.interp = b.interp.merged(one_step(seqs[order[i]]));
    }
    add_noise(b.train, p.noise, rng);
    add_noise(b.valid, p.noise, rng);

    // State limits of the training sequence.
    Box box(5);
    for (std::size_t d = 0; d < 3; ++d) {
        box[d] = { b.train.x(0)[d], b.train.x(0)[d] };
        for (std::size_t i = 0; i < b.train.size(); ++i) {
            box[d].lo = std::min(box[d].lo, b.train.x(i)[d]);
            box[d].hi = std::max(box[d].hi, b.train.x(i)[d]);
        }
    }
    box[3] = { 0.0, 0.3 };
    box[4] = { -1.0, 1.0 };
    b.train_domain = { box };

    Box ext = box;
    for (std::size_t d = 0; d < 3; ++d) {
        auto const half = 0.5 * std::max(box[d].width(), 1e-3);
        ext[d] = { box[d].lo - half, box[d].hi + half };
    }
    b.extrapolation_domain = { ext };
    b.extrap_valid = sample_union(b.extrapolation_domain, 40, b.reference, rng);
    b.extrap = sample_union(b.extrapolation_domain, 200, b.reference, rng);

    AnchorRule const stay { AnchorRule::Kind::Coordinate, 0.0, 0, 0 };
    auto with = [&](std::vector<std::pair<std::size_t, double>> pinned) {
        SampleRule r { .box = box, .anchor = stay };
        for (auto [d, v] : pinned) { r.box[d] = { v, v }; }
        return r;
    };
    auto const half_pi = std::numbers::pi / 2.0;
    b.constraints.constraints.push_back(make_constraint("steady_state", ConstraintKind::EqualityInvariant, { with({ { 3, 0.0 }, { 4, 0.0 } }) }, 50, rng));
    b.constraints.constraints.push_back(make_constraint("axis_parallel", ConstraintKind::EqualityInvariant,
        { with({ { 2, -half_pi }, { 4, 0.0 } }), with({ { 2, half_pi }, { 4, 0.0 } }) }, 50, rng));
    b.constraints.constraints.push_back(make_constraint("turn_on_spot", ConstraintKind::EqualityInvariant, { with({ { 3, 0.0 } }) }, 50, rng));
    return b;
}

auto generate_problem(ProblemParams const& p) -> ProblemBundle
{
    if (p.name == "resistors") { return gen_resistors(p); }
    if (p.name == "magic") { return gen_magic(p); }
    if (p.name == "magman") { return gen_magman(p); }
    if (p.name == "turtlebot") { return gen_turtlebot(p); }
    throw ConfigError("problem.name: unknown problem '" + p.name + "'");
}

void write_bundle(ProblemBundle const& bundle, std::filesystem::path const& dir)
{
    std::filesystem::create_directories(dir);
    auto dump = [&](char const* file, Dataset const& d) {
        std::ofstream os(dir / file, std::ios::binary);
        write_csv(os, d, bundle.input_names);
        if (!os) { throw DataError(std::string("cannot write ") + (dir / file).string()); }
    };
    dump("train.csv", bundle.train);
    dump("valid.csv", bundle.valid);
    dump("interp.csv", bundle.interp);
    dump("extrap.csv", bundle.extrap);
    dump("extrap_valid.csv", bundle.extrap_valid);
    std::ofstream(dir / "constraints.json", std::ios::binary) << constraints_to_json(bundle.constraints).dump(1) << '\n';
    std::ofstream(dir / "manifest.json", std::ios::binary) << bundle.manifest().dump(2) << '\n';
}

auto load_bundle(std::filesystem::path const& dir) -> ProblemBundle
{
    std::ifstream is(dir / "manifest.json");
    if (!is) {
        throw DataError("no manifest.json in " + dir.string());
    }
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (nlohmann::json::exception const& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
    return generate_problem(params_from_json(doc.at("params")));
}

} // namespace eqlsr
