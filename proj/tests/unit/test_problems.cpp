// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "eqlsr/errors.hpp"
#include "eqlsr/problems.hpp"

using namespace eqlsr;

namespace {

auto params(std::string name, std::uint64_t seed = 1) -> ProblemParams
{
    ProblemParams p;
    p.name = std::move(name);
    p.seed = seed;
    return p;
}

auto in_union(std::span<double const> x, std::vector<Box> const& boxes) -> bool
{
    for (auto const& b : boxes) {
        bool in = true;
        for (std::size_t d = 0; d < x.size(); ++d) { in = in && x[d] >= b[d].lo && x[d] <= b[d].hi; }
        if (in) { return true; }
    }
    return false;
}

} // namespace

TEST_SUITE("problems")
{
    TEST_CASE("generation is a function of the parameters")
    {
        for (auto const* name : { "resistors", "magic", "magman", "turtlebot" }) {
            auto const a = generate_problem(params(name, 3));
            auto const b = generate_problem(params(name, 3));
            auto const c = generate_problem(params(name, 4));
            CHECK((a.train == b.train));
            CHECK((a.extrap == b.extrap));
            CHECK(a.constraints.constraints.front().samples == b.constraints.constraints.front().samples);
            CHECK_FALSE((a.train == c.train));
        }
    }

    TEST_CASE("unknown problem names are configuration errors")
    {
        CHECK_THROWS_AS((void)generate_problem(params("pendulum")), ConfigError);
    }

    TEST_CASE("resistors")
    {
        auto const b = generate_problem(params("resistors"));
        CHECK(b.input_names == std::vector<std::string> { "r1", "r2" });
        CHECK(b.train.size() + b.valid.size() == 500);
        CHECK(b.train.size() == 350);
        // Training targets carry 5 % of the target spread as noise; the test sets are clean.
        double noise = 0.0;
        double mean = 0.0;
        for (std::size_t i = 0; i < b.train.size(); ++i) {
            auto const r = b.train.x(i);
            CHECK(in_union(r, b.train_domain));
            auto const d = b.train.y(i) - r[0] * r[1] / (r[0] + r[1]);
            noise += d * d;
            mean += b.train.y(i);
        }
        mean /= static_cast<double>(b.train.size());
        double spread = 0.0;
        for (std::size_t i = 0; i < b.train.size(); ++i) { spread += (b.train.y(i) - mean) * (b.train.y(i) - mean); }
        auto const ratio = std::sqrt(noise / spread);
        CHECK(ratio > 0.03);
        CHECK(ratio < 0.07);
        for (std::size_t i = 0; i < b.interp.size(); ++i) {
            auto const r = b.interp.x(i);
            CHECK(b.interp.y(i) == r[0] * r[1] / (r[0] + r[1]));
        }
        for (std::size_t i = 0; i < b.extrap.size(); ++i) {
            auto const r = b.extrap.x(i);
            CHECK(in_union(r, b.extrapolation_domain));
            CHECK_FALSE(in_union(r, b.train_domain));
        }
        auto small = params("resistors");
        small.size = 10;
        CHECK(generate_problem(small).train.size() == 8);
        small.size = 11;
        CHECK_THROWS_AS((void)generate_problem(small), ConfigError);
    }

    TEST_CASE("magic formula reference law")
    {
        auto const b = generate_problem(params("magic"));
        std::vector<double> const zero { 0.0 };
        CHECK(b.reference(zero) == 0.0);
        // Odd in slip.
        for (double k : { 0.01, 0.05, 0.2, 0.6 }) {
            std::vector<double> const p { k };
            std::vector<double> const m { -k };
            CHECK(b.reference(m) == doctest::Approx(-b.reference(p)).epsilon(1e-14));
        }
        // Normalized by m*g the peak equals the shape factor d.
        double peak = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            std::vector<double> const p { 0.001 * i };
            peak = std::max(peak, b.reference(p));
        }
        CHECK(peak == doctest::Approx(MagicLaw::d).epsilon(1e-4));
    }

    TEST_CASE("magnetic manipulator reference law")
    {
        auto const b = generate_problem(params("magman"));
        std::vector<double> const zero { 0.0 };
        CHECK(b.reference(zero) == 0.0);
        std::vector<double> const left { -0.02 };
        std::vector<double> const right { 0.02 };
        CHECK(b.reference(left) > 0.0);
        CHECK(b.reference(right) < 0.0);
        CHECK(b.reference(left) == doctest::Approx(-b.reference(right)).epsilon(1e-14));
    }

    TEST_CASE("unicycle one-step law and its sequences")
    {
        auto const b = generate_problem(params("turtlebot"));
        CHECK(b.input_names.size() == 5);
        std::vector<double> const rest { 0.3, -0.2, 1.1, 0.0, 0.0 };
        CHECK(b.reference(rest) == 0.3);
        REQUIRE_FALSE(b.test_sequences.empty());
        for (auto const& seq : b.test_sequences) {
            REQUIRE(seq.rows.size() == seq.next_x.size());
            for (std::size_t i = 0; i < seq.rows.size(); ++i) {
                CHECK(seq.next_x[i] == b.reference(seq.rows[i]));
                if (i + 1 < seq.rows.size()) { CHECK(seq.rows[i + 1][0] == seq.next_x[i]); }
            }
        }
    }

    TEST_CASE("bundles reload from disk")
    {
        auto const dir = std::filesystem::temp_directory_path() / "eqlsr-problems-test";
        std::filesystem::remove_all(dir);
        for (auto const* name : { "magman", "turtlebot" }) {
            auto const b = generate_problem(params(name, 2));
            write_bundle(b, dir / name);
            auto const back = load_bundle(dir / name);
            CHECK(back.manifest() == b.manifest());
            CHECK((back.train == b.train));
            CHECK((back.interp == b.interp));
            CHECK(back.constraints.total_samples() == b.constraints.total_samples());
            CHECK(back.test_sequences.size() == b.test_sequences.size());
            std::vector<double> x(b.input_names.size(), 0.01);
            CHECK(back.reference(x) == b.reference(x));
        }
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("parameter JSON")
    {
        auto p = params("resistors", 9);
        p.size = 10;
        auto const back = params_from_json(params_to_json(p));
        CHECK(back.name == "resistors");
        CHECK(back.seed == 9);
        CHECK(back.size == 10);
        CHECK_THROWS_AS((void)params_from_json(nlohmann::json { { "name", "magic" }, { "colour", 1 } }), ConfigError);
        CHECK_THROWS_AS((void)params_from_json(nlohmann::json { { "name", "magic" }, { "seed", "x" } }), ConfigError);
    }
}
