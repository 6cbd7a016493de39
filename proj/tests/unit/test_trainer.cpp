// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "eqlsr/errors.hpp"
#include "eqlsr/problems.hpp"
#include "eqlsr/trainer.hpp"

using namespace eqlsr;

namespace {

auto snap(std::size_t links, std::size_t units, double valid, std::vector<double> rho_c = {}, std::vector<double> rho_s = {}) -> ModelSnapshot
{
    ModelSnapshot s;
    s.complexity = { links, units };
    s.valid_rmse = valid;
    s.rho_c = std::move(rho_c);
    s.rho_s = std::move(rho_s);
    return s;
}

auto tiny_config(std::string const& variant) -> TrainerConfig
{
    TrainerConfig cfg;
    cfg.schedule = { 40, 5, 25, 3, 30 };
    cfg.variant = VariantConfig::parse(variant);
    cfg.adam.lr = 1e-2;
    return cfg;
}

struct Logged {
    std::vector<nlohmann::json> lines;
    RunResult result;
};

auto run_logged(ProblemBundle const& b, TrainerConfig const& cfg, std::uint64_t seed) -> Logged
{
    std::ostringstream os;
    TrainingData const data { &b.train, &b.valid, &b.extrap_valid, &b.constraints };
    Logged out;
    out.result = run(b.architecture, data, cfg, seed, &os);
    std::istringstream is(os.str());
    for (std::string line; std::getline(is, line);) { out.lines.push_back(nlohmann::json::parse(line)); }
    return out;
}

auto magman() -> ProblemBundle const&
{
    static auto const b = [] {
        ProblemParams p;
        p.name = "magman";
        return generate_problem(p);
    }();
    return b;
}

// Candidate stream entry rebuilt as a snapshot for replaying the selection rule.
auto from_log(nlohmann::json const& line) -> ModelSnapshot
{
    auto const& c = line.at("cand");
    auto s = snap(c.at("links"), c.at("units"), c.at("valid"), c.at("rho_c").get<std::vector<double>>(), c.at("rho_s").get<std::vector<double>>());
    if (c.contains("ext")) { s.ext_rmse = c.at("ext").get<double>(); }
    s.iteration = line.at("iter");
    return s;
}

} // namespace

TEST_SUITE("trainer")
{
    TEST_CASE("variant codes")
    {
        auto const ref = VariantConfig::parse("ACYE");
        CHECK(ref.weighting == WeightingMode::Adaptive);
        CHECK(ref.selection == Selection::ConstraintBased);
        CHECK(ref.use_constraints);
        CHECK(ref.epochs == EpochMode::EpochWise);
        auto const other = VariantConfig::parse("SENS");
        CHECK(other.weighting == WeightingMode::Static);
        CHECK(other.selection == Selection::ExtrapolationBased);
        CHECK_FALSE(other.use_constraints);
        CHECK(other.epochs == EpochMode::SingleEpoch);
        CHECK(VariantConfig::parse("ACNE").code() == "AENE");
        for (auto const* bad : { "", "ACY", "ACYEE", "XCYE", "AXYE", "ACXE", "ACYX", "acye" }) {
            CHECK_THROWS_AS((void)VariantConfig::parse(bad), ConfigError);
        }
    }

    TEST_CASE("single-epoch schedules keep the iteration total")
    {
        auto const s = StageSchedule::scaled();
        CHECK(s.total() == 10000);
        auto const single = effective_schedule(s, VariantConfig::parse("ACYS"));
        CHECK(single.epochs == 1);
        CHECK(single.n_e == 20);
        CHECK(single.n_f == 7980);
        CHECK(single.total() == 10000);
        auto const same = effective_schedule(s, VariantConfig::parse("ACYE"));
        CHECK(same.epochs == 8);
        CHECK(same.total() == 10000);
        CHECK(StageSchedule {}.total() == 2000 + 87 * 1000 + 1000);
    }

    TEST_CASE("selection prefers lower complexity regardless of metrics")
    {
        auto const inc = snap(10, 3, 0.1, { 0.0 });
        CHECK(select_accept(snap(9, 5, 5.0, { 9.0 }), inc));
        CHECK(select_accept(snap(10, 2, 5.0, { 9.0 }), inc));
        CHECK_FALSE(select_accept(snap(11, 0, 0.0, { 0.0 }), inc));
    }

    TEST_CASE("selection at equal complexity needs every metric no worse")
    {
        auto const inc = snap(10, 3, 0.1, { 0.2, 0.3 }, { 0.01 });
        CHECK(select_accept(snap(10, 3, 0.1, { 0.2, 0.3 }, { 0.01 }), inc));
        CHECK(select_accept(snap(10, 3, 0.05, { 0.1, 0.3 }, { 0.0 }), inc));
        CHECK_FALSE(select_accept(snap(10, 3, 0.11, { 0.1, 0.1 }, { 0.0 }), inc));
        CHECK_FALSE(select_accept(snap(10, 3, 0.05, { 0.1, 0.31 }, { 0.0 }), inc));
        CHECK_FALSE(select_accept(snap(10, 3, 0.05, { 0.1, 0.3 }, { 0.02 }), inc));
    }

    TEST_CASE("extrapolation-based selection")
    {
        auto a = snap(10, 3, 0.5);
        auto b = snap(10, 3, 0.1);
        CHECK_THROWS_AS((void)select_accept_ext(a, b), DataError);
        a.ext_rmse = 0.2;
        b.ext_rmse = 0.3;
        CHECK(select_accept_ext(a, b));
        CHECK_FALSE(select_accept_ext(b, a));
        auto c = snap(12, 0, 0.0);
        c.ext_rmse = 0.0;
        CHECK_FALSE(select_accept_ext(c, a));
    }

    TEST_CASE("epoch acceptance gate")
    {
        auto const m = snap(10, 3, 0.1);
        CHECK(epoch_accept(snap(10, 3, 0.3), m, 0.3));
        CHECK_FALSE(epoch_accept(snap(10, 3, 0.31), m, 0.3));
        CHECK_FALSE(epoch_accept(snap(11, 3, 0.01), m, 0.3));
        CHECK(epoch_accept(snap(4, 1, 0.2), m, std::numeric_limits<double>::infinity()));
    }

    TEST_CASE("theta_v")
    {
        std::deque<ModelSnapshot> h;
        CHECK(theta_v(h, 0.5) == std::numeric_limits<double>::infinity());
        h = { snap(1, 0, 1.0), snap(1, 0, 2.0), snap(1, 0, 3.0) };
        CHECK(theta_v(h, 0.5) == doctest::Approx(3.0));
        CHECK(theta_v(h, 0.0) == doctest::Approx(2.0));
    }

    TEST_CASE("nontrivial means more than the output bias")
    {
        CHECK_FALSE(is_nontrivial({ 0, 0 }));
        CHECK_FALSE(is_nontrivial({ 1, 0 }));
        CHECK(is_nontrivial({ 2, 0 }));
    }

    TEST_CASE("snapshot JSON round trip")
    {
        auto s = snap(7, 2, 0.25, { 0.1 }, { 0.0, 1e-3 });
        s.weights = { 0.0, 1.5, -2.0 };
        s.iteration = 42;
        s.ext_rmse = 0.75;
        auto const back = snapshot_from_json(nlohmann::json::parse(snapshot_to_json(s).dump()));
        CHECK(back.weights == s.weights);
        CHECK(back.complexity == s.complexity);
        CHECK(back.valid_rmse == s.valid_rmse);
        CHECK(back.rho_c == s.rho_c);
        CHECK(back.rho_s == s.rho_s);
        CHECK(back.iteration == 42);
        CHECK(back.ext_rmse == 0.75);
    }

    TEST_CASE("run log follows the stage schedule")
    {
        auto const cfg = tiny_config("ACYE");
        auto const out = run_logged(magman(), cfg, 1);
        auto const& s = cfg.schedule;
        REQUIRE(out.lines.size() == s.total());
        CHECK(out.result.iterations == s.total());
        std::vector<std::pair<std::string, long long>> expected;
        for (std::size_t i = 0; i < s.n_init / 2; ++i) { expected.emplace_back("init_l1", -1); }
        for (std::size_t i = s.n_init / 2; i < s.n_init; ++i) { expected.emplace_back("init_l2", -1); }
        for (std::size_t e = 0; e < s.epochs; ++e) {
            for (std::size_t i = 0; i < s.n_e; ++i) { expected.emplace_back("explore", static_cast<long long>(e)); }
            for (std::size_t i = 0; i < s.n_f; ++i) { expected.emplace_back("focus", static_cast<long long>(e)); }
        }
        for (std::size_t i = 0; i < s.n_final; ++i) { expected.emplace_back("final", -1); }
        for (std::size_t i = 0; i < out.lines.size(); ++i) {
            CHECK(out.lines[i].at("iter") == i);
            CHECK(out.lines[i].at("phase") == expected[i].first);
            CHECK(out.lines[i].at("epoch") == expected[i].second);
        }
        CHECK(out.lines[s.n_init - 1].at("theta_v").is_null());
        CHECK(out.lines[s.n_init].at("theta_v").is_number());
    }

    TEST_CASE("logged best models replay from the candidate stream")
    {
        for (auto const* variant : { "ACYE", "SCYE", "AENE" }) {
            auto const out = run_logged(magman(), tiny_config(variant), 2);
            bool const ext = VariantConfig::parse(variant).selection == Selection::ExtrapolationBased;
            std::optional<ModelSnapshot> best;
            Complexity prev { std::numeric_limits<std::size_t>::max(), 0 };
            for (auto const& line : out.lines) {
                auto const cand = from_log(line);
                if (!best || (ext ? select_accept_ext(cand, *best) : select_accept(cand, *best))) { best = cand; }
                CHECK(line.at("model_star").at("iter") == best->iteration);
                Complexity const now { line.at("model_star").at("links"), line.at("model_star").at("units") };
                CHECK(now <= prev);
                prev = now;
            }
            CHECK(out.result.model_star.iteration == best->iteration);
            CHECK(out.result.model_star.complexity == best->complexity);
        }
    }

    TEST_CASE("each epoch restarts from the epoch-best snapshot")
    {
        auto const cfg = tiny_config("ACYE");
        auto const out = run_logged(magman(), cfg, 3);
        std::map<std::size_t, nlohmann::json> by_iter;
        for (auto const& line : out.lines) { by_iter[line.at("iter")] = line; }
        for (std::size_t e = 0; e < cfg.schedule.epochs; ++e) {
            auto const first = cfg.schedule.n_init + e * (cfg.schedule.n_e + cfg.schedule.n_f);
            auto const& start = by_iter.at(first);
            REQUIRE(start.at("phase") == "explore");
            auto const m = by_iter.at(first - 1).at("m_star").get<std::size_t>();
            auto const& origin = by_iter.at(m);
            CHECK(origin.at("phase").get<std::string>() != "explore");
            CHECK(start.at("cand").at("links") == origin.at("cand").at("links"));
            CHECK(start.at("cand").at("valid") == origin.at("cand").at("valid"));
        }
    }

    TEST_CASE("the epoch best only changes in initialization and focus phases")
    {
        auto const out = run_logged(magman(), tiny_config("ACYE"), 4);
        std::optional<std::size_t> prev;
        for (auto const& line : out.lines) {
            if (line.at("m_star").is_null()) {
                CHECK(line.at("phase") == "init_l1");
                continue;
            }
            auto const m = line.at("m_star").get<std::size_t>();
            if (prev && m != *prev) {
                CHECK(m == line.at("iter").get<std::size_t>());
                auto const phase = line.at("phase").get<std::string>();
                CHECK((phase == "init_l2" || phase == "focus"));
            }
            prev = m;
        }
    }

    TEST_CASE("best model weights are masked to the active set")
    {
        auto const out = run_logged(magman(), tiny_config("ACYE"), 5);
        auto net = build_network(magman().architecture, 1);
        net.set_weights(out.result.model_star.weights);
        auto const r = activity(net, 1e-4);
        CHECK(r.n_active_links == out.result.model_star.complexity.links);
        CHECK(r.n_active_units == out.result.model_star.complexity.units);
        std::size_t nonzero = 0;
        for (auto w : out.result.model_star.weights) { nonzero += w != 0.0 ? 1 : 0; }
        CHECK(nonzero == r.n_active_links);
    }

    TEST_CASE("runs are deterministic in the seed")
    {
        auto const cfg = tiny_config("ACYE");
        auto const a = run_logged(magman(), cfg, 11);
        auto const b = run_logged(magman(), cfg, 11);
        auto const c = run_logged(magman(), cfg, 12);
        REQUIRE(a.lines.size() == b.lines.size());
        for (std::size_t i = 0; i < a.lines.size(); ++i) { CHECK(a.lines[i].dump() == b.lines[i].dump()); }
        CHECK(a.result.final_weights == b.result.final_weights);
        CHECK(a.result.final_weights != c.result.final_weights);
    }

    TEST_CASE("static weighting freezes its coefficients")
    {
        auto const out = run_logged(magman(), tiny_config("SCYE"), 6);
        auto const alpha = out.lines[1].at("alpha").get<double>();
        std::optional<double> beta;
        for (std::size_t i = 1; i < out.lines.size(); ++i) {
            CHECK(out.lines[i].at("alpha").get<double>() == alpha);
            if (out.lines[i].at("phase") != "init_l1" && i > 0 && out.lines[i - 1].at("phase") != "init_l1") {
                if (!beta) { beta = out.lines[i].at("beta").get<double>(); }
                CHECK(out.lines[i].at("beta").get<double>() == *beta);
            }
        }
    }

    TEST_CASE("input validation")
    {
        auto const& b = magman();
        Dataset const empty(1);
        auto const cfg = tiny_config("ACYE");
        CHECK_THROWS_AS((void)run(b.architecture, { &empty, &b.valid, nullptr, &b.constraints }, cfg, 1), DataError);
        CHECK_THROWS_AS((void)run(b.architecture, { &b.train, &empty, nullptr, &b.constraints }, cfg, 1), DataError);
        CHECK_THROWS_AS((void)run(b.architecture, { &b.train, &b.valid, nullptr, &b.constraints }, tiny_config("AEYE"), 1), DataError);
        ArchitectureSpec broken;
        CHECK_THROWS_AS((void)run(broken, { &b.train, &b.valid, nullptr, &b.constraints }, cfg, 1), StructureError);
    }
}
