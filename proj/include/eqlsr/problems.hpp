// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_PROBLEMS_HPP
#define EQLSR_PROBLEMS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqlsr/dataset.hpp"
#include "eqlsr/netgraph.hpp"
#include "eqlsr/priors.hpp"

namespace eqlsr {

using Box = std::vector<Interval>;

// A recorded closed-loop run: one-step input rows (x, y, phi, v_f, v_a) and
// the clean next x position after each row.
struct Sequence {
    std::vector<std::vector<double>> rows;
    std::vector<double> next_x;
};

// Generator parameters; together with the seed they fully determine a bundle.
struct ProblemParams {
    std::string name;            // resistors | magic | magman | turtlebot
    std::uint64_t seed { 1 };
    std::size_t size { 500 };    // resistors: 10 or 500
    double current { 1.0 };      // magman coil current
    bool normalize { true };     // magic: divide forces by m*g
    double noise { 1e-3 };       // turtlebot absolute target noise
};

[[nodiscard]] auto params_to_json(ProblemParams const& p) -> nlohmann::json;
// Throws ConfigError naming the offending field.
[[nodiscard]] auto params_from_json(nlohmann::json const& doc) -> ProblemParams;

struct ProblemBundle {
    ProblemParams params;
    std::vector<std::string> input_names;
    std::vector<Box> train_domain;          // union of boxes
    std::vector<Box> extrapolation_domain;  // union of boxes
    Dataset train;
    Dataset valid;
    Dataset interp;
    Dataset extrap;
    Dataset extrap_valid;
    ConstraintSet constraints;
    ModelEval reference;                    // clean law
    ArchitectureSpec architecture;
    Sequence valid_sequence;                // turtlebot only
    std::vector<Sequence> test_sequences;   // turtlebot only

    [[nodiscard]] auto manifest() const -> nlohmann::json;
};

struct ResistorsLaw {
    auto operator()(std::span<double const> r) const -> double { return r[0] * r[1] / (r[0] + r[1]); }
};

struct MagicLaw {
    static constexpr double m = 407.75;
    static constexpr double g = 9.81;
    static constexpr double b = 55.56;
    static constexpr double c = 1.35;
    static constexpr double d = 0.4;
    static constexpr double e = 0.52;
    bool normalized { true };
    auto operator()(std::span<double const> k) const -> double;
};

struct MagmanLaw {
    double current { 1.0 };
    static constexpr double c2 = 5.0 * 0.008 * 0.008;
    [[nodiscard]] auto c1() const -> double;
    auto operator()(std::span<double const> x) const -> double;
};

struct UnicycleLaw {
    static constexpr double ts = 0.2;
    // Next x position from (x, y, phi, v_f, v_a).
    auto operator()(std::span<double const> s) const -> double;
};

[[nodiscard]] auto gen_resistors(ProblemParams const& p) -> ProblemBundle;
[[nodiscard]] auto gen_magic(ProblemParams const& p) -> ProblemBundle;
[[nodiscard]] auto gen_magman(ProblemParams const& p) -> ProblemBundle;
[[nodiscard]] auto gen_turtlebot(ProblemParams const& p) -> ProblemBundle;
// Dispatches on p.name. Throws ConfigError for unknown problems.
[[nodiscard]] auto generate_problem(ProblemParams const& p) -> ProblemBundle;

// Writes the CSV sets, constraints.json and manifest.json into `dir`.
void write_bundle(ProblemBundle const& bundle, std::filesystem::path const& dir);
// Regenerates a bundle from `dir`/manifest.json.
[[nodiscard]] auto load_bundle(std::filesystem::path const& dir) -> ProblemBundle;

} // namespace eqlsr

#endif
