// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_NETGRAPH_HPP
#define EQLSR_NETGRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace eqlsr {

enum class UnitKind { Sin, Tanh, Arctan, Identity, Multiply, Divide };

[[nodiscard]] auto arity(UnitKind kind) noexcept -> std::size_t;
// Divide is the only singular kind shipped; its critical node is the denominator.
[[nodiscard]] auto has_singularity(UnitKind kind) noexcept -> bool;
[[nodiscard]] auto to_string(UnitKind kind) -> std::string_view;
[[nodiscard]] auto unit_kind_from_string(std::string_view name) -> UnitKind;

// Value of a unit given its z nodes. Divide returns a/b when b > guard, 0 otherwise.
[[nodiscard]] auto apply_unit(UnitKind kind, double z0, double z1, double guard) noexcept -> double;

struct LayerSpec {
    std::vector<UnitKind> units;

    friend auto operator==(LayerSpec const&, LayerSpec const&) -> bool = default;
};

// Structural description of a layered graph. Every hidden layer implicitly
// carries copies of the previous layer's outputs (weight fixed to 1), so the
// output width of layer k is |units_k| + width(k-1), with width(0) = n.
struct ArchitectureSpec {
    std::vector<std::string> input_names;
    std::vector<LayerSpec> hidden_layers;
    std::vector<UnitKind> output_units { UnitKind::Identity };

    [[nodiscard]] auto num_inputs() const noexcept -> std::size_t { return input_names.size(); }
    // Width of y^k, k = 0 (inputs) .. hidden_layers.size().
    [[nodiscard]] auto layer_width(std::size_t k) const noexcept -> std::size_t;
    // Throws StructureError.
    void validate() const;
    // FNV-1a over the canonical JSON form; used to tie weight files to a spec.
    [[nodiscard]] auto hash() const -> std::uint64_t;

    friend auto operator==(ArchitectureSpec const&, ArchitectureSpec const&) -> bool = default;
};

// Closed-form learnable-weight count (weights + one bias per z node).
[[nodiscard]] auto verify_weight_count(ArchitectureSpec const& spec) -> std::size_t;

// Presets. `general`: {sin, tanh, ident, *} x copies in every hidden layer,
// plus one division unit in the last. `use_arctan` swaps tanh for arctan.
[[nodiscard]] auto general_architecture(std::vector<std::string> inputs, bool use_arctan = false, std::size_t copies = 2) -> ArchitectureSpec;
// `informed`: 4x{ident} + 4x{*} in layers 1-2, 3x{ident} + 3x{*} + 1 division in layer 3.
[[nodiscard]] auto informed_architecture(std::vector<std::string> inputs) -> ArchitectureSpec;

// JSON form: {"inputs": [...], "hidden": [[{"kind": "sin", "copies": 2}, ...], ...], "output": ["ident"]}
[[nodiscard]] auto spec_to_json(ArchitectureSpec const& spec) -> nlohmann::json;
[[nodiscard]] auto spec_from_json(nlohmann::json const& doc) -> ArchitectureSpec;

struct ZNode {
    std::size_t offset; // first weight; the bias sits at offset + width
    std::size_t width;  // number of inputs read from the value buffer prefix
    [[nodiscard]] auto bias_index() const noexcept -> std::size_t { return offset + width; }
};

struct UnitSlot {
    UnitKind kind;
    std::size_t layer;      // 1-based hidden layer; hidden_layers.size() + 1 for the output
    std::size_t first_z;    // index into Network::znodes()
    std::size_t value_index; // position of the unit's output in the value buffer (output unit: none)
};

// Value buffer layout: [x_1..x_n, units of layer 1, ..., units of layer L].
// y^k is the prefix of length layer_width(k); copy units are thus aliases.
class Network {
public:
    Network() = default;
    explicit Network(ArchitectureSpec spec, double division_guard = 1e-4);

    [[nodiscard]] auto spec() const noexcept -> ArchitectureSpec const& { return spec_; }
    [[nodiscard]] auto num_inputs() const noexcept -> std::size_t { return spec_.num_inputs(); }
    [[nodiscard]] auto num_weights() const noexcept -> std::size_t { return weights_.size(); }
    [[nodiscard]] auto num_values() const noexcept -> std::size_t { return num_values_; }
    [[nodiscard]] auto division_guard() const noexcept -> double { return guard_; }

    [[nodiscard]] auto weights() const noexcept -> std::span<double const> { return weights_; }
    [[nodiscard]] auto weights() noexcept -> std::span<double> { return weights_; }
    void set_weights(std::span<double const> w);

    [[nodiscard]] auto znodes() const noexcept -> std::vector<ZNode> const& { return znodes_; }
    // Hidden units in evaluation order, followed by the output unit.
    [[nodiscard]] auto units() const noexcept -> std::vector<UnitSlot> const& { return units_; }
    [[nodiscard]] auto output_unit() const noexcept -> UnitSlot const& { return units_.back(); }
    [[nodiscard]] auto num_hidden_units() const noexcept -> std::size_t { return units_.size() - 1; }

    // Indices of the denominator z nodes of all singular units.
    [[nodiscard]] auto singular_znodes() const noexcept -> std::vector<std::size_t> const& { return singular_z_; }

private:
    ArchitectureSpec spec_;
    double guard_ { 1e-4 };
    std::size_t num_values_ { 0 };
    std::vector<double> weights_;
    std::vector<ZNode> znodes_;
    std::vector<UnitSlot> units_;
    std::vector<std::size_t> singular_z_;
};

// Weights: uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] per z node, bias uniform on [-0.1, 0.1].
[[nodiscard]] auto build_network(ArchitectureSpec const& spec, std::uint64_t rng_seed, double division_guard = 1e-4) -> Network;

// Activations from one forward pass.
struct ForwardCache {
    std::vector<double> values; // unit outputs, see Network layout
    std::vector<double> z;      // every z node
    double output { 0.0 };

    void resize(Network const& net);
};

// Throws NumericalError on non-finite inputs.
auto forward(Network const& net, std::span<double const> x, ForwardCache& cache) -> double;
[[nodiscard]] auto forward(Network const& net, std::span<double const> x) -> double;

struct ActivityReport {
    std::vector<std::size_t> active_weights; // W_a, ascending
    std::size_t n_active_links { 0 };
    std::size_t n_active_units { 0 };        // learnable hidden units only
    double threshold { 0.0 };
    std::vector<bool> unit_active;           // per hidden unit
};

// A weight is active iff |w| >= threshold and its unit reaches the output
// through active weights; a hidden unit is active iff it is read by an active
// weight and owns at least one active input weight (bias included).
[[nodiscard]] auto activity(Network const& net, double threshold) -> ActivityReport;

// Flat weight file: {"spec_hash": ..., "spec": {...}, "weights": [...]}
[[nodiscard]] auto weights_to_json(Network const& net) -> nlohmann::json;
[[nodiscard]] auto network_from_json(nlohmann::json const& doc, double division_guard = 1e-4) -> Network;

} // namespace eqlsr

#endif
