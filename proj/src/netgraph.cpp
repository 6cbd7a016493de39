// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eqlsr/errors.hpp"

namespace eqlsr {

auto arity(UnitKind kind) noexcept -> std::size_t
{
    switch (kind) {
    case UnitKind::Multiply:
    case UnitKind::Divide:
        return 2;
    default:
        return 1;
    }
}

auto has_singularity(UnitKind kind) noexcept -> bool
{
    return kind == UnitKind::Divide;
}

auto to_string(UnitKind kind) -> std::string_view
{
    switch (kind) {
    case UnitKind::Sin:
        return "sin";
    case UnitKind::Tanh:
        return "tanh";
    case UnitKind::Arctan:
        return "arctan";
    case UnitKind::Identity:
        return "ident";
    case UnitKind::Multiply:
        return "mul";
    case UnitKind::Divide:
        return "div";
    }
    return "?";
}

auto unit_kind_from_string(std::string_view name) -> UnitKind
{
    if (name == "sin") { return UnitKind::Sin; }
    if (name == "tanh") { return UnitKind::Tanh; }
    if (name == "arctan" || name == "atan") { return UnitKind::Arctan; }
    if (name == "ident" || name == "identity") { return UnitKind::Identity; }
    if (name == "mul" || name == "*") { return UnitKind::Multiply; }
    if (name == "div" || name == "/") { return UnitKind::Divide; }
    throw StructureError("unknown unit kind '" + std::string(name) + "'");
}

auto apply_unit(UnitKind kind, double z0, double z1, double guard) noexcept -> double
{
    switch (kind) {
    case UnitKind::Sin:
        return std::sin(z0);
    case UnitKind::Tanh:
        return std::tanh(z0);
    case UnitKind::Arctan:
        return std::atan(z0);
    case UnitKind::Identity:
        return z0;
    case UnitKind::Multiply:
        return z0 * z1;
    case UnitKind::Divide:
        return z1 > guard ? z0 / z1 : 0.0;
    }
    return 0.0;
}

auto ArchitectureSpec::layer_width(std::size_t k) const noexcept -> std::size_t
{
    std::size_t width = num_inputs();
    for (std::size_t i = 0; i < k && i < hidden_layers.size(); ++i) {
        width += hidden_layers[i].units.size();
    }
    return width;
}

void ArchitectureSpec::validate() const
{
    if (input_names.empty()) {
        throw StructureError("architecture has zero inputs");
    }
    if (hidden_layers.empty()) {
        throw StructureError("architecture has no hidden layers");
    }
    for (std::size_t k = 0; k < hidden_layers.size(); ++k) {
        if (hidden_layers[k].units.empty()) {
            throw StructureError("hidden layer " + std::to_string(k + 1) + " is empty");
        }
    }
    if (output_units.size() != 1) {
        throw StructureError("exactly one output unit is supported, got " + std::to_string(output_units.size()));
    }
}

auto ArchitectureSpec::hash() const -> std::uint64_t
{
    auto const text = spec_to_json(*this).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

auto verify_weight_count(ArchitectureSpec const& spec) -> std::size_t
{
    std::size_t count = 0;
    for (std::size_t k = 0; k < spec.hidden_layers.size(); ++k) {
        auto const fan_in = spec.layer_width(k);
        for (auto kind : spec.hidden_layers[k].units) {
            count += arity(kind) * (fan_in + 1);
        }
    }
    auto const fan_in = spec.layer_width(spec.hidden_layers.size());
    for (auto kind : spec.output_units) {
        count += arity(kind) * (fan_in + 1);
    }
    return count;
}

namespace {
    auto repeat(std::vector<UnitKind> const& kinds, std::size_t copies) -> std::vector<UnitKind>
    {
        std::vector<UnitKind> out;
        for (auto k : kinds) {
            out.insert(out.end(), copies, k);
        }
        return out;
    }
} // namespace

auto general_architecture(std::vector<std::string> inputs, bool use_arctan, std::size_t copies) -> ArchitectureSpec
{
    auto const squash = use_arctan ? UnitKind::Arctan : UnitKind::Tanh;
    auto const base = repeat({ UnitKind::Sin, squash, UnitKind::Identity, UnitKind::Multiply }, copies);
    ArchitectureSpec spec;
    spec.input_names = std::move(inputs);
    spec.hidden_layers = { { base }, { base }, { base } };
    spec.hidden_layers.back().units.push_back(UnitKind::Divide);
    spec.output_units = { UnitKind::Identity };
    return spec;
}

auto informed_architecture(std::vector<std::string> inputs) -> ArchitectureSpec
{
    ArchitectureSpec spec;
    spec.input_names = std::move(inputs);
    auto const wide = repeat({ UnitKind::Identity, UnitKind::Multiply }, 4);
    auto narrow = repeat({ UnitKind::Identity, UnitKind::Multiply }, 3);
    narrow.push_back(UnitKind::Divide);
    spec.hidden_layers = { { wide }, { wide }, { narrow } };
    spec.output_units = { UnitKind::Identity };
    return spec;
}

auto spec_to_json(ArchitectureSpec const& spec) -> nlohmann::json
{
    nlohmann::json doc;
    doc["inputs"] = spec.input_names;
    auto hidden = nlohmann::json::array();
    for (auto const& layer : spec.hidden_layers) {
        // run-length encode consecutive kinds as {kind, copies}
        auto groups = nlohmann::json::array();
        for (std::size_t i = 0; i < layer.units.size();) {
            std::size_t j = i;
            while (j < layer.units.size() && layer.units[j] == layer.units[i]) { ++j; }
            groups.push_back({ { "kind", std::string(to_string(layer.units[i])) }, { "copies", j - i } });
            i = j;
        }
        hidden.push_back(groups);
    }
    doc["hidden"] = hidden;
    auto out = nlohmann::json::array();
    for (auto k : spec.output_units) {
        out.push_back(std::string(to_string(k)));
    }
    doc["output"] = out;
    return doc;
}

auto spec_from_json(nlohmann::json const& doc) -> ArchitectureSpec
{
    ArchitectureSpec spec;
    try {
        spec.input_names = doc.at("inputs").get<std::vector<std::string>>();
        spec.hidden_layers.clear();
        for (auto const& layer : doc.at("hidden")) {
            LayerSpec ls;
            for (auto const& group : layer) {
                auto const kind = unit_kind_from_string(group.at("kind").get<std::string>());
                auto const copies = group.value("copies", std::size_t { 1 });
                ls.units.insert(ls.units.end(), copies, kind);
            }
            spec.hidden_layers.push_back(std::move(ls));
        }
        spec.output_units.clear();
        if (doc.contains("output")) {
            for (auto const& name : doc.at("output")) {
                spec.output_units.push_back(unit_kind_from_string(name.get<std::string>()));
            }
        } else {
            spec.output_units = { UnitKind::Identity };
        }
    } catch (nlohmann::json::exception const& e) {
        throw StructureError(std::string("malformed architecture document: ") + e.what());
    }
    spec.validate();
    return spec;
}

Network::Network(ArchitectureSpec spec, double division_guard)
    : spec_(std::move(spec))
    , guard_(division_guard)
{
    spec_.validate();
    std::size_t offset = 0;
    std::size_t value = spec_.num_inputs();
    auto add_unit = [&](UnitKind kind, std::size_t layer, std::size_t fan_in, std::size_t value_index) {
        UnitSlot slot { kind, layer, znodes_.size(), value_index };
        for (std::size_t a = 0; a < arity(kind); ++a) {
            if (has_singularity(kind) && a == 1) {
                singular_z_.push_back(znodes_.size());
            }
            znodes_.push_back({ offset, fan_in });
            offset += fan_in + 1;
        }
        units_.push_back(slot);
    };
    for (std::size_t k = 0; k < spec_.hidden_layers.size(); ++k) {
        auto const fan_in = spec_.layer_width(k);
        for (auto kind : spec_.hidden_layers[k].units) {
            add_unit(kind, k + 1, fan_in, value++);
        }
    }
    num_values_ = value;
    add_unit(spec_.output_units.front(), spec_.hidden_layers.size() + 1, spec_.layer_width(spec_.hidden_layers.size()), value);
    weights_.assign(offset, 0.0);
    if (weights_.size() != verify_weight_count(spec_)) {
        throw StructureError("weight layout disagrees with the closed-form count");
    }
}

void Network::set_weights(std::span<double const> w)
{
    if (w.size() != weights_.size()) {
        throw StructureError("weight vector has length " + std::to_string(w.size()) + ", expected " + std::to_string(weights_.size()));
    }
    std::copy(w.begin(), w.end(), weights_.begin());
}

auto build_network(ArchitectureSpec const& spec, std::uint64_t rng_seed, double division_guard) -> Network
{
    Network net(spec, division_guard);
    std::mt19937_64 rng(rng_seed);
    auto w = net.weights();
    for (auto const& zn : net.znodes()) {
        auto const bound = 1.0 / std::sqrt(static_cast<double>(zn.width));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (std::size_t j = 0; j < zn.width; ++j) {
            w[zn.offset + j] = dist(rng);
        }
        std::uniform_real_distribution<double> bias(-0.1, 0.1);
        w[zn.bias_index()] = bias(rng);
    }
    return net;
}

void ForwardCache::resize(Network const& net)
{
    values.resize(net.num_values());
    z.resize(net.znodes().size());
}

auto forward(Network const& net, std::span<double const> x, ForwardCache& cache) -> double
{
    auto const n = net.num_inputs();
    if (x.size() != n) {
        throw StructureError("input has length " + std::to_string(x.size()) + ", expected " + std::to_string(n));
    }
    cache.resize(net);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) {
            throw NumericalError("non-finite network input", i);
        }
        cache.values[i] = x[i];
    }
    auto const* w = net.weights().data();
    auto const* y = cache.values.data();
    auto const& zs = net.znodes();
    auto const guard = net.division_guard();
    double out = 0.0;
    for (auto const& unit : net.units()) {
        double zv[2] = { 0.0, 0.0 };
        for (std::size_t a = 0; a < arity(unit.kind); ++a) {
            auto const& zn = zs[unit.first_z + a];
            auto const* wz = w + zn.offset;
            double acc = wz[zn.width];
            for (std::size_t j = 0; j < zn.width; ++j) {
                acc += wz[j] * y[j];
            }
            cache.z[unit.first_z + a] = acc;
            zv[a] = acc;
        }
        auto const v = apply_unit(unit.kind, zv[0], zv[1], guard);
        if (unit.value_index < net.num_values()) {
            cache.values[unit.value_index] = v;
        } else {
            out = v;
        }
    }
    cache.output = out;
    return out;
}

auto forward(Network const& net, std::span<double const> x) -> double
{
    ForwardCache cache;
    return forward(net, x, cache);
}

auto activity(Network const& net, double threshold) -> ActivityReport
{
    ActivityReport report;
    report.threshold = threshold;
    report.unit_active.assign(net.num_hidden_units(), false);

    auto const w = net.weights();
    auto const& zs = net.znodes();
    auto const& units = net.units();
    std::vector<bool> needed(net.num_values(), false);
    std::vector<std::size_t> collected;

    for (std::size_t u = units.size(); u-- > 0;) {
        auto const& unit = units[u];
        bool const is_output = (u + 1 == units.size());
        if (!is_output && !needed[unit.value_index]) {
            continue;
        }
        collected.clear();
        for (std::size_t a = 0; a < arity(unit.kind); ++a) {
            auto const& zn = zs[unit.first_z + a];
            for (std::size_t j = 0; j <= zn.width; ++j) {
                if (std::abs(w[zn.offset + j]) >= threshold) {
                    collected.push_back(zn.offset + j);
                }
            }
        }
        if (collected.empty()) {
            continue;
        }
        for (auto idx : collected) {
            report.active_weights.push_back(idx);
        }
        for (std::size_t a = 0; a < arity(unit.kind); ++a) {
            auto const& zn = zs[unit.first_z + a];
            for (std::size_t j = 0; j < zn.width; ++j) {
                if (std::abs(w[zn.offset + j]) >= threshold) {
                    needed[j] = true;
                }
            }
        }
        if (!is_output) {
            report.unit_active[u] = true;
            ++report.n_active_units;
        }
    }
    std::sort(report.active_weights.begin(), report.active_weights.end());
    report.n_active_links = report.active_weights.size();
    return report;
}

auto weights_to_json(Network const& net) -> nlohmann::json
{
    nlohmann::json doc;
    doc["spec"] = spec_to_json(net.spec());
    doc["spec_hash"] = net.spec().hash();
    doc["weights"] = std::vector<double>(net.weights().begin(), net.weights().end());
    return doc;
}

auto network_from_json(nlohmann::json const& doc, double division_guard) -> Network
{
    auto spec = spec_from_json(doc.at("spec"));
    if (doc.contains("spec_hash") && doc.at("spec_hash").get<std::uint64_t>() != spec.hash()) {
        throw StructureError("weight file spec hash does not match its spec");
    }
    Network net(std::move(spec), division_guard);
    net.set_weights(doc.at("weights").get<std::vector<double>>());
    return net;
}

} // namespace eqlsr
