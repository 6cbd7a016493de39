// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "eqlsr/errors.hpp"

namespace eqlsr {

auto IndexSet::all(std::size_t size) -> IndexSet
{
    IndexSet s;
    s.mask_.assign(size, 1);
    return s;
}

auto IndexSet::none(std::size_t size) -> IndexSet
{
    IndexSet s;
    s.mask_.assign(size, 0);
    return s;
}

auto IndexSet::of(std::size_t size, std::span<std::size_t const> indices) -> IndexSet
{
    auto s = none(size);
    for (auto i : indices) {
        if (i >= size) {
            throw StructureError("index " + std::to_string(i) + " outside weight vector of size " + std::to_string(size));
        }
        s.mask_[i] = 1;
    }
    return s;
}

auto IndexSet::count() const noexcept -> std::size_t
{
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

auto IndexSet::indices() const -> std::vector<std::size_t>
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
        if (mask_[i] != 0) { out.push_back(i); }
    }
    return out;
}

namespace {
    // Partial derivatives of a unit output w.r.t. its z nodes.
    void unit_partials(UnitKind kind, double z0, double z1, double guard, double& d0, double& d1)
    {
        d1 = 0.0;
        switch (kind) {
        case UnitKind::Sin:
            d0 = std::cos(z0);
            return;
        case UnitKind::Tanh: {
            auto const t = std::tanh(z0);
            d0 = 1.0 - t * t;
            return;
        }
        case UnitKind::Arctan:
            d0 = 1.0 / (1.0 + z0 * z0);
            return;
        case UnitKind::Identity:
            d0 = 1.0;
            return;
        case UnitKind::Multiply:
            d0 = z1;
            d1 = z0;
            return;
        case UnitKind::Divide:
            if (z1 > guard) {
                d0 = 1.0 / z1;
                d1 = -z0 / (z1 * z1);
            } else {
                d0 = 0.0;
            }
            return;
        }
        d0 = 0.0;
    }
} // namespace

void BackwardPass::accumulate(Network const& net, ForwardCache const& cache, double output_adjoint,
    std::span<double const> z_adjoint, std::span<double> grad)
{
    value_adj_.assign(net.num_values(), 0.0);
    auto const* w = net.weights().data();
    auto const* y = cache.values.data();
    auto const& zs = net.znodes();
    auto const& units = net.units();
    auto const guard = net.division_guard();
    bool const has_z_seed = !z_adjoint.empty();

    for (std::size_t u = units.size(); u-- > 0;) {
        auto const& unit = units[u];
        bool const is_output = (u + 1 == units.size());
        double const out_adj = is_output ? output_adjoint : value_adj_[unit.value_index];
        double const z0 = cache.z[unit.first_z];
        double const z1 = arity(unit.kind) == 2 ? cache.z[unit.first_z + 1] : 0.0;
        double d[2];
        unit_partials(unit.kind, z0, z1, guard, d[0], d[1]);
        for (std::size_t a = 0; a < arity(unit.kind); ++a) {
            auto const zi = unit.first_z + a;
            double adj = out_adj * d[a];
            if (has_z_seed) { adj += z_adjoint[zi]; }
            if (adj == 0.0) { continue; }
            auto const& zn = zs[zi];
            auto const* wz = w + zn.offset;
            auto* gz = grad.data() + zn.offset;
            for (std::size_t j = 0; j < zn.width; ++j) {
                gz[j] += adj * y[j];
                value_adj_[j] += adj * wz[j];
            }
            gz[zn.width] += adj;
        }
    }
}

auto finalize_gradient(std::vector<double> raw, IndexSet const& trainable) -> GradientVector
{
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!trainable.contains(i)) {
            raw[i] = 0.0;
        } else if (!std::isfinite(raw[i])) {
            throw NumericalError("non-finite gradient", i);
        }
    }
    return GradientVector { std::move(raw) };
}

void adam_step(Network& net, GradientVector const& grad, AdamState& state, IndexSet const& trainable)
{
    auto w = net.weights();
    if (state.m.size() != w.size()) {
        state.m.assign(w.size(), 0.0);
        state.v.assign(w.size(), 0.0);
    }
    ++state.t;
    auto const& c = state.config;
    auto const t = static_cast<double>(state.t);
    auto const correction1 = 1.0 - std::pow(c.beta1, t);
    auto const correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!trainable.contains(i)) { continue; }
        auto const g = grad.values[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        auto const mhat = state.m[i] / correction1;
        auto const vhat = state.v[i] / correction2;
        w[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

void zero_masked(Network& net, IndexSet const& keep)
{
    auto w = net.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!keep.contains(i)) { w[i] = 0.0; }
    }
}

} // namespace eqlsr
