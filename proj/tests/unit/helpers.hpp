// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_TEST_HELPERS_HPP
#define EQLSR_TEST_HELPERS_HPP

#include <algorithm>
#include <cstddef>
#include <random>
#include <vector>

#include "eqlsr/netgraph.hpp"

namespace eqlsr::test {

inline auto one_layer(std::vector<std::string> inputs, std::vector<UnitKind> units) -> ArchitectureSpec
{
    ArchitectureSpec s;
    s.input_names = std::move(inputs);
    s.hidden_layers = { LayerSpec { std::move(units) } };
    return s;
}

// Weight index of z node `z` (0 or 1) of unit `unit` reading buffer position `pos`.
inline auto weight_at(Network const& net, std::size_t unit, std::size_t z, std::size_t pos) -> std::size_t
{
    return net.znodes()[net.units()[unit].first_z + z].offset + pos;
}

inline auto bias_at(Network const& net, std::size_t unit, std::size_t z = 0) -> std::size_t
{
    return net.znodes()[net.units()[unit].first_z + z].bias_index();
}

inline auto output_index(Network const& net) -> std::size_t { return net.units().size() - 1; }

inline void zero_all(Network& net) { std::ranges::fill(net.weights(), 0.0); }

inline auto random_point(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) -> std::vector<double>
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x(n);
    for (auto& v : x) { v = u(rng); }
    return x;
}

} // namespace eqlsr::test

#endif
