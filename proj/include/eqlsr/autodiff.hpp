// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_AUTODIFF_HPP
#define EQLSR_AUTODIFF_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "eqlsr/netgraph.hpp"

namespace eqlsr {

// Set of weight indices, stored as a dense membership mask.
class IndexSet {
public:
    IndexSet() = default;

    static auto all(std::size_t size) -> IndexSet;
    static auto none(std::size_t size) -> IndexSet;
    static auto of(std::size_t size, std::span<std::size_t const> indices) -> IndexSet;

    [[nodiscard]] auto contains(std::size_t i) const noexcept -> bool { return i < mask_.size() && mask_[i] != 0; }
    [[nodiscard]] auto universe() const noexcept -> std::size_t { return mask_.size(); }
    [[nodiscard]] auto count() const noexcept -> std::size_t;
    [[nodiscard]] auto indices() const -> std::vector<std::size_t>;

private:
    std::vector<unsigned char> mask_;
};

struct GradientVector {
    std::vector<double> values;
};

// Reverse sweep for one forward pass. Seeds: adjoint of the network output and
// optional adjoints injected directly on z nodes (length znodes().size(), or
// empty). Weight adjoints are accumulated into `grad`.
class BackwardPass {
public:
    void accumulate(Network const& net, ForwardCache const& cache, double output_adjoint,
        std::span<double const> z_adjoint, std::span<double> grad);

private:
    std::vector<double> value_adj_;
};

// Masks a raw gradient to the trainable set and checks finiteness.
// Throws NumericalError naming the first non-finite weight index.
[[nodiscard]] auto finalize_gradient(std::vector<double> raw, IndexSet const& trainable) -> GradientVector;

struct AdamConfig {
    double lr { 1e-3 };
    double beta1 { 0.9 };
    double beta2 { 0.999 };
    double eps { 1e-8 };
};

struct AdamState {
    AdamConfig config;
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t { 0 };

    AdamState() = default;
    AdamState(std::size_t size, AdamConfig cfg)
        : config(cfg)
        , m(size, 0.0)
        , v(size, 0.0)
    {
    }
    void reset()
    {
        std::fill(m.begin(), m.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        t = 0;
    }
};

// Bias-corrected Adam update of the trainable indices only; moments of other
// indices are left untouched.
void adam_step(Network& net, GradientVector const& grad, AdamState& state, IndexSet const& trainable);

// Sets every weight outside `keep` to exactly zero.
void zero_masked(Network& net, IndexSet const& keep);

} // namespace eqlsr

#endif
