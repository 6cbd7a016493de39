// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_DATASET_HPP
#define EQLSR_DATASET_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace eqlsr {

// Any input -> output model: network forward, AST evaluation, reference law.
using ModelEval = std::function<double(std::span<double const>)>;

// Row-major (x, y) samples.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t dim)
        : dim_(dim)
    {
    }

    void add(std::span<double const> x, double y);

    [[nodiscard]] auto dim() const noexcept -> std::size_t { return dim_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return targets_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return targets_.empty(); }
    [[nodiscard]] auto x(std::size_t i) const noexcept -> std::span<double const> { return { inputs_.data() + i * dim_, dim_ }; }
    [[nodiscard]] auto y(std::size_t i) const noexcept -> double { return targets_[i]; }
    [[nodiscard]] auto targets() const noexcept -> std::span<double const> { return targets_; }
    [[nodiscard]] auto y_mut(std::size_t i) noexcept -> double& { return targets_[i]; }

    // Concatenation; both sets must share the dimension.
    [[nodiscard]] auto merged(Dataset const& other) const -> Dataset;

    friend auto operator==(Dataset const&, Dataset const&) -> bool = default;

private:
    std::size_t dim_ { 0 };
    std::vector<double> inputs_;
    std::vector<double> targets_;
};

// RMSE of `model` on `data`. Throws DataError on an empty set.
[[nodiscard]] auto rmse(ModelEval const& model, Dataset const& data) -> double;

// CSV with header "x1,...,xn,y" (or the supplied names); values printed with
// shortest round-trip formatting so re-reading is bit-exact.
void write_csv(std::ostream& os, Dataset const& data, std::vector<std::string> const& names);
[[nodiscard]] auto read_csv(std::istream& is) -> Dataset;

// Shortest decimal string that parses back to exactly `v`.
[[nodiscard]] auto format_double(double v) -> std::string;

} // namespace eqlsr

#endif
