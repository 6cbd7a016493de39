// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#ifndef EQLSR_ERRORS_HPP
#define EQLSR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqlsr {

// Malformed architecture specs, empty layers, zero inputs.
class StructureError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid user configuration (config files, CLI arguments).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Empty data sets, missing evaluation sets, bad CSV/JSON payloads.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values in a forward or backward pass. `index` names the
// offending weight (gradients) or iteration (training runs).
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string const& what, std::size_t index)
        : std::runtime_error(what + " (index " + std::to_string(index) + ")")
        , index_(index)
    {
    }

    [[nodiscard]] auto index() const noexcept -> std::size_t { return index_; }

private:
    std::size_t index_;
};

} // namespace eqlsr

#endif
