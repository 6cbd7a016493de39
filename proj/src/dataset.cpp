// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/dataset.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "eqlsr/errors.hpp"

namespace eqlsr {

void Dataset::add(std::span<double const> x, double y)
{
    if (x.size() != dim_) {
        throw DataError("row has " + std::to_string(x.size()) + " inputs, expected " + std::to_string(dim_));
    }
    inputs_.insert(inputs_.end(), x.begin(), x.end());
    targets_.push_back(y);
}

auto Dataset::merged(Dataset const& other) const -> Dataset
{
    if (other.dim_ != dim_) {
        throw DataError("cannot merge data sets of different dimension");
    }
    Dataset out = *this;
    out.inputs_.insert(out.inputs_.end(), other.inputs_.begin(), other.inputs_.end());
    out.targets_.insert(out.targets_.end(), other.targets_.begin(), other.targets_.end());
    return out;
}

auto rmse(ModelEval const& model, Dataset const& data) -> double
{
    if (data.empty()) {
        throw DataError("RMSE of an empty data set");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto const r = model(data.x(i)) - data.y(i);
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(data.size()));
}

auto format_double(double v) -> std::string
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return { buf, ptr };
}

void write_csv(std::ostream& os, Dataset const& data, std::vector<std::string> const& names)
{
    for (std::size_t j = 0; j < data.dim(); ++j) {
        os << (j < names.size() ? names[j] : "x" + std::to_string(j + 1)) << ',';
    }
    os << "y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (auto v : data.x(i)) {
            os << format_double(v) << ',';
        }
        os << format_double(data.y(i)) << '\n';
    }
}

namespace {
    auto split(std::string const& line) -> std::vector<std::string>
    {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            out.push_back(cell);
        }
        return out;
    }

    auto parse_double(std::string const& s) -> double
    {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc {} || ptr != s.data() + s.size()) {
            throw DataError("malformed number '" + s + "' in CSV");
        }
        return v;
    }
} // namespace

auto read_csv(std::istream& is) -> Dataset
{
    std::string line;
    if (!std::getline(is, line)) {
        throw DataError("CSV has no header");
    }
    auto const header = split(line);
    if (header.size() < 2) {
        throw DataError("CSV header needs at least one input and a target column");
    }
    Dataset data(header.size() - 1);
    std::vector<double> row(header.size() - 1);
    while (std::getline(is, line)) {
        if (line.empty()) { continue; }
        auto const cells = split(line);
        if (cells.size() != header.size()) {
            throw DataError("CSV row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
        }
        for (std::size_t j = 0; j + 1 < cells.size(); ++j) {
            row[j] = parse_double(cells[j]);
        }
        data.add(row, parse_double(cells.back()));
    }
    return data;
}

} // namespace eqlsr
