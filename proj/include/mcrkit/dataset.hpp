#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mcrkit/errors.hpp"
#include "mcrkit/rng.hpp"

namespace mcrkit {

/// Immutable sample: outcome y, covariates of interest X1, remaining
/// covariates X2. X2 may be empty (zero columns); n >= 2 always.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X1;
    Eigen::MatrixXd X2;
    std::vector<std::string> column_names; // outcome first, then X1 cols, then X2 cols

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p1() const { return X1.cols(); }
    Eigen::Index p2() const { return X2.cols(); }

    void validate() const {
        if (n() < 2) throw Error("Dataset requires n >= 2, got n=" + std::to_string(n()));
        if (X1.rows() != n() || (p2() > 0 && X2.rows() != n()))
            throw DimensionMismatch("covariate blocks must have the same row count as y");
        if (p1() < 1) throw Error("X1 must have at least one column");
    }

    /// Rows of [X1 X2] stacked, used by kernel feature construction.
    Eigen::MatrixXd covariates() const {
        Eigen::MatrixXd X(n(), p1() + p2());
        X.leftCols(p1()) = X1;
        if (p2() > 0) X.rightCols(p2()) = X2;
        return X;
    }

    Dataset select_rows(const std::vector<std::size_t>& rows) const {
        Dataset out;
        const auto m = static_cast<Eigen::Index>(rows.size());
        out.y.resize(m);
        out.X1.resize(m, p1());
        out.X2.resize(m, p2());
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
            out.y[i] = y[r];
            out.X1.row(i) = X1.row(r);
            if (p2() > 0) out.X2.row(i) = X2.row(r);
        }
        out.column_names = column_names;
        return out;
    }
};

struct SplitSpec {
    std::size_t n_train = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_cell(const std::string& s, std::size_t row, std::size_t col) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    double v = 0.0;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw NonNumericCell("non-numeric cell at row " + std::to_string(row) +
                             ", column " + std::to_string(col) + ": '" + s + "'");
    return v;
}

} // namespace detail

/// Loads an RFC-4180 CSV with a header row. `outcome_col` becomes y,
/// `x1_cols` become X1 (in the given order), every other column becomes X2
/// with file order preserved.
inline Dataset load_csv(const std::string& path, const std::string& outcome_col,
                        const std::vector<std::string>& x1_cols) {
    std::ifstream in(path);
    if (!in) throw EmptyFile("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw EmptyFile("empty file: " + path);
    const auto header = detail::split_csv_line(line);

    auto find_col = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return j;
        throw MissingColumn("column '" + name + "' not found in header of " + path);
    };

    const std::size_t y_idx = find_col(outcome_col);
    std::vector<std::size_t> x1_idx;
    for (const auto& c : x1_cols) {
        const std::size_t j = find_col(c);
        if (j == y_idx) throw ConfigError("outcome column '" + c + "' cannot also be in x1_cols");
        x1_idx.push_back(j);
    }
    std::vector<std::size_t> x2_idx;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == y_idx) continue;
        bool in_x1 = false;
        for (const auto k : x1_idx) in_x1 = in_x1 || (k == j);
        if (!in_x1) x2_idx.push_back(j);
    }
    if (x1_idx.empty()) throw ConfigError("x1_cols must name at least one column");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw NonNumericCell("row " + std::to_string(lineno) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(header.size()));
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j)
            row[j] = detail::parse_cell(fields[j], lineno, j + 1);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyFile("no data rows in " + path);

    Dataset d;
    const auto n = static_cast<Eigen::Index>(rows.size());
    d.y.resize(n);
    d.X1.resize(n, static_cast<Eigen::Index>(x1_idx.size()));
    d.X2.resize(n, static_cast<Eigen::Index>(x2_idx.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        d.y[i] = row[y_idx];
        for (std::size_t j = 0; j < x1_idx.size(); ++j)
            d.X1(i, static_cast<Eigen::Index>(j)) = row[x1_idx[j]];
        for (std::size_t j = 0; j < x2_idx.size(); ++j)
            d.X2(i, static_cast<Eigen::Index>(j)) = row[x2_idx[j]];
    }
    d.column_names.push_back(header[y_idx]);
    for (const auto j : x1_idx) d.column_names.push_back(header[j]);
    for (const auto j : x2_idx) d.column_names.push_back(header[j]);
    d.validate();
    return d;
}

/// Writes a Dataset back to CSV with shortest round-trip formatting, so a
/// save/load cycle is bit-exact for finite doubles.
inline void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    const auto names = d.column_names;
    auto col_name = [&](std::size_t k, const char* prefix, std::size_t i) {
        return k < names.size() ? names[k] : std::string(prefix) + std::to_string(i);
    };
    out << col_name(0, "y", 0);
    for (Eigen::Index j = 0; j < d.p1(); ++j)
        out << ',' << col_name(1 + static_cast<std::size_t>(j), "x1_", static_cast<std::size_t>(j));
    for (Eigen::Index j = 0; j < d.p2(); ++j)
        out << ',' << col_name(1 + static_cast<std::size_t>(d.p1() + j), "x2_", static_cast<std::size_t>(j));
    out << '\n';
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        out << fmt(d.y[i]);
        for (Eigen::Index j = 0; j < d.p1(); ++j) out << ',' << fmt(d.X1(i, j));
        for (Eigen::Index j = 0; j < d.p2(); ++j) out << ',' << fmt(d.X2(i, j));
        out << '\n';
    }
}

/// Uniform-random disjoint row partition, deterministic given the seed.
inline std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
    const auto n = static_cast<std::size_t>(data.n());
    if (spec.n_train == 0 || spec.n_train >= n)
        throw InvalidSplitSize("n_train must satisfy 0 < n_train < n; got n_train=" +
                               std::to_string(spec.n_train) + ", n=" + std::to_string(n));
    Rng rng(spec.seed);
    const auto perm = rng.permutation(n);
    std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.n_train));
    std::vector<std::size_t> analysis(perm.begin() + static_cast<std::ptrdiff_t>(spec.n_train), perm.end());
    return {data.select_rows(train), data.select_rows(analysis)};
}

/// Replaces X1 with its residual after a per-column least-squares fit on
/// [X2 1]. Rank deficiency resolves to the minimum-norm coefficients.
inline Dataset impute_residualize(const Dataset& data) {
    if (data.p2() < 1) throw NoX2Columns("impute_residualize requires at least one X2 column");
    const Eigen::Index n = data.n();
    Eigen::MatrixXd A(n, data.p2() + 1);
    A.leftCols(data.p2()) = data.X2;
    A.col(data.p2()).setOnes();
    const Eigen::MatrixXd G = A.completeOrthogonalDecomposition().solve(data.X1);
    Dataset out = data;
    out.X1 = data.X1 - A * G;
    return out;
}

} // namespace mcrkit
