#include "sublinopt/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sublinopt {

DataMatrix::DataMatrix(std::size_t n_rows, std::size_t n_cols)
    : n_(n_rows), d_(n_cols), rows_(n_rows), row_sq_norms_(n_rows, 0.0) {}

void DataMatrix::check_indices(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= d_)
        throw std::out_of_range("DataMatrix: index (" + std::to_string(i) +
                                "," + std::to_string(j) + ") outside " +
                                std::to_string(n_) + "x" + std::to_string(d_));
}

void DataMatrix::set_entry(std::size_t i, std::size_t j, double v) {
    check_indices(i, j);
    if (finalized_)
        throw std::logic_error("DataMatrix: set_entry after finalize");
    Row& r = rows_[i];
    if (v == 0.0) {
        r.map.erase(static_cast<std::uint32_t>(j));
        return;
    }
    r.map[static_cast<std::uint32_t>(j)] = v;
}

void DataMatrix::finalize(bool enforce_norms) {
    nnz_ = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        Row& r = rows_[i];
        r.nnz = r.map.size();
        nnz_ += r.nnz;
        double sq = 0.0;
        for (const auto& [j, v] : r.map) {
            (void)j;
            sq += v * v;
        }
        row_sq_norms_[i] = sq;
        if (enforce_norms && sq > 1.0 + 1e-9)
            throw std::runtime_error(
                "DataMatrix: row " + std::to_string(i) +
                " violates the unit-ball constraint (||A_i||^2 = " +
                std::to_string(sq) + ")");
        // Densify rows past 50% fill: contiguous access beats hash lookups
        // on the generated benchmark instances, which are fully dense.
        if (d_ > 0 && 2 * r.nnz > d_) {
            r.dense = true;
            r.values.assign(d_, 0.0);
            for (const auto& [j, v] : r.map) r.values[j] = v;
            r.map.clear();
        }
    }
    finalized_ = true;
}

std::vector<std::pair<std::uint32_t, double>> DataMatrix::row_sorted(
    std::size_t i) const {
    if (i >= n_) throw std::out_of_range("DataMatrix: row " + std::to_string(i));
    std::vector<std::pair<std::uint32_t, double>> out;
    const Row& r = rows_[i];
    out.reserve(r.nnz);
    if (r.dense) {
        for (std::size_t j = 0; j < r.values.size(); ++j)
            if (r.values[j] != 0.0)
                out.emplace_back(static_cast<std::uint32_t>(j), r.values[j]);
    } else {
        for (const auto& [j, v] : r.map) out.emplace_back(j, v);
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return out;
}

double DataMatrix::dot_row_uncounted(std::size_t i, const double* x) const {
    const Row& r = rows_[i];
    if (r.dense) {
        // Four independent partials: a single accumulator serializes on FP
        // add latency, and the solvers call this scan per reporting pass.
        const double* __restrict v = r.values.data();
        const std::size_t len = r.values.size();
        double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
        std::size_t j = 0;
        for (; j + 4 <= len; j += 4) {
            t0 += v[j] * x[j];
            t1 += v[j + 1] * x[j + 1];
            t2 += v[j + 2] * x[j + 2];
            t3 += v[j + 3] * x[j + 3];
        }
        double rest = 0.0;
        for (; j < len; ++j) rest += v[j] * x[j];
        return ((t0 + t1) + (t2 + t3)) + rest;
    }
    double acc = 0.0;
    for (const auto& [j, v] : r.map) acc += v * x[j];
    return acc;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

DataMatrix load_instance(const std::string& path, bool enforce_norms) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);

    std::string line;
    std::size_t line_no = 0;
    // Header: first non-comment line must be "n d".
    std::size_t n = 0, d = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream hs(line);
        if (!(hs >> n >> d)) parse_fail(path, line_no, "expected header 'n d'");
        std::string extra;
        if (hs >> extra) parse_fail(path, line_no, "trailing tokens after 'n d'");
        have_header = true;
        break;
    }
    if (!have_header) parse_fail(path, line_no, "empty instance file");

    DataMatrix m(n, d);
    std::size_t row = 0;
    while (row < n) {
        if (!std::getline(in, line))
            parse_fail(path, line_no, "expected " + std::to_string(n) +
                                          " rows, got " + std::to_string(row));
        ++line_no;
        if (!line.empty() && line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                parse_fail(path, line_no, "expected 'col:value', got '" + tok + "'");
            std::size_t col = 0;
            double val = 0.0;
            try {
                std::size_t used = 0;
                col = std::stoull(tok.substr(0, colon), &used);
                if (used != colon) throw std::invalid_argument(tok);
                val = std::stod(tok.substr(colon + 1), &used);
                if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                parse_fail(path, line_no, "malformed pair '" + tok + "'");
            }
            if (col >= d)
                parse_fail(path, line_no, "column " + std::to_string(col) +
                                              " out of range (d = " +
                                              std::to_string(d) + ")");
            m.set_entry(row, col, val);
        }
        ++row;
    }
    try {
        m.finalize(enforce_norms);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return m;
}

void save_instance(const DataMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << m.n_rows() << " " << m.n_cols() << "\n";
    char buf[64];
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        bool first = true;
        for (const auto& [j, v] : m.row_sorted(i)) {
            // %.17g round-trips every double exactly.
            std::snprintf(buf, sizeof buf, "%.17g", v);
            if (!first) out << ' ';
            out << j << ':' << buf;
            first = false;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace sublinopt
