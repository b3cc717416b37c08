#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sublinopt {

// Counts entry lookups routed through the counting accessors.  One counter
// lives per solver run; the exact-scan reporting paths deliberately bypass it
// so entries_read reflects what the algorithm's control flow consumed.
struct AccessCounter {
    std::uint64_t entries_read = 0;
    std::uint64_t epoch_start = 0;

    void add(std::uint64_t k = 1) { entries_read += k; }
    void begin_epoch() { epoch_start = entries_read; }
    std::uint64_t epoch_reads() const { return entries_read - epoch_start; }
};

// Row-indexed n x d matrix with O(1) random entry access, cached per-row
// squared norms, and an access-instrumented accessor.  Rows are hash tables
// (column -> value); rows denser than 50% are stored as flat arrays instead,
// which keeps the generated dense benchmark instances cache friendly.
class DataMatrix {
  public:
    DataMatrix() = default;
    DataMatrix(std::size_t n_rows, std::size_t n_cols);

    std::size_t n_rows() const { return n_; }
    std::size_t n_cols() const { return d_; }
    std::size_t nnz() const { return nnz_; }

    // Build API: set entries, then finalize() once.  Zero values are dropped.
    void set_entry(std::size_t i, std::size_t j, double v);
    // Validates indices, densifies heavy rows, caches norms.  Throws
    // std::runtime_error naming the row if enforce_norms and some
    // ||A_i||^2 > 1 + 1e-9.
    void finalize(bool enforce_norms = true);

    bool finalized() const { return finalized_; }
    double row_sq_norm(std::size_t i) const { return row_sq_norms_[i]; }
    const std::vector<double>& row_sq_norms() const { return row_sq_norms_; }
    std::size_t row_nnz(std::size_t i) const { return rows_[i].nnz; }

    // Counted lookup: the accessor every sampling path goes through.
    double get_entry(std::size_t i, std::size_t j, AccessCounter& c) const {
        c.add(1);
        return value_at(i, j);
    }

    // Identical value without instrumentation; used by exact oracles and by
    // the full-scan reporting of achieved objectives.
    double get_entry_uncounted(std::size_t i, std::size_t j) const {
        return value_at(i, j);
    }

    // Iterate the stored nonzeros of row i (order unspecified for sparse
    // rows).  f(col, value).
    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        const Row& r = rows_[i];
        if (r.dense) {
            for (std::size_t j = 0; j < r.values.size(); ++j)
                if (r.values[j] != 0.0) f(j, r.values[j]);
        } else {
            for (const auto& [j, v] : r.map) f(static_cast<std::size_t>(j), v);
        }
    }

    // Flat value array of a densified row (length n_cols), or nullptr for
    // hash-backed rows.  Lets hot loops stream the row without the per-entry
    // zero test for_each_in_row does.
    const double* dense_row_values(std::size_t i) const {
        const Row& r = rows_[i];
        return r.dense ? r.values.data() : nullptr;
    }

    // Sorted (col, value) snapshot of row i; serialization and scans use this
    // so output does not depend on hash iteration order.
    std::vector<std::pair<std::uint32_t, double>> row_sorted(std::size_t i) const;

    // Exact A_i . x for a dense x of length n_cols; uncounted.
    double dot_row_uncounted(std::size_t i, const double* x) const;

  private:
    struct Row {
        bool dense = false;
        std::size_t nnz = 0;
        std::unordered_map<std::uint32_t, double> map;
        std::vector<double> values;  // used when dense
    };

    double value_at(std::size_t i, std::size_t j) const {
        check_indices(i, j);
        const Row& r = rows_[i];
        if (r.dense) return r.values[j];
        auto it = r.map.find(static_cast<std::uint32_t>(j));
        return it == r.map.end() ? 0.0 : it->second;
    }

    void check_indices(std::size_t i, std::size_t j) const;

    std::size_t n_ = 0, d_ = 0, nnz_ = 0;
    std::vector<Row> rows_;
    std::vector<double> row_sq_norms_;
    bool finalized_ = false;
};

// Free-function spelling of the counted accessor.
inline double get_entry(const DataMatrix& m, std::size_t i, std::size_t j,
                        AccessCounter& c) {
    return m.get_entry(i, j, c);
}

// On-disk instance format: optional '#' comment lines, then "n d", then n
// lines of whitespace-separated "col:value" pairs (0-based, decimal).  Values
// are written with 17 significant digits so save -> load round-trips exactly.
//
// enforce_norms: game payoff matrices waive the unit-ball row constraint (they
// only promise entries in [-1,1]); everything else keeps it.
DataMatrix load_instance(const std::string& path, bool enforce_norms = true);
void save_instance(const DataMatrix& m, const std::string& path);

}  // namespace sublinopt
