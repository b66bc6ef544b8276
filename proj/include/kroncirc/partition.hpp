#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kroncirc/sparse.hpp"

namespace kroncirc {

// One combinatorial rectangle: the full cartesian product rows x cols.
struct Rect {
    std::vector<std::uint32_t> rows;
    std::vector<std::uint32_t> cols;

    std::int64_t area() const {
        return static_cast<std::int64_t>(rows.size()) * static_cast<std::int64_t>(cols.size());
    }
    bool operator==(const Rect&) const = default;
};

// Partition of the support of a 0/1 matrix into all-ones rectangles.
struct RectPartition {
    SparseMatrix base;
    std::vector<Rect> rects;

    // Throws unless the rects are nonempty all-ones rectangles of base,
    // pairwise disjoint, covering every nonzero cell (which also forces the
    // base to be 0/1).
    void validate() const;

    // sum_j sqrt(|rows_j| * |cols_j|); exp(alpha1) of the derived decomposition.
    double objective() const;

    // ln(objective) / ln(base dimension): per-dimension growth rate.
    double exponent() const;

    // Sorts rows/cols within rects and rects by (rows, cols).
    void canonicalize();
};

// All maximal all-ones rectangles, via closure over row subsets, sorted by
// (rows, cols).  Requires 0/1 entries and dims <= 16.
std::vector<Rect> enumerate_rectangles(const SparseMatrix& base);

struct PartitionSearchResult {
    RectPartition partition;
    double objective = 0.0;
    bool optimal = false;
    std::uint64_t nodes = 0;
};

// Exact-cover search for the minimum-objective rectangle partition.  Branches
// on the lowest uncovered cell in row-major order; candidate rectangles are
// every all-ones, fully uncovered (row subset x column subset) containing that
// cell, tried in decreasing area order.  Lower bound: each uncovered cell
// costs at least 1/sqrt(largest all-ones rectangle through it).  Ties prefer
// fewer parts, then the partition whose canonical rect list ((rows, cols)
// ascending, rects sorted by that key) is lexicographically smallest.
// max_parts = 0
// means unconstrained (this mode memoizes on the uncovered-cell mask); a
// positive max_parts bounds the number of rects and raises an error when
// infeasible.  Requires dims <= 16 and nnz <= 64.  If node_cap is hit the
// best partition found so far is returned with optimal = false.
PartitionSearchResult partition_search(const SparseMatrix& base, int max_parts = 0,
                                       std::uint64_t node_cap = 200000000ull);

// One level of the doubling recurrence for set-disjointness partitions:
// (s, r) -> (s + 2r, s + r) from (1, 1).  size_bound = 2 (s + r) counts two
// layers of rank-one blocks by their longer side; wires = 2 s + 3 r counts
// the nonzeros exactly (a square side-s block costs 2s wires, a 2r x r
// rectangle block costs 3r).
struct JsLevel {
    int level = 0;
    std::int64_t s = 0;
    std::int64_t r = 0;
    std::int64_t size_bound = 0;
    std::int64_t wires = 0;
};

std::vector<JsLevel> js_recurrence(int n);

void partition_save(const std::string& path, const RectPartition& p);
RectPartition partition_load(const std::string& path);

}  // namespace kroncirc
