#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kroncirc/field.hpp"

namespace kroncirc {

// Sparse matrix in canonical form: entries sorted row-major, unique
// coordinates, no stored zeros.  All arithmetic is exact.
class SparseMatrix {
  public:
    struct Entry {
        std::uint32_t row;
        std::uint32_t col;
        FieldElement v;
    };

    SparseMatrix() : rows_(0), cols_(0), field_(FieldSpec::rationals()) {}
    SparseMatrix(std::int64_t rows, std::int64_t cols, FieldSpec field);

    // Canonicalizes: sorts, merges duplicate coordinates by summation, drops zeros.
    static SparseMatrix from_triplets(std::int64_t rows, std::int64_t cols, FieldSpec field,
                                      std::vector<Entry> entries);
    static SparseMatrix identity(std::int64_t n, const FieldSpec& field);

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(entries_.size()); }
    const FieldSpec& field() const { return field_; }
    const std::vector<Entry>& entries() const { return entries_; }

    FieldElement get(std::int64_t r, std::int64_t c) const;
    bool is_symmetric() const;
    bool is_diagonal() const;

    // Offsets into entries() per row (size rows+1).
    std::vector<std::size_t> row_ptr() const;

  private:
    std::int64_t rows_, cols_;
    FieldSpec field_;
    std::vector<Entry> entries_;
};

// Kronecker product with the index law
//   (A (x) B)[i1 + a_rows*i3, i2 + a_cols*i4] = A[i1,i2] * B[i3,i4],
// i.e. A's index is the low-order digit.  nnz is multiplicative.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix sub(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix transpose(const SparseMatrix& a);
bool equals(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix scale(const SparseMatrix& a, const FieldElement& s);

// m^(x)n materialized ( n = 0 gives the 1x1 identity ).
SparseMatrix kron_power(const SparseMatrix& m, int n);

// y = m * x for a dense vector x.
std::vector<FieldElement> apply(const SparseMatrix& m, const std::vector<FieldElement>& x);

// y = (m^(x)n) * x without materializing the power: n in-place passes, one per
// digit position, O(n * q * q^n) scalar operations.
std::vector<FieldElement> kron_power_apply(const SparseMatrix& m, int n,
                                           const std::vector<FieldElement>& x);

// Horizontal concatenation [a_1 | a_2 | ...] and vertical stack; used to
// assemble circuit layers from term blocks.
SparseMatrix hconcat(const std::vector<SparseMatrix>& blocks);
SparseMatrix vstack(const std::vector<SparseMatrix>& blocks);

// Entrywise image in GF(p); throws InvalidInputError if a denominator
// vanishes mod p.
SparseMatrix to_prime_field(const SparseMatrix& m, std::uint64_t p);

// SMX text format:
//   SMX <rows> <cols> <nnz> <field>
// followed by nnz lines "<row> <col> <value>" in row-major order, 0-based,
// values in canonical form.  Exact round-trip.
void smx_write(std::ostream& os, const SparseMatrix& m);
SparseMatrix smx_read(std::istream& is);
void smx_save(const std::string& path, const SparseMatrix& m);
SparseMatrix smx_load(const std::string& path);

}  // namespace kroncirc
