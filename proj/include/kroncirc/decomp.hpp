#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kroncirc/partition.hpp"
#include "kroncirc/rigidity.hpp"
#include "kroncirc/sparse.hpp"

namespace kroncirc {

// One summand of a sum-of-products decomposition: u is q x r_j, v is r_j x q.
struct FactorPair {
    SparseMatrix u;
    SparseMatrix v;
};

// A pair (left, right) with left x right = right x left = base; both
// orientations must reproduce the base so either side may absorb it.
struct HardPair {
    SparseMatrix left;
    SparseMatrix right;
};

// base = sum_j pairs[j].u x pairs[j].v, and the same for dual_pairs when
// present.  dual_pairs is a second decomposition of the same base used for
// reversed steps; for a symmetric base it defaults to the transposes
// (v_j^T, u_j^T).  hard_pair defaults to (I, base).
struct Decomposition {
    SparseMatrix base;
    std::vector<FactorPair> pairs;
    std::optional<std::vector<FactorPair>> dual_pairs;
    std::optional<HardPair> hard_pair;

    HardPair effective_hard() const;
    // Stored duals, else transposes for a symmetric base; throws
    // InvalidInputError for an asymmetric base without stored duals.
    std::vector<FactorPair> effective_duals() const;
};

// Imbalance statistics, natural logs.  Let a_j = nnz(u_j), b_j = nnz(v_j),
// gamma_j = ln(a_j/b_j), K_j = sqrt(a_j b_j), m = nnz(base), q = dim:
//   G      = max(ln(m/q), max_j |gamma_j|)
//   E      = sum_j gamma_j K_j / sum_j K_j, sign-flipped so E <= 0
//            (oriented records whether the flip was applied)
//   alpha1 = ln sum_j K_j
//   alpha2 = ln sqrt(m q)
//   beta   = (ln(m/q) / 6G) * min{1, -4E/(E+G)}, with beta = 0 when m = q
// one_sided is evaluated on the pairs as given (no orientation):
// a_j <= b_j for every j.  imbalanced means beta > alpha2 - alpha1.
struct DecompStats {
    double G = 0.0;
    double E = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta = 0.0;
    bool oriented = false;
    bool one_sided = false;
    bool imbalanced = false;
};

// True iff every pair sum (and the dual sum and hard product, when stored)
// reproduces the base exactly.  Throws on dimension mismatches or zero
// factors.
bool validate(const Decomposition& d);

// Throws InvalidInputError when nnz(base) < q (beta undefined).  The
// imbalance verdict is recomputed in extended precision when beta and
// alpha2 - alpha1 are within 1e-9 of each other, so rounding cannot flip it.
DecompStats stats(const Decomposition& d);

// J = q pairs: u_j = j-th column, v_j = j-th standard basis row; all-zero
// columns are dropped.
Decomposition gen_one_hot(const SparseMatrix& m);

// pairs [(U,V), (I,S)], dual pairs [(U,V), (S,I)], hard pair (I, base);
// collapses to the single pair (U,V) when S = 0.
Decomposition from_rigidity(const RigidityWitness& w);

// One pair per rectangle: u_j the 0/1 column indicator of the row set,
// v_j the 0/1 row indicator of the column set.
Decomposition from_partition(const RectPartition& p);

void decomp_save(const std::string& path, const Decomposition& d);
Decomposition decomp_load(const std::string& path);

// Preset grammar: onehot:<base>, rigidity:wh:<k>, rigidity:kron2:<omega>:<k>,
// partition:auto (searches base_hint), file:<path>.  base_hint is required
// only by partition:auto.
Decomposition parse_decomp(const std::string& name, const FieldSpec& field,
                           const SparseMatrix* base_hint = nullptr);

}  // namespace kroncirc
