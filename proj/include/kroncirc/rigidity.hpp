#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kroncirc/sparse.hpp"

namespace kroncirc {

// Low-rank-plus-sparse witness: target = u x v + s, rank_bound bounds the
// inner dimension of u x v, changes = nnz(s).
struct RigidityWitness {
    std::string target_name;  // preset name when known, else empty
    SparseMatrix target;
    SparseMatrix u;  // N x r
    SparseMatrix v;  // r x N
    SparseMatrix s;  // N x N
    std::int64_t rank_bound = 0;
    std::int64_t changes = 0;
};

void witness_save(const std::string& path, const RigidityWitness& w);
RigidityWitness witness_load(const std::string& path);

// Splits m = dl * m1 * dr with diagonal dl, dr and m1 outer-1 (first row and
// first column all ones).  Requires every entry in row 0 and column 0 nonzero.
// Convention: dl[i,i] = m[i,0], dr[j,j] = m[0,j] / m[0,0].
struct Outer1Split {
    SparseMatrix dl, m1, dr;
};
Outer1Split outer1_normalize(const SparseMatrix& m);

// Agreement-count mode: exact integer exponent agreement (generic) or
// agreement mod 2 (wh, the +/-1 case).
enum class PairMode { generic, wh };

// Rank-1 approximations of [[1,1],[1,w]]^(x)n (generic w) and H_n built from
// the weight-based exponent vectors b1, b2 (four cases by n mod 4).
RigidityWitness rank1_construct_kron2(const FieldElement& omega, int n);
RigidityWitness rank1_construct_wh(int n, const FieldSpec& field = FieldSpec::rationals());

// The b1/b2 exponent vectors themselves (length 2^n each); exposed so reports
// can show them, and reused by both constructions.
std::pair<std::vector<int>, std::vector<int>> rank1_b_vectors(int n);

// Closed-form count of pairs (x, y) with b1[x] + b2[y] = <x,y> (generic) or
// the same congruence mod 2 (wh):
//   generic, even n:  2^n * C(n+1, n/2)
//   generic, odd n:   2^(n-1) * C(n+2, (n+1)/2)
//   wh, even n:       2^(2n-1) + 2^(1.5n - 1)
//   wh, odd n:        2^(2n-1) + 2^(1.5(n-1))
BigInt good_pair_count(int n, PairMode mode);

// 2^(2n) - good_pair_count: the change count the constructions realize.
BigInt rank1_changes_closed_form(int n, PairMode mode);

// Sum of C(n, t) over t in [0, n] with t = r (mod s), by direct summation.
BigInt multisection(int n, int s, int r);
// Trigonometric closed form for s = 4, evaluated exactly in Z[sqrt 2].
BigInt multisection4_closed(int n, int r);

BigInt binom(long long n, long long k);

// Exact minimum of changes over rank-<=1 approximations u * v^T with u-entries
// drawn from entry_pool and each v[y] chosen optimally (any field scalar).
// Ties broken toward the lexicographically smallest u in pool-index order.
struct Rank1Minimum {
    std::int64_t changes = 0;
    RigidityWitness witness;
};
Rank1Minimum rank1_oracle(const SparseMatrix& m, const std::vector<FieldElement>& entry_pool);

// Simulated annealing over sign vectors u in {+-1}^N with column-optimal v.
// Deterministic for a fixed seed.  Over +-1 matrices of dimension 2^n it is
// seeded from the construction's sign vector, so it never ends worse.
Rank1Minimum rank1_anneal(const SparseMatrix& m, std::uint64_t iterations, std::uint64_t seed);

// Exhaustive-search optimum for H_5 rank-1 changes; regression reference only,
// not recomputed by default (the closed-form construction gives 448).
inline constexpr std::int64_t kH5Rank1Exact = 432;

// Degree-(r-1) polynomial taking value constants[i-1] on every x with
// |x| = k + i, i in [r]; stored in the integer-valued basis C(w - k - 1, j).
// Solved by forward substitution (unit lower-triangular), so it is
// division-free and valid over any field.
struct InterpolationPoly {
    FieldSpec field;
    int k = 0;
    std::vector<FieldElement> coeffs;  // a_j, j = 0..r-1

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    // Value at any hamming weight w (depends on x only through w).
    FieldElement eval_at_weight(long long w) const;
};
InterpolationPoly interpolation_poly(const FieldSpec& field, int r, int k,
                                     const std::vector<FieldElement>& constants);

// Polynomial-method decomposition of m^(x)n: a polynomial agreeing with the
// product formula whenever every pattern count e_st(x,y) lies in [l, h],
// expanded into multilinear monomials over the q^2 * n indicator variables
// e_s(x_i) e_t(y_i).  rank_bound = number of monomials.
struct PolyDecomp {
    SparseMatrix u;  // q^n x monomials
    SparseMatrix v;  // monomials x q^n
    SparseMatrix s;  // q^n x q^n, = m^(x)n - u x v
    std::int64_t rank_bound = 0;
    std::int64_t changes = 0;
    BigInt good_pairs = 0;   // exact count of pairs with all e_st in [l, h]
    BigInt bad_pairs = 0;    // exact complement
    BigInt union_bound = 0;  // sum over patterns of out-of-window pair counts
};
PolyDecomp polymethod_decomp(const SparseMatrix& m, int n, int l, int h);

// Circuit exponents implied by the rank-1 counts: for a 2^k x 2^k base with
// rank-1 rigidity R, the per-bit exponent is ln(2^k + sqrt(2^k R)) / (k ln 2).
double exponent_kron2(int k);
double exponent_wh(int k);

// Earlier route through rigidity: c = log_N((r+1)(r + R/N)); the resulting
// circuit exponent is 1 + c/2.
struct PriorExponent {
    double c = 0;
    double exponent = 0;
};
PriorExponent exponent_prior(double r, double rig, double n_dim);

// c_n = log_{2^n}(2 (1 + R_n / 2^n)) for n = 1..max_n, using the exact wh
// change counts for n <= 4 and the lower bound 432 * 4^(n-5) beyond.
std::vector<std::pair<int, double>> prior_c_table(int max_n);

// Entropy-window parameters for general q: h(s,q), a_q and b_q = 1.5 - a_q
// (base-2 logs).
struct GeneralQExponent {
    double h = 0, a = 0, b = 0;
};
GeneralQExponent exponent_general_q(double q, double s = 0.4);

// log2(1 + sqrt 2), the square/rectangle gluing exponent.
double exponent_js();

}  // namespace kroncirc
