#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "kroncirc/decomp.hpp"

namespace kroncirc {

// One generation step of a term.  Ordering is (kind, side, index), so label
// lexicographic order puts soft steps before hard ones.
enum class StepKind : int { soft = 0, hard = 1 };
enum class StepSide : int { forward = 0, reversed = 1 };

struct TermStep {
    StepKind kind = StepKind::soft;
    StepSide side = StepSide::forward;
    std::int32_t index = -1;  // pair index, soft steps only

    auto operator<=>(const TermStep&) const = default;
};

// Root-to-leaf path in the generation tree.  Since terms that take a hard
// step never return to soft balancing, every label is soft* hard*.
struct TermLabel {
    std::vector<TermStep> steps;

    // Number of soft steps = level at which the term left soft balancing.
    int exit_step() const;
    auto operator<=>(const TermLabel&) const = default;
};

struct BuildCaps {
    std::int64_t max_terms = std::int64_t(1) << 22;
    std::int64_t max_nnz = std::int64_t(1) << 28;
};

// A synchronous circuit: target = factors[0] x factors[1] x ... (output-side
// first).  meta records source, per-layer nnz and build parameters; size and
// per-layer values are always recomputable from the factors themselves.
struct Circuit {
    int depth = 0;
    std::vector<SparseMatrix> factors;
    nlohmann::json meta;

    std::int64_t size() const;
    std::vector<std::int64_t> per_layer() const;

    // Directory layout: manifest.json {depth, dims, factors, size, per_layer,
    // params} plus one .smx file per factor.
    void save(const std::string& dir) const;
    static Circuit load(const std::string& dir);
};

// Depth-2 build with the full term-level trace kept for inspection.
struct Depth2Build {
    Circuit circuit;
    std::vector<TermLabel> labels;  // canonical order, one per block
    std::vector<std::pair<std::int64_t, std::int64_t>> term_nnz;
    DecompStats stat;
    int soft_terms = 0;  // how many labels never took a hard step
};

// The soft/hard-balancing construction.  Level k spawns, for every term kept
// in soft balancing, one child per pair (forward lists when the term's two
// layers satisfy nnzA >= nnzB, else the dual lists); terms whose imbalance
// ratio reaches exp((n-k) ln(nnz(base)/q) + 2G) switch permanently to hard
// steps (identity on the light side, base on the heavy side).  All imbalance
// threshold comparisons are exact rational arithmetic.  Blocks are emitted in
// canonical order: soft-only terms in label order, then hard terms by (exit
// step, label).  Refuses decompositions that are neither imbalanced nor
// one-sided, since the size guarantee only covers those.
Depth2Build build_depth2(const Decomposition& d, int n, const BuildCaps& caps = {});

// Materializes the (A, B) block pair a label denotes, Kronecker-multiplying
// the chosen blocks left to right from (I_1, I_1).
std::pair<SparseMatrix, SparseMatrix> expand_term(const TermLabel& label, const Decomposition& d);

// factor i = I^((i-1) n/dpth) (x) m^(n/dpth) (x) I^((dpth-i) n/dpth);
// requires dpth | n.
Circuit build_mixed_product(const SparseMatrix& m, int n, int dpth);

// Depth boosting: builds the depth-2 circuit P x Q for the block
// base^(2n/dpth) and emits dpth factors I (x) P (x) I, I (x) Q (x) I at
// block positions 1..dpth/2.  n counts copies of d.base.  When dpth/2 does
// not divide n the block count is rounded up, the chain is restricted to the
// target's leading indices, and one layer is rescaled by
// base[0,0]^-(padding), which requires base[0,0] != 0.
Circuit boost_depth(const Decomposition& d, int n, int dpth, const BuildCaps& caps = {});

// Exact expectation of the layer-size process: enumerate every soft-step
// choice path with probability weight (1/J) per soft step, multiplying the
// per-step layer growth factors (J nnz for soft steps, nnz for hard steps).
// Equals the per-layer nnz of build_depth2(d, n) — the process is an
// unbiased size estimator and this is its exact mean.  Caps path count at
// 10^6.
std::pair<Rat, Rat> process_expectation(const Decomposition& d, int n);

}  // namespace kroncirc
