#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kroncirc/builder.hpp"

namespace kroncirc {

struct VerifyReport {
    std::string mode;    // "exact" or "random"
    std::string target;  // human description of what was checked
    bool pass = false;
    int trials = 0;
    std::uint64_t seed = 0;
    nlohmann::json details;  // per-layer nnz, mismatch coordinates, prime, warnings

    nlohmann::json to_json() const;
};

// Multiplies the factor chain exactly and compares it entrywise to
// base^(x)n.  Refuses targets with more than 4096 rows or columns; use
// verify_random beyond that.  On failure, details carries the first
// mismatching coordinate in row-major order.
VerifyReport verify_exact(const Circuit& c, const SparseMatrix& base, int n);

// Randomized identity test: per trial, draws a vector with entries uniform
// over a prime field (fixed list {2^31-1, 2^61-1}, tried in order until the
// circuit's denominators survive reduction; prime-field circuits use their
// own modulus), then compares the chained factor application against
// kron_power_apply.  A wrong circuit passes a trial with probability at most
// dim/p.  trials = 0 passes vacuously, flagged in details.
VerifyReport verify_random(const Circuit& c, const SparseMatrix& base, int n, int trials,
                           std::uint64_t seed);

struct SizeReport {
    std::vector<std::int64_t> per_layer;  // recomputed from the factors
    std::int64_t total = 0;
    int depth = 0;
    // ln(total) / (n ln q); needs n, q in the circuit meta.
    std::optional<double> exponent_raw;
    // ln(total / (2 e^{2G} (n+1))) / (n ln q): the raw exponent with the
    // guarantee's slack factor removed; needs G in the meta as well.
    std::optional<double> exponent_adjusted;
    // ln(total / depth) / (n ln q): per-layer view, log_N of the average layer.
    std::optional<double> exponent_per_layer;
    // Honest same-target baseline: m^b q^(n-b) + m^(n-b) q^b, b = ceil(n/2).
    std::optional<Rat> mixed_product_size;

    nlohmann::json to_json() const;
};

// Measures a circuit.  All counts come from the stored factors; meta is only
// consulted for the target parameters (q, n, G) the exponent views need.
SizeReport size_report(const Circuit& c);

// Fault injection for the detection experiments: adds 1 to one stored entry
// of one factor, chosen by seed and rejection-sampled until the wire is live
// (its row is reachable from the output layer and its column from the input
// layer), so the product provably changes.
Circuit corrupt_circuit(const Circuit& c, std::uint64_t seed);

}  // namespace kroncirc
