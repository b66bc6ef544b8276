#include "kroncirc/verify.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "kroncirc/rng.hpp"

namespace kroncirc {

namespace {

constexpr std::uint64_t kVerifyPrimes[] = {2147483647ull, 2305843009213693951ull};

std::string target_desc(const SparseMatrix& base, int n) {
    return std::to_string(base.rows()) + "x" + std::to_string(base.cols()) + " base ^(x)" +
           std::to_string(n);
}

bool nonzero(const std::vector<FieldElement>& v) {
    for (const auto& x : v)
        if (!x.is_zero()) return true;
    return false;
}

}  // namespace

nlohmann::json VerifyReport::to_json() const {
    return nlohmann::json{{"mode", mode},     {"target", target}, {"pass", pass},
                          {"trials", trials}, {"seed", seed},     {"details", details}};
}

VerifyReport verify_exact(const Circuit& c, const SparseMatrix& base, int n) {
    VerifyReport rep;
    rep.mode = "exact";
    rep.target = target_desc(base, n);
    rep.details["per_layer"] = c.per_layer();

    double dim = std::pow(double(base.rows()), n);
    if (std::pow(double(base.rows()), n) > 4096.0 || std::pow(double(base.cols()), n) > 4096.0)
        throw CapExceededError(
            "verify_exact: target dimension exceeds the 4096 materialization cap; "
            "use random mode",
            std::uint64_t(std::min(dim, 1e18)), 4096);

    SparseMatrix target = kron_power(base, n);
    std::int64_t got_rows = c.factors.empty() ? target.rows() : c.factors.front().rows();
    std::int64_t got_cols = c.factors.empty() ? target.cols() : c.factors.back().cols();
    if (got_rows != target.rows() || got_cols != target.cols()) {
        rep.pass = false;
        rep.details["mismatch"] = {{"kind", "dimensions"},
                                   {"got", {got_rows, got_cols}},
                                   {"want", {target.rows(), target.cols()}}};
        return rep;
    }

    SparseMatrix prod = SparseMatrix::identity(target.rows(), base.field());
    for (const auto& f : c.factors) prod = matmul(prod, f);

    // Entries are sorted row-major on both sides; walk them in lockstep and
    // report the first coordinate where the values differ.
    const auto& pe = prod.entries();
    const auto& te = target.entries();
    std::size_t i = 0, j = 0;
    while (i < pe.size() || j < te.size()) {
        auto key = [](const SparseMatrix::Entry& e) { return std::pair(e.row, e.col); };
        bool take_p = j == te.size() || (i < pe.size() && key(pe[i]) <= key(te[j]));
        bool take_t = i == pe.size() || (j < te.size() && key(te[j]) <= key(pe[i]));
        std::uint32_t r = take_p ? pe[i].row : te[j].row;
        std::uint32_t col = take_p ? pe[i].col : te[j].col;
        FieldElement got = take_p ? pe[i].v : FieldElement::zero(base.field());
        FieldElement want = take_t ? te[j].v : FieldElement::zero(base.field());
        if (got != want) {
            rep.pass = false;
            rep.details["mismatch"] = {
                {"row", r}, {"col", col}, {"want", want.str()}, {"got", got.str()}};
            return rep;
        }
        if (take_p) ++i;
        if (take_t) ++j;
    }
    rep.pass = true;
    return rep;
}

VerifyReport verify_random(const Circuit& c, const SparseMatrix& base, int n, int trials,
                           std::uint64_t seed) {
    VerifyReport rep;
    rep.mode = "random";
    rep.target = target_desc(base, n);
    rep.trials = trials;
    rep.seed = seed;
    rep.details["per_layer"] = c.per_layer();
    if (trials == 0) {
        rep.pass = true;
        rep.details["warning"] = "zero trials: vacuous pass";
        return rep;
    }
    if (c.factors.empty()) throw InvalidInputError("verify_random: circuit has no factors");
    for (std::size_t i = 0; i + 1 < c.factors.size(); ++i)
        if (c.factors[i].cols() != c.factors[i + 1].rows())
            throw DimensionError("verify_random: factor chain dimensions do not match");

    auto ipow = [](std::int64_t b, int e) {
        BigInt r(1);
        for (int i = 0; i < e; ++i) r *= b;
        return r;
    };
    if (ipow(base.rows(), n) != c.factors.front().rows() ||
        ipow(base.cols(), n) != c.factors.back().cols()) {
        rep.pass = false;
        rep.details["mismatch"] = {{"kind", "dimensions"},
                                   {"got", {c.factors.front().rows(), c.factors.back().cols()}}};
        return rep;
    }

    // Choose the verification prime and reduce everything once.
    SparseMatrix base_p;
    std::vector<SparseMatrix> factors_p;
    std::uint64_t p = 0;
    if (base.field().kind == FieldKind::prime) {
        p = base.field().modulus;
        base_p = base;
        factors_p = c.factors;
        for (const auto& f : c.factors)
            if (f.field() != base.field())
                throw FieldMismatchError("verify_random: circuit field differs from base field");
    } else {
        std::string last_error;
        for (std::uint64_t cand : kVerifyPrimes) {
            try {
                base_p = to_prime_field(base, cand);
                factors_p.clear();
                for (const auto& f : c.factors) factors_p.push_back(to_prime_field(f, cand));
                p = cand;
                break;
            } catch (const InvalidInputError& e) {
                last_error = e.what();
            }
        }
        if (p == 0)
            throw InvalidInputError("verify_random: no prime in the fixed list avoids the "
                                    "circuit's denominators: " + last_error);
    }
    rep.details["prime"] = p;

    std::int64_t in_dim = c.factors.back().cols();
    rep.pass = true;
    for (int t = 0; t < trials; ++t) {
        SplitMix64 rng(derive_seed(seed, std::uint64_t(t)));
        std::vector<FieldElement> x;
        x.reserve(std::size_t(in_dim));
        for (std::int64_t i = 0; i < in_dim; ++i)
            x.push_back(FieldElement::prime(rng.below(p), p));
        std::vector<FieldElement> y = x;
        for (std::size_t i = factors_p.size(); i-- > 0;) y = kroncirc::apply(factors_p[i], y);
        std::vector<FieldElement> want = kron_power_apply(base_p, n, x);
        if (y.size() != want.size()) {
            rep.pass = false;
            rep.details["mismatch"] = {{"trial", t}, {"kind", "dimensions"}};
            break;
        }
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] != want[i]) {
                rep.pass = false;
                rep.details["mismatch"] = {{"trial", t},
                                           {"coordinate", i},
                                           {"want", want[i].str()},
                                           {"got", y[i].str()}};
                break;
            }
        }
        if (!rep.pass) break;
    }
    return rep;
}

nlohmann::json SizeReport::to_json() const {
    nlohmann::json j{{"per_layer", per_layer}, {"total", total}, {"depth", depth}};
    if (exponent_raw) j["exponent_raw"] = *exponent_raw;
    if (exponent_adjusted) j["exponent_adjusted"] = *exponent_adjusted;
    if (exponent_per_layer) j["exponent_per_layer"] = *exponent_per_layer;
    if (mixed_product_size)j["mixed_product_size"] = mixed_product_size->str();
    return j;
}

SizeReport size_report(const Circuit& c) {
    SizeReport rep;
    rep.per_layer = c.per_layer();
    rep.total = c.size();
    rep.depth = int(c.factors.size());
    if (c.meta.contains("q") && c.meta.contains("n")) {
        std::int64_t q = c.meta["q"].get<std::int64_t>();
        int n = c.meta["n"].get<int>();
        if (q >= 2 && n >= 1 && rep.total > 0) {
            double denom = double(n) * std::log(double(q));
            rep.exponent_raw = std::log(double(rep.total)) / denom;
            if (rep.depth > 0)
                rep.exponent_per_layer =
                    std::log(double(rep.total) / rep.depth) / denom;
            if (c.meta.contains("G")) {
                double g = c.meta["G"].get<double>();
                rep.exponent_adjusted =
                    std::log(double(rep.total) / (2.0 * std::exp(2.0 * g) * (n + 1))) / denom;
            }
            if (c.meta.contains("base_nnz")) {
                std::int64_t m = c.meta["base_nnz"].get<std::int64_t>();
                int b = (n + 1) / 2;
                auto ipow = [](Rat x, int e) {
                    Rat r(1);
                    for (int i = 0; i < e; ++i) r *= x;
                    return r;
                };
                rep.mixed_product_size =
                    ipow(Rat(m), b) * ipow(Rat(q), n - b) + ipow(Rat(m), n - b) * ipow(Rat(q), b);
            }
        }
    }
    return rep;
}

Circuit corrupt_circuit(const Circuit& c, std::uint64_t seed) {
    if (c.factors.empty()) throw InvalidInputError("corrupt_circuit: circuit has no factors");
    SplitMix64 rng(seed);
    const FieldSpec& f = c.factors.front().field();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::size_t fi = std::size_t(rng.below(c.factors.size()));
        const SparseMatrix& m = c.factors[fi];
        if (m.nnz() == 0) continue;
        std::size_t ei = std::size_t(rng.below(std::uint64_t(m.nnz())));
        const auto& e = m.entries()[ei];

        // The product changes iff the perturbed wire is live: the entry's row
        // must map to a nonzero output through the layers above, and its
        // column must be hit by some input through the layers below.
        std::vector<FieldElement> left(std::size_t(m.rows()), FieldElement::zero(f));
        left[e.row] = FieldElement::one(f);
        for (std::size_t j = fi; j-- > 0;) left = kroncirc::apply(c.factors[j], left);
        if (!nonzero(left)) continue;
        std::vector<FieldElement> right(std::size_t(m.cols()), FieldElement::zero(f));
        right[e.col] = FieldElement::one(f);
        bool alive = true;
        for (std::size_t j = fi + 1; j < c.factors.size(); ++j) {
            right = kroncirc::apply(transpose(c.factors[j]), right);
            if (!nonzero(right)) {
                alive = false;
                break;
            }
        }
        if (!alive) continue;

        auto entries = m.entries();
        entries[ei].v += FieldElement::one(f);
        Circuit out = c;
        out.factors[fi] =
            SparseMatrix::from_triplets(m.rows(), m.cols(), f, std::move(entries));
        out.meta["corruption"] = {{"factor", fi}, {"row", e.row}, {"col", e.col}};
        return out;
    }
    throw Error("corrupt_circuit: no live wire found (is the circuit all-zero?)");
}

}  // namespace kroncirc
