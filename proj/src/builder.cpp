#include "kroncirc/builder.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json_util.hpp"

namespace kroncirc {

namespace {

Rat rat_pow(const Rat& base, long long e) {
    if (e < 0) return rat_pow(Rat(1) / base, -e);
    Rat r(1), b = base;
    for (; e > 0; e >>= 1) {
        if (e & 1) r *= b;
        b *= b;
    }
    return r;
}

// max(nnzA, nnzB) / min(nnzA, nnzB) = exp(|gamma|), exactly.
Rat imbalance_ratio(std::int64_t na, std::int64_t nb) {
    return na >= nb ? Rat(na, nb) : Rat(nb, na);
}

// Orientation-resolved view of a decomposition.  Soft steps on a term with
// nnzA >= nnzB draw from `primary`, otherwise from `dual`; hard steps use
// `hard` directly (its two application orders are both valid by the
// decomposition contract).  Threshold comparisons happen against exact
// rational images of exp(G) and exp(Gamma_k); G is evaluated on the pairs as
// given, which orientation flips preserve.
struct BuildContext {
    DecompStats stat;
    std::vector<FactorPair> primary;
    std::vector<FactorPair> dual;
    HardPair hard;
    std::int64_t q = 0;       // base rows
    std::int64_t qc = 0;      // base cols
    std::int64_t base_nnz = 0;
    Rat moq;                  // exp(ln(nnz/q))
    Rat eG;                   // exp(G)
};

BuildContext make_context(const Decomposition& d) {
    validate(d);
    BuildContext ctx;
    ctx.stat = stats(d);
    ctx.q = d.base.rows();
    ctx.qc = d.base.cols();
    ctx.base_nnz = d.base.nnz();
    ctx.primary = d.pairs;
    ctx.dual = d.effective_duals();
    ctx.hard = d.effective_hard();
    if (ctx.stat.oriented) {
        std::swap(ctx.primary, ctx.dual);
        Decomposition flipped;
        flipped.base = d.base;
        flipped.pairs = ctx.primary;
        flipped.dual_pairs = ctx.dual;
        flipped.hard_pair = d.hard_pair;
        if (stats(flipped).oriented)
            throw InvalidInputError("dual pairs do not reverse the orientation of the given pairs");
    }
    ctx.moq = Rat(ctx.base_nnz, ctx.q);
    ctx.eG = ctx.moq;
    for (const auto& p : d.pairs) ctx.eG = std::max(ctx.eG, imbalance_ratio(p.u.nnz(), p.v.nnz()));
    return ctx;
}

struct Term {
    TermLabel label;
    std::int64_t na = 1;
    std::int64_t nb = 1;
};

// Appends one step to a term, updating the tracked layer sizes.
Term child_of(const Term& t, const BuildContext& ctx, TermStep step) {
    Term c = t;
    c.label.steps.push_back(step);
    const SparseMatrix* left;
    const SparseMatrix* right;
    if (step.kind == StepKind::soft) {
        const auto& p =
            (step.side == StepSide::forward ? ctx.primary : ctx.dual)[std::size_t(step.index)];
        left = &p.u;
        right = &p.v;
    } else if (step.side == StepSide::forward) {
        left = &ctx.hard.left;
        right = &ctx.hard.right;
    } else {
        left = &ctx.hard.right;
        right = &ctx.hard.left;
    }
    c.na = t.na * left->nnz();
    c.nb = t.nb * right->nnz();
    return c;
}

std::pair<SparseMatrix, SparseMatrix> expand_with(const BuildContext& ctx, const FieldSpec& f,
                                                  const TermLabel& label) {
    SparseMatrix a = SparseMatrix::identity(1, f);
    SparseMatrix b = SparseMatrix::identity(1, f);
    bool seen_hard = false;
    for (const auto& s : label.steps) {
        if (s.kind == StepKind::soft) {
            if (seen_hard) throw InvalidInputError("expand_term: soft step after hard step");
            const auto& list = s.side == StepSide::forward ? ctx.primary : ctx.dual;
            if (s.index < 0 || std::size_t(s.index) >= list.size())
                throw InvalidInputError("expand_term: pair index out of range");
            a = kron(a, list[std::size_t(s.index)].u);
            b = kron(b, list[std::size_t(s.index)].v);
        } else {
            seen_hard = true;
            const SparseMatrix& l = s.side == StepSide::forward ? ctx.hard.left : ctx.hard.right;
            const SparseMatrix& r = s.side == StepSide::forward ? ctx.hard.right : ctx.hard.left;
            a = kron(a, l);
            b = kron(b, r);
        }
    }
    return {std::move(a), std::move(b)};
}

void require_buildable(const DecompStats& st) {
    if (!st.imbalanced && !st.one_sided)
        throw InvalidInputError(
            "decomposition is neither imbalanced nor one-sided, so the depth-2 size "
            "guarantee does not apply; use build_mixed_product for such bases");
}

std::int64_t checked_pow(std::int64_t b, int e, const char* what) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (b != 0 && r > (std::int64_t(1) << 32) / b)
            throw CapExceededError(std::string(what) + ": dimension exceeds 2^32",
                                   std::uint64_t(r), std::uint64_t(1) << 32);
        r *= b;
    }
    return r;
}

}  // namespace

int TermLabel::exit_step() const {
    int k = 0;
    while (k < int(steps.size()) && steps[std::size_t(k)].kind == StepKind::soft) ++k;
    return k;
}

std::int64_t Circuit::size() const {
    std::int64_t s = 0;
    for (const auto& f : factors) s += f.nnz();
    return s;
}

std::vector<std::int64_t> Circuit::per_layer() const {
    std::vector<std::int64_t> v;
    v.reserve(factors.size());
    for (const auto& f : factors) v.push_back(f.nnz());
    return v;
}

Depth2Build build_depth2(const Decomposition& d, int n, const BuildCaps& caps) {
    if (n < 0) throw InvalidInputError("build_depth2: n must be >= 0");
    BuildContext ctx = make_context(d);
    require_buildable(ctx.stat);
    checked_pow(ctx.q, n, "build_depth2");
    checked_pow(ctx.qc, n, "build_depth2");

    std::vector<Term> soft_terms{Term{}};  // still balancing
    std::vector<Term> hard_terms;          // exited; extend with hard steps only
    for (int k = 1; k <= n; ++k) {
        for (auto& t : hard_terms) {
            StepSide side = t.na >= t.nb ? StepSide::forward : StepSide::reversed;
            t = child_of(t, ctx, TermStep{StepKind::hard, side, -1});
        }
        Rat threshold = rat_pow(ctx.moq, n - k) * ctx.eG * ctx.eG;
        std::vector<Term> next;
        for (const auto& t : soft_terms) {
            StepSide side = t.na >= t.nb ? StepSide::forward : StepSide::reversed;
            const auto& list = side == StepSide::forward ? ctx.primary : ctx.dual;
            for (std::size_t j = 0; j < list.size(); ++j) {
                Term c = child_of(t, ctx, TermStep{StepKind::soft, side, std::int32_t(j)});
                if (c.na > caps.max_nnz || c.nb > caps.max_nnz)
                    throw CapExceededError("build_depth2: term nnz cap exceeded",
                                           std::uint64_t(std::max(c.na, c.nb)),
                                           std::uint64_t(caps.max_nnz));
                if (imbalance_ratio(c.na, c.nb) < threshold)
                    next.push_back(std::move(c));
                else
                    hard_terms.push_back(std::move(c));
            }
            if (std::int64_t(next.size() + hard_terms.size()) > caps.max_terms)
                throw CapExceededError("build_depth2: term count cap exceeded",
                                       next.size() + hard_terms.size(),
                                       std::uint64_t(caps.max_terms));
        }
        soft_terms = std::move(next);
    }

    std::sort(soft_terms.begin(), soft_terms.end(),
              [](const Term& a, const Term& b) { return a.label < b.label; });
    std::sort(hard_terms.begin(), hard_terms.end(), [](const Term& a, const Term& b) {
        return std::pair(a.label.exit_step(), a.label) < std::pair(b.label.exit_step(), b.label);
    });

    Depth2Build out;
    out.stat = ctx.stat;
    out.soft_terms = int(soft_terms.size());
    std::vector<Term> all = std::move(soft_terms);
    all.insert(all.end(), std::make_move_iterator(hard_terms.begin()),
               std::make_move_iterator(hard_terms.end()));

    std::int64_t total_nnz = 0;
    for (const auto& t : all) total_nnz += t.na + t.nb;
    if (total_nnz > caps.max_nnz)
        throw CapExceededError("build_depth2: circuit nnz cap exceeded", std::uint64_t(total_nnz),
                               std::uint64_t(caps.max_nnz));

    std::vector<SparseMatrix> ablocks, bblocks;
    ablocks.reserve(all.size());
    bblocks.reserve(all.size());
    for (const auto& t : all) {
        auto [a, b] = expand_with(ctx, d.base.field(), t.label);
        if (a.nnz() != t.na || b.nnz() != t.nb)
            throw Error("build_depth2: materialized term nnz disagrees with tracked sizes");
        ablocks.push_back(std::move(a));
        bblocks.push_back(std::move(b));
        out.labels.push_back(t.label);
        out.term_nnz.emplace_back(t.na, t.nb);
    }

    Circuit c;
    c.depth = 2;
    c.factors.push_back(hconcat(ablocks));
    c.factors.push_back(vstack(bblocks));
    c.meta = nlohmann::json{
        {"method", "depth2"},
        {"n", n},
        {"q", ctx.q},
        {"base_nnz", ctx.base_nnz},
        {"base", matrix_to_json(d.base)},
        {"G", ctx.stat.G},
        {"alpha1", ctx.stat.alpha1},
        {"alpha2", ctx.stat.alpha2},
        {"beta", ctx.stat.beta},
        {"oriented", ctx.stat.oriented},
        {"one_sided", ctx.stat.one_sided},
        {"imbalanced", ctx.stat.imbalanced},
        {"terms", all.size()},
        {"soft_terms", out.soft_terms},
    };
    out.circuit = std::move(c);
    return out;
}

std::pair<SparseMatrix, SparseMatrix> expand_term(const TermLabel& label, const Decomposition& d) {
    return expand_with(make_context(d), d.base.field(), label);
}

Circuit build_mixed_product(const SparseMatrix& m, int n, int dpth) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw InvalidInputError("build_mixed_product: base must be square and nonempty");
    if (dpth < 1 || n < 0 || n % dpth != 0)
        throw InvalidInputError("build_mixed_product: dpth must be >= 1 and divide n");
    int b = n / dpth;
    std::int64_t q = m.rows();
    checked_pow(q, n, "build_mixed_product");
    SparseMatrix mb = kron_power(m, b);
    Circuit c;
    c.depth = dpth;
    for (int i = 1; i <= dpth; ++i) {
        std::int64_t lo = checked_pow(q, (i - 1) * b, "build_mixed_product");
        std::int64_t hi = checked_pow(q, (dpth - i) * b, "build_mixed_product");
        c.factors.push_back(kron(kron(SparseMatrix::identity(lo, m.field()), mb),
                                 SparseMatrix::identity(hi, m.field())));
    }
    c.meta = nlohmann::json{
        {"method", "mixed-product"}, {"n", n},       {"q", q}, {"base_nnz", m.nnz()},
        {"base", matrix_to_json(m)}, {"dpth", dpth},
    };
    return c;
}

Circuit boost_depth(const Decomposition& d, int n, int dpth, const BuildCaps& caps) {
    if (dpth < 2 || dpth % 2 != 0)
        throw InvalidInputError("boost_depth: dpth must be even and >= 2");
    if (n < 1) throw InvalidInputError("boost_depth: n must be >= 1");
    if (d.base.rows() != d.base.cols())
        throw InvalidInputError("boost_depth: base must be square");
    if (dpth == 2) {
        Circuit c = build_depth2(d, n, caps).circuit;
        c.meta["method"] = "boost";
        c.meta["dpth"] = 2;
        return c;
    }
    int halves = dpth / 2;
    int b = (n + halves - 1) / halves;
    int pad = b * halves - n;
    FieldElement corner = d.base.get(0, 0);
    if (pad > 0 && corner.is_zero())
        throw InvalidInputError("boost_depth: dpth/2 does not divide n and base[0,0] = 0, "
                                "so the padded chain cannot be rescaled");

    std::int64_t q = d.base.rows();
    checked_pow(q, b * halves, "boost_depth");
    Circuit blk = build_depth2(d, b, caps).circuit;
    const SparseMatrix& p = blk.factors[0];
    const SparseMatrix& qf = blk.factors[1];

    Circuit c;
    c.depth = dpth;
    const FieldSpec& f = d.base.field();
    for (int i = 1; i <= halves; ++i) {
        std::int64_t lo = checked_pow(q, (i - 1) * b, "boost_depth");
        std::int64_t hi = checked_pow(q, (halves - i) * b, "boost_depth");
        c.factors.push_back(kron(kron(SparseMatrix::identity(lo, f), p),
                                 SparseMatrix::identity(hi, f)));
        c.factors.push_back(kron(kron(SparseMatrix::identity(lo, f), qf),
                                 SparseMatrix::identity(hi, f)));
    }

    if (pad > 0) {
        // The top-left q^n block of base^(x)(n+pad) is base[0,0]^pad *
        // base^(x)n (low-order digits index the leading copies), so the chain
        // restricted to those rows/cols computes the target up to that scalar.
        std::int64_t dim = checked_pow(q, n, "boost_depth");
        auto restrict_rows = [&](const SparseMatrix& m) {
            std::vector<SparseMatrix::Entry> es;
            for (const auto& e : m.entries())
                if (e.row < dim) es.push_back(e);
            return SparseMatrix::from_triplets(dim, m.cols(), f, std::move(es));
        };
        auto restrict_cols = [&](const SparseMatrix& m) {
            std::vector<SparseMatrix::Entry> es;
            for (const auto& e : m.entries())
                if (e.col < dim) es.push_back(e);
            return SparseMatrix::from_triplets(m.rows(), dim, f, std::move(es));
        };
        c.factors.front() = restrict_rows(c.factors.front());
        c.factors.back() = scale(restrict_cols(c.factors.back()), corner.pow(-pad));
    }

    c.meta = nlohmann::json{
        {"method", "boost"},
        {"n", n},
        {"q", q},
        {"base_nnz", d.base.nnz()},
        {"base", matrix_to_json(d.base)},
        {"dpth", dpth},
        {"block_exponent", b},
        {"padding", pad},
        {"block", blk.meta},
    };
    return c;
}

std::pair<Rat, Rat> process_expectation(const Decomposition& d, int n) {
    if (n < 0) throw InvalidInputError("process_expectation: n must be >= 0");
    BuildContext ctx = make_context(d);
    require_buildable(ctx.stat);

    std::uint64_t branch = std::max(ctx.primary.size(), ctx.dual.size());
    std::uint64_t paths = 1;
    for (int i = 0; i < n; ++i) {
        paths *= branch;
        if (paths > 1000000)
            throw CapExceededError("process_expectation: path count cap exceeded", paths, 1000000);
    }

    // Thresholds for levels 1..n, exp(Gamma_k) exactly.
    std::vector<Rat> thresholds;
    for (int k = 1; k <= n; ++k)
        thresholds.push_back(rat_pow(ctx.moq, n - k) * ctx.eG * ctx.eG);

    Rat ea(0), eb(0);
    // The process draws one of J pairs uniformly at each soft step and each
    // layer grows by (J nnz); hard steps grow by nnz with probability one.
    // Expectation = sum over choice paths of weight * growth, kept exact.
    auto walk = [&](auto&& self, int k, std::int64_t na, std::int64_t nb, bool exited,
                    const Rat& wa, const Rat& wb) -> void {
        if (k == n) {
            ea += wa;
            eb += wb;
            return;
        }
        if (exited) {
            StepSide side = na >= nb ? StepSide::forward : StepSide::reversed;
            const SparseMatrix& l = side == StepSide::forward ? ctx.hard.left : ctx.hard.right;
            const SparseMatrix& r = side == StepSide::forward ? ctx.hard.right : ctx.hard.left;
            self(self, k + 1, na * l.nnz(), nb * r.nnz(), true, wa * l.nnz(), wb * r.nnz());
            return;
        }
        StepSide side = na >= nb ? StepSide::forward : StepSide::reversed;
        const auto& list = side == StepSide::forward ? ctx.primary : ctx.dual;
        Rat pick(1, std::int64_t(list.size()));
        for (const auto& p : list) {
            std::int64_t cna = na * p.u.nnz();
            std::int64_t cnb = nb * p.v.nnz();
            bool stays = imbalance_ratio(cna, cnb) < thresholds[std::size_t(k)];
            self(self, k + 1, cna, cnb, !stays,
                 wa * pick * Rat(std::int64_t(list.size()) * p.u.nnz()),
                 wb * pick * Rat(std::int64_t(list.size()) * p.v.nnz()));
        }
    };
    walk(walk, 0, 1, 1, false, Rat(1), Rat(1));
    return {ea, eb};
}

void Circuit::save(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["depth"] = depth;
    nlohmann::json dims = nlohmann::json::array();
    if (!factors.empty()) {
        dims.push_back(factors.front().rows());
        for (const auto& f : factors) dims.push_back(f.cols());
    }
    manifest["dims"] = std::move(dims);
    nlohmann::json names = nlohmann::json::array();
    for (std::size_t i = 0; i < factors.size(); ++i) {
        std::string name = "f" + std::to_string(i) + ".smx";
        smx_save((fs::path(dir) / name).string(), factors[i]);
        names.push_back(name);
    }
    manifest["factors"] = std::move(names);
    manifest["size"] = size();
    manifest["per_layer"] = per_layer();
    manifest["params"] = meta.is_null() ? nlohmann::json::object() : meta;
    std::ofstream os(fs::path(dir) / "manifest.json");
    if (!os) throw Error("cannot write " + dir + "/manifest.json");
    os << manifest.dump(2) << "\n";
}

Circuit Circuit::load(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream is(fs::path(dir) / "manifest.json");
    if (!is) throw InvalidInputError("cannot open " + dir + "/manifest.json");
    nlohmann::json manifest = nlohmann::json::parse(is);
    Circuit c;
    c.depth = manifest.at("depth").get<int>();
    for (const auto& name : manifest.at("factors"))
        c.factors.push_back(smx_load((fs::path(dir) / name.get<std::string>()).string()));
    c.meta = manifest.value("params", nlohmann::json::object());
    if (int(c.factors.size()) != c.depth)
        throw InvalidInputError("manifest depth disagrees with factor count");
    for (std::size_t i = 0; i + 1 < c.factors.size(); ++i)
        if (c.factors[i].cols() != c.factors[i + 1].rows())
            throw DimensionError("factor chain dimensions do not match");
    if (manifest.contains("size") && manifest["size"].get<std::int64_t>() != c.size())
        throw InvalidInputError("manifest size disagrees with factor files");
    return c;
}

}  // namespace kroncirc
