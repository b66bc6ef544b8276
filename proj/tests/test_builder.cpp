#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "kroncirc/builder.hpp"
#include "kroncirc/presets.hpp"

using namespace kroncirc;
using doctest::Approx;

namespace {

const FieldSpec kQ = FieldSpec::rationals();

Decomposition r1_row_decomp() {
    RectPartition p;
    p.base = disjointness(1);
    p.rects = {Rect{{0}, {0, 1}}, Rect{{1}, {0}}};
    return from_partition(p);
}

Decomposition r3_partition_decomp() {
    SparseMatrix r3 = disjointness(3);
    return parse_decomp("partition:auto", kQ, &r3);
}

SparseMatrix ones_col(std::int64_t r) {
    std::vector<SparseMatrix::Entry> es;
    for (std::int64_t i = 0; i < r; ++i)
        es.push_back({static_cast<std::uint32_t>(i), 0, FieldElement::rational(1)});
    return SparseMatrix::from_triplets(r, 1, kQ, std::move(es));
}

// All-ones 4x4 split into two column halves: pairs (4,2), (4,2).  Valid, but
// neither imbalanced (beta = 1/6 < alpha2 - alpha1 = ln(8/(2 sqrt 8))) nor
// one-sided, so the depth-2 builder must refuse it.
Decomposition j4_column_halves() {
    Decomposition d;
    std::vector<SparseMatrix::Entry> es;
    for (std::uint32_t i = 0; i < 4; ++i)
        for (std::uint32_t j = 0; j < 4; ++j) es.push_back({i, j, FieldElement::rational(1)});
    d.base = SparseMatrix::from_triplets(4, 4, kQ, std::move(es));
    auto sel = [](std::uint32_t c0, std::uint32_t c1) {
        return SparseMatrix::from_triplets(
            1, 4, kQ, {{0, c0, FieldElement::rational(1)}, {0, c1, FieldElement::rational(1)}});
    };
    d.pairs = {FactorPair{ones_col(4), sel(0, 1)}, FactorPair{ones_col(4), sel(2, 3)}};
    return d;
}

// Exact per-term imbalance bound exp(4G) for a decomposition.
Rat exp4G(const Decomposition& d) {
    Rat eg(d.base.nnz(), d.base.rows());
    for (const auto& p : d.pairs) {
        std::int64_t a = p.u.nnz(), b = p.v.nnz();
        eg = std::max(eg, a >= b ? Rat(a, b) : Rat(b, a));
    }
    return eg * eg * eg * eg;
}

void check_product_and_laws(const Decomposition& d, int n) {
    Depth2Build b = build_depth2(d, n);
    REQUIRE(b.circuit.depth == 2);
    REQUIRE(b.circuit.factors.size() == 2);
    CHECK(equals(matmul(b.circuit.factors[0], b.circuit.factors[1]), kron_power(d.base, n)));

    DecompStats st = b.stat;
    double law = st.imbalanced
                     ? 2.0 * std::exp(2.0 * st.G) * (n + 1) * std::exp(st.alpha1 * n)
                     : 2.0 * std::exp(2.0 * st.G) * std::exp(st.alpha1 * n);
    CHECK(double(b.circuit.size()) <= law * (1.0 + 1e-9));

    Rat bound = exp4G(d);
    for (auto [na, nb] : b.term_nnz) {
        Rat ratio = na >= nb ? Rat(na, nb) : Rat(nb, na);
        CHECK(ratio < bound);
    }
}

}  // namespace

TEST_CASE("depth-2 build on the 2x2 disjointness base, small powers") {
    Decomposition d = r1_row_decomp();

    Depth2Build b0 = build_depth2(d, 0);
    CHECK(b0.circuit.size() == 2);  // two 1x1 identity layers
    CHECK(equals(matmul(b0.circuit.factors[0], b0.circuit.factors[1]),
                 SparseMatrix::identity(1, kQ)));

    Depth2Build b1 = build_depth2(d, 1);
    CHECK(b1.circuit.per_layer() == std::vector<std::int64_t>{2, 3});
    CHECK(equals(matmul(b1.circuit.factors[0], b1.circuit.factors[1]), disjointness(1)));

    Depth2Build b2 = build_depth2(d, 2);
    REQUIRE(b2.labels.size() == 4);
    CHECK(b2.soft_terms == 4);  // nothing exits at n = 2
    std::vector<std::pair<std::int64_t, std::int64_t>> expect = {{2, 2}, {1, 2}, {1, 2}, {1, 1}};
    std::sort(expect.begin(), expect.end());
    auto got = b2.term_nnz;
    std::sort(got.begin(), got.end());
    CHECK(got == expect);
    CHECK(b2.circuit.per_layer() == std::vector<std::int64_t>{5, 7});
    CHECK(b2.circuit.size() == 12);

    for (int n = 1; n <= 6; ++n) check_product_and_laws(d, n);
}

TEST_CASE("depth-2 build on the 8-part disjointness partition") {
    Decomposition d = r3_partition_decomp();
    for (int n = 1; n <= 3; ++n) check_product_and_laws(d, n);
}

TEST_CASE("one-sided decompositions build without the imbalance premium") {
    Decomposition d = gen_one_hot(SparseMatrix::identity(2, kQ));
    DecompStats st = stats(d);
    CHECK(st.one_sided);
    CHECK_FALSE(st.imbalanced);
    Depth2Build b = build_depth2(d, 3);
    CHECK(b.soft_terms == 0);  // every term exits at its first level
    CHECK(b.circuit.size() == 16);  // == 2 e^{2G} e^{alpha1 n} exactly here
    CHECK(equals(matmul(b.circuit.factors[0], b.circuit.factors[1]),
                 SparseMatrix::identity(8, kQ)));
    for (const auto& label : b.labels) CHECK(label.exit_step() == 1);
}

TEST_CASE("terms are emitted in canonical order") {
    auto check_order = [](const Depth2Build& b, int n) {
        std::size_t soft = std::size_t(b.soft_terms);
        for (std::size_t i = 1; i < soft; ++i) CHECK(b.labels[i - 1] < b.labels[i]);
        for (std::size_t i = soft + 1; i < b.labels.size(); ++i) {
            auto key = [](const TermLabel& l) { return std::pair(l.exit_step(), l); };
            CHECK(key(b.labels[i - 1]) < key(b.labels[i]));
        }
        // One step per level, and terms still balancing at the end never took
        // a hard step.
        for (std::size_t i = 0; i < b.labels.size(); ++i)
            CHECK(b.labels[i].steps.size() == std::size_t(n));
        for (std::size_t i = 0; i < soft; ++i) CHECK(b.labels[i].exit_step() == n);
    };
    Depth2Build r1 = build_depth2(r1_row_decomp(), 5);
    CHECK(r1.soft_terms == int(r1.labels.size()));  // ratio stays under every threshold
    check_order(r1, 5);
    Depth2Build r3 = build_depth2(r3_partition_decomp(), 3);
    CHECK(r3.soft_terms < int(r3.labels.size()));  // heavy rectangles do exit
    check_order(r3, 3);
}

TEST_CASE("expand_term materializes the labelled blocks") {
    Decomposition d = r1_row_decomp();

    auto [e0, e1] = expand_term(TermLabel{}, d);
    CHECK(equals(e0, SparseMatrix::identity(1, kQ)));
    CHECK(equals(e1, SparseMatrix::identity(1, kQ)));

    TermLabel soft0;
    soft0.steps = {TermStep{StepKind::soft, StepSide::forward, 0}};
    auto [a, b] = expand_term(soft0, d);
    CHECK(a.nnz() == 1);
    CHECK(b.nnz() == 2);
    CHECK(equals(matmul(a, b), matmul(d.pairs[0].u, d.pairs[0].v)));

    TermLabel rev;
    rev.steps = {TermStep{StepKind::soft, StepSide::forward, 0},
                 TermStep{StepKind::soft, StepSide::reversed, 1}};
    auto [ra, rb] = expand_term(rev, d);
    CHECK(ra.nnz() == 1);
    CHECK(rb.nnz() == 2);

    // Every emitted label reproduces its tracked sizes.
    Depth2Build bd = build_depth2(d, 3);
    for (std::size_t i = 0; i < bd.labels.size(); ++i) {
        auto [ta, tb] = expand_term(bd.labels[i], d);
        CHECK(ta.nnz() == bd.term_nnz[i].first);
        CHECK(tb.nnz() == bd.term_nnz[i].second);
    }

    TermLabel bad;
    bad.steps = {TermStep{StepKind::hard, StepSide::forward, -1},
                 TermStep{StepKind::soft, StepSide::forward, 0}};
    CHECK_THROWS_AS(expand_term(bad, d), InvalidInputError);
    TermLabel oob;
    oob.steps = {TermStep{StepKind::soft, StepSide::forward, 7}};
    CHECK_THROWS_AS(expand_term(oob, d), InvalidInputError);
}

TEST_CASE("builder refuses decompositions outside the guarantee") {
    Decomposition d = j4_column_halves();
    REQUIRE(validate(d));
    DecompStats st = stats(d);
    CHECK_FALSE(st.imbalanced);
    CHECK_FALSE(st.one_sided);
    CHECK_THROWS_WITH_AS(
        build_depth2(d, 2),
        "decomposition is neither imbalanced nor one-sided, so the depth-2 size "
        "guarantee does not apply; use build_mixed_product for such bases",
        InvalidInputError);
}

TEST_CASE("builder rejects dual pairs that do not flip the drift") {
    Decomposition d = j4_column_halves();
    d.dual_pairs = d.pairs;  // same positive drift in both lists
    REQUIRE(validate(d));
    CHECK_THROWS_WITH_AS(build_depth2(d, 2),
                         "dual pairs do not reverse the orientation of the given pairs",
                         InvalidInputError);
}

TEST_CASE("build caps stop runaway term growth") {
    Decomposition d = r3_partition_decomp();
    BuildCaps tiny_terms;
    tiny_terms.max_terms = 4;
    CHECK_THROWS_AS(build_depth2(d, 2, tiny_terms), CapExceededError);
    BuildCaps tiny_nnz;
    tiny_nnz.max_nnz = 10;
    CHECK_THROWS_AS(build_depth2(d, 2, tiny_nnz), CapExceededError);
}

TEST_CASE("mixed-product chains for several depths") {
    Circuit c22 = build_mixed_product(walsh_hadamard(1), 2, 2);
    CHECK(c22.per_layer() == std::vector<std::int64_t>{8, 8});
    CHECK(equals(matmul(c22.factors[0], c22.factors[1]), walsh_hadamard(2)));

    Circuit r12 = build_mixed_product(disjointness(1), 2, 2);
    CHECK(r12.size() == 12);
    CHECK(equals(matmul(r12.factors[0], r12.factors[1]), disjointness(2)));

    // Full-depth chain: the fast-transform layout, k layers of 2 * 2^k wires.
    for (int k = 2; k <= 5; ++k) {
        Circuit fw = build_mixed_product(walsh_hadamard(1), k, k);
        CHECK(fw.depth == k);
        CHECK(fw.size() == std::int64_t(k) * 2 * (std::int64_t(1) << k));
        SparseMatrix prod = fw.factors[0];
        for (int i = 1; i < k; ++i) prod = matmul(prod, fw.factors[std::size_t(i)]);
        CHECK(equals(prod, walsh_hadamard(k)));
    }

    CHECK_THROWS_AS(build_mixed_product(walsh_hadamard(1), 3, 2), InvalidInputError);
    CHECK_THROWS_AS(build_mixed_product(ones_col(4), 2, 2), InvalidInputError);
}

TEST_CASE("depth boosting tiles the depth-2 block") {
    Decomposition d = gen_one_hot(walsh_hadamard(1));

    Circuit b2 = boost_depth(d, 4, 2);
    Depth2Build plain = build_depth2(d, 4);
    CHECK(b2.per_layer() == plain.circuit.per_layer());
    CHECK(b2.meta["method"] == "boost");

    Circuit b4 = boost_depth(d, 4, 4);
    CHECK(b4.depth == 4);
    Circuit m4 = build_mixed_product(walsh_hadamard(1), 4, 4);
    CHECK(b4.size() == m4.size());  // H_1 blocks of two levels tie the fast transform
    SparseMatrix prod = b4.factors[0];
    for (std::size_t i = 1; i < b4.factors.size(); ++i) prod = matmul(prod, b4.factors[i]);
    CHECK(equals(prod, walsh_hadamard(4)));

    CHECK_THROWS_AS(boost_depth(d, 4, 3), InvalidInputError);
    CHECK_THROWS_AS(boost_depth(d, 0, 4), InvalidInputError);
}

TEST_CASE("depth boosting pads and rescales when the block count is fractional") {
    // 3 copies into 4 layers: two blocks of 2 with one padded level.
    Decomposition d = gen_one_hot(walsh_hadamard(1));
    Circuit c = boost_depth(d, 3, 4);
    CHECK(c.depth == 4);
    CHECK(c.meta["padding"] == 1);
    SparseMatrix prod = c.factors[0];
    for (std::size_t i = 1; i < c.factors.size(); ++i) prod = matmul(prod, c.factors[i]);
    CHECK(equals(prod, walsh_hadamard(3)));

    // Nontrivial corner: base[0,0] = 2 forces a 2^-pad rescale.
    Decomposition g;
    g.base = SparseMatrix::from_triplets(
        2, 2, kQ,
        {{0, 0, FieldElement::rational(2)},
         {0, 1, FieldElement::rational(1)},
         {1, 0, FieldElement::rational(1)},
         {1, 1, FieldElement::rational(1)}});
    g.pairs = gen_one_hot(g.base).pairs;
    Circuit gc = boost_depth(g, 1, 4);
    SparseMatrix gp = gc.factors[0];
    for (std::size_t i = 1; i < gc.factors.size(); ++i) gp = matmul(gp, gc.factors[i]);
    CHECK(equals(gp, g.base));

    // A zero corner cannot be rescaled away.
    Decomposition z = gen_one_hot(disjointness(1));
    SparseMatrix flipped = SparseMatrix::from_triplets(
        2, 2, kQ,
        {{0, 1, FieldElement::rational(1)},
         {1, 0, FieldElement::rational(1)},
         {1, 1, FieldElement::rational(1)}});
    Decomposition zb = gen_one_hot(flipped);
    CHECK_THROWS_AS(boost_depth(zb, 3, 4), InvalidInputError);
}

TEST_CASE("layer-size expectation equals the built layer sizes") {
    Decomposition r1 = r1_row_decomp();
    for (int n = 0; n <= 6; ++n) {
        auto [ea, eb] = process_expectation(r1, n);
        Depth2Build b = build_depth2(r1, n);
        CHECK(ea == Rat(b.circuit.per_layer()[0]));
        CHECK(eb == Rat(b.circuit.per_layer()[1]));
    }
    Decomposition r3 = r3_partition_decomp();
    for (int n = 1; n <= 3; ++n) {
        auto [ea, eb] = process_expectation(r3, n);
        Depth2Build b = build_depth2(r3, n);
        CHECK(ea == Rat(b.circuit.per_layer()[0]));
        CHECK(eb == Rat(b.circuit.per_layer()[1]));
    }
    CHECK_THROWS_AS(process_expectation(r3, 8), CapExceededError);
}

TEST_CASE("circuit directories round-trip") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "kroncirc_builder_test";
    fs::remove_all(dir);

    Decomposition d = r1_row_decomp();
    Depth2Build b = build_depth2(d, 3);
    std::string cdir = (dir / "c").string();
    b.circuit.save(cdir);
    Circuit back = Circuit::load(cdir);
    CHECK(back.depth == 2);
    CHECK(back.size() == b.circuit.size());
    CHECK(equals(back.factors[0], b.circuit.factors[0]));
    CHECK(equals(back.factors[1], b.circuit.factors[1]));
    CHECK(back.meta["method"] == "depth2");

    // Tampered manifests are rejected.
    fs::path mf = fs::path(cdir) / "manifest.json";
    nlohmann::json manifest;
    {
        std::ifstream is(mf);
        is >> manifest;
    }
    manifest["size"] = manifest["size"].get<std::int64_t>() + 1;
    {
        std::ofstream os(mf);
        os << manifest.dump(2);
    }
    CHECK_THROWS_AS(Circuit::load(cdir), InvalidInputError);
    fs::remove_all(dir);
}
