#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "kroncirc/decomp.hpp"
#include "kroncirc/presets.hpp"

using namespace kroncirc;
using doctest::Approx;

namespace {

const FieldSpec kQ = FieldSpec::rationals();

RectPartition r1_row_partition() {
    RectPartition p;
    p.base = disjointness(1);
    p.rects = {Rect{{0}, {0, 1}}, Rect{{1}, {0}}};
    return p;
}

// Eight-part R_3 partition with row-wise interior (three 1x3 rectangles);
// reproduces the published decomposition statistics.
RectPartition r3_rowwise_partition() {
    RectPartition p;
    p.base = disjointness(3);
    p.rects = {Rect{{0}, {1, 2, 3, 4, 5, 6, 7}}, Rect{{0, 1, 2, 3, 4, 5, 6, 7}, {0}},
               Rect{{1}, {2, 4, 6}},  Rect{{2}, {1, 4, 5}}, Rect{{4}, {1, 2, 3}},
               Rect{{3}, {4}},        Rect{{5}, {2}},       Rect{{6}, {1}}};
    return p;
}

SparseMatrix ones(std::int64_t r, std::int64_t c) {
    std::vector<SparseMatrix::Entry> es;
    for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < c; ++j)
            es.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                          FieldElement::rational(1)});
    return SparseMatrix::from_triplets(r, c, kQ, std::move(es));
}

}  // namespace

TEST_CASE("row-partition decomposition of the 2x2 disjointness base") {
    Decomposition d = from_partition(r1_row_partition());
    REQUIRE(validate(d));
    DecompStats st = stats(d);
    CHECK(st.alpha1 == Approx(std::log(1.0 + std::sqrt(2.0))).epsilon(1e-9));  // 0.8814
    CHECK(st.alpha2 == Approx(0.5 * std::log(6.0)).epsilon(1e-9));             // 0.8959
    CHECK(st.G == Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(st.E == Approx(-0.406037).epsilon(1e-4));
    CHECK(st.beta == Approx(0.097493).epsilon(1e-4));
    CHECK(st.one_sided);
    CHECK(st.imbalanced);
    CHECK_FALSE(st.oriented);
}

TEST_CASE("one-hot decomposition of the 2x2 sign base") {
    Decomposition d = gen_one_hot(walsh_hadamard(1));
    REQUIRE(validate(d));
    REQUIRE(d.pairs.size() == 2);
    DecompStats st = stats(d);
    CHECK(st.G == Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(st.E == Approx(-std::log(2.0)).epsilon(1e-9));
    CHECK(st.alpha1 == Approx(st.alpha2).epsilon(1e-12));  // ln(2*sqrt(2)) both
    CHECK(st.beta == Approx(1.0 / 6.0).epsilon(1e-9));     // -4E/(E+G) caps at 1
    CHECK(st.oriented);
    CHECK_FALSE(st.one_sided);
    CHECK(st.imbalanced);
}

TEST_CASE("eight-part disjointness partition reproduces published statistics") {
    RectPartition p = r3_rowwise_partition();
    p.validate();
    Decomposition d = from_partition(p);
    REQUIRE(validate(d));
    DecompStats st = stats(d);
    CHECK(st.alpha1 == Approx(2.616).epsilon(0.002));
    CHECK(st.beta == Approx(0.0827).epsilon(0.005));
    CHECK(st.alpha2 - st.alpha1 == Approx(0.0724).epsilon(0.01));
    CHECK(st.imbalanced);
    CHECK_FALSE(st.one_sided);
    CHECK_FALSE(st.oriented);
    CHECK(st.G == Approx(std::log(8.0)).epsilon(1e-9));
    // AM-GM: alpha1 <= ln(nnz) always, and at least ln(sqrt(nnz)).
    CHECK(std::exp(st.alpha1) >= std::sqrt(27.0));
    CHECK(std::exp(st.alpha1) <= 27.0);
}

TEST_CASE("stats orientation flips a positive drift") {
    // Column split of the all-ones 2x2: both pairs (2,1), drift positive.
    Decomposition d;
    d.base = ones(2, 2);
    d.pairs = {FactorPair{ones(2, 1), SparseMatrix::from_triplets(
                                          1, 2, kQ, {{0, 0, FieldElement::rational(1)}})},
               FactorPair{ones(2, 1), SparseMatrix::from_triplets(
                                          1, 2, kQ, {{0, 1, FieldElement::rational(1)}})}};
    REQUIRE(validate(d));
    DecompStats st = stats(d);
    CHECK(st.oriented);
    CHECK(st.E <= 0);
    CHECK_FALSE(st.one_sided);  // evaluated on the pairs as given
}

TEST_CASE("validate rejects a broken sum") {
    Decomposition d = from_partition(r1_row_partition());
    d.pairs[0].u = scale(d.pairs[0].u, FieldElement::rational(2));
    CHECK_FALSE(validate(d));
}

TEST_CASE("explicit dual pairs may differ in count from the primal pairs") {
    Decomposition d;
    d.base = ones(2, 2);
    d.pairs = {FactorPair{ones(2, 1), ones(1, 2)}};  // one rank-1 pair
    d.dual_pairs = std::vector<FactorPair>{
        FactorPair{SparseMatrix::from_triplets(2, 1, kQ, {{0, 0, FieldElement::rational(1)}}),
                   ones(1, 2)},
        FactorPair{SparseMatrix::from_triplets(2, 1, kQ, {{1, 0, FieldElement::rational(1)}}),
                   ones(1, 2)}};
    CHECK(validate(d));
    CHECK(d.effective_duals().size() == 2);
}

TEST_CASE("effective duals default to transposes only for symmetric bases") {
    Decomposition sym = from_partition(r1_row_partition());
    CHECK(sym.effective_duals().size() == sym.pairs.size());

    Decomposition asym;
    asym.base = SparseMatrix::from_triplets(2, 2, kQ,
                                            {{0, 0, FieldElement::rational(1)},
                                             {0, 1, FieldElement::rational(1)}});
    asym.pairs = {FactorPair{SparseMatrix::from_triplets(
                                 2, 1, kQ, {{0, 0, FieldElement::rational(1)}}),
                             ones(1, 2)}};
    REQUIRE(validate(asym));
    CHECK_THROWS_AS(asym.effective_duals(), InvalidInputError);
}

TEST_CASE("rigidity witnesses convert to two-pair decompositions") {
    RigidityWitness w = rank1_construct_wh(2);
    Decomposition d = from_rigidity(w);
    REQUIRE(validate(d));
    REQUIRE(d.pairs.size() == 2);  // (U,V) plus (I,S)
    CHECK(d.pairs[0].u.nnz() == w.u.nnz());
    CHECK(d.pairs[1].v.nnz() == w.changes);
    CHECK(stats(d).one_sided);
}

TEST_CASE("decomposition files round-trip") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "kroncirc_decomp_test";
    fs::create_directories(dir);
    Decomposition d = from_partition(r3_rowwise_partition());
    std::string path = (dir / "d.json").string();
    decomp_save(path, d);
    Decomposition back = decomp_load(path);
    REQUIRE(validate(back));
    CHECK(back.pairs.size() == d.pairs.size());
    DecompStats a = stats(d), b = stats(back);
    CHECK(a.alpha1 == Approx(b.alpha1).epsilon(1e-12));
    CHECK(a.beta == Approx(b.beta).epsilon(1e-12));
    fs::remove_all(dir);
}

TEST_CASE("preset grammar dispatches and reports unknown names") {
    SparseMatrix r1 = disjointness(1);
    Decomposition d = parse_decomp("partition:auto", kQ, &r1);
    CHECK(validate(d));
    CHECK(stats(d).alpha1 == Approx(std::log(1.0 + std::sqrt(2.0))).epsilon(1e-9));
    CHECK_THROWS_AS(parse_decomp("partition:auto", kQ, nullptr), InvalidInputError);
    CHECK_THROWS_AS(parse_decomp("nonsense:xyz", kQ, nullptr), InvalidInputError);
    CHECK(validate(parse_decomp("onehot:h1", kQ)));
    CHECK(validate(parse_decomp("rigidity:wh:2", kQ)));
    CHECK(validate(parse_decomp("rigidity:kron2:2:3", kQ)));
}
