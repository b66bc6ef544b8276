#include "kroncirc/decomp.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <fstream>

#include "kroncirc/presets.hpp"
#include "json_util.hpp"

namespace kroncirc {

namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;

struct RawStats {
    std::vector<std::int64_t> a, b;  // nnz(u_j), nnz(v_j) as given
    std::int64_t m = 0, q = 0;
};

RawStats raw_stats(const Decomposition& d) {
    RawStats r;
    r.m = d.base.nnz();
    r.q = d.base.rows();
    for (const auto& p : d.pairs) {
        r.a.push_back(p.u.nnz());
        r.b.push_back(p.v.nnz());
    }
    return r;
}

// Everything below 1e-9 of a verdict boundary is recomputed with Real = Quad.
template <typename Real>
struct StatValues {
    Real G, E_given, alpha1, alpha2, beta_if_oriented;
};

template <typename Real>
StatValues<Real> eval_stats(const RawStats& r) {
    using std::log;
    using std::sqrt;
    StatValues<Real> s;
    Real sum_k = 0, sum_gk = 0, max_abs_gamma = 0;
    for (std::size_t j = 0; j < r.a.size(); ++j) {
        Real a = static_cast<Real>(r.a[j]), b = static_cast<Real>(r.b[j]);
        Real k = sqrt(a * b);
        Real gamma = log(a / b);
        sum_k += k;
        sum_gk += gamma * k;
        Real abs_gamma = gamma < 0 ? Real(-gamma) : gamma;
        if (abs_gamma > max_abs_gamma) max_abs_gamma = abs_gamma;
    }
    Real mq = log(static_cast<Real>(r.m) / static_cast<Real>(r.q));
    s.G = mq > max_abs_gamma ? mq : max_abs_gamma;
    s.E_given = sum_gk / sum_k;
    s.alpha1 = log(sum_k);
    s.alpha2 = log(sqrt(static_cast<Real>(r.m) * static_cast<Real>(r.q)));
    // beta for the oriented decomposition (E <= 0).
    Real e = s.E_given < 0 ? s.E_given : Real(-s.E_given);
    if (r.m == r.q || e == 0) {
        s.beta_if_oriented = 0;
    } else if (e + s.G <= 0) {
        s.beta_if_oriented = mq / (6 * s.G);  // -4E/(E+G) -> +inf, min is 1
    } else {
        Real ratio = -4 * e / (e + s.G);
        if (ratio > 1) ratio = 1;
        s.beta_if_oriented = mq / (6 * s.G) * ratio;
    }
    return s;
}

}  // namespace

HardPair Decomposition::effective_hard() const {
    if (hard_pair) return *hard_pair;
    return {SparseMatrix::identity(base.rows(), base.field()), base};
}

std::vector<FactorPair> Decomposition::effective_duals() const {
    if (dual_pairs) return *dual_pairs;
    if (!base.is_symmetric()) {
        throw InvalidInputError("asymmetric base needs explicit dual pairs");
    }
    std::vector<FactorPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({transpose(p.v), transpose(p.u)});
    return out;
}

bool validate(const Decomposition& d) {
    const std::int64_t q = d.base.rows();
    if (d.base.cols() != q) throw DimensionError("base must be square");
    auto check_pairs = [&](const std::vector<FactorPair>& pairs) {
        if (pairs.empty()) throw InvalidInputError("decomposition has no pairs");
        SparseMatrix sum(q, q, d.base.field());
        for (const auto& p : pairs) {
            if (p.u.rows() != q || p.v.cols() != q) throw DimensionError("pair does not match base dims");
            if (p.u.cols() != p.v.rows()) throw DimensionError("pair inner dimensions differ");
            if (p.u.nnz() == 0 || p.v.nnz() == 0) throw InvalidInputError("zero factor in pair");
            sum = add(sum, matmul(p.u, p.v));
        }
        return equals(sum, d.base);
    };
    if (!check_pairs(d.pairs)) return false;
    if (d.dual_pairs && !check_pairs(*d.dual_pairs)) return false;
    if (d.hard_pair) {
        const auto& h = *d.hard_pair;
        if (h.left.rows() != q || h.right.cols() != q || h.left.cols() != h.right.rows()) {
            throw DimensionError("hard pair dims do not match base");
        }
        if (!equals(matmul(h.left, h.right), d.base)) return false;
        if (!equals(matmul(h.right, h.left), d.base)) return false;
    }
    return true;
}

DecompStats stats(const Decomposition& d) {
    RawStats r = raw_stats(d);
    if (r.m < r.q) throw InvalidInputError("stats need nnz(base) >= q");
    for (std::size_t j = 0; j < r.a.size(); ++j) {
        if (r.a[j] == 0 || r.b[j] == 0) throw InvalidInputError("zero factor in pair");
    }
    auto s = eval_stats<double>(r);

    DecompStats out;
    out.G = s.G;
    out.alpha1 = s.alpha1;
    out.alpha2 = s.alpha2;
    out.beta = s.beta_if_oriented;

    bool oriented = s.E_given > 0;
    if (std::abs(s.E_given) < 1e-9 && s.E_given != 0) {
        oriented = eval_stats<Quad>(r).E_given > 0;
    }
    out.oriented = oriented;
    out.E = oriented ? -s.E_given : s.E_given;

    out.one_sided = true;
    for (std::size_t j = 0; j < r.a.size(); ++j) {
        if (r.a[j] > r.b[j]) out.one_sided = false;
    }

    double margin = out.beta - (out.alpha2 - out.alpha1);
    if (std::abs(margin) < 1e-9) {
        auto sq = eval_stats<Quad>(r);
        out.imbalanced = sq.beta_if_oriented > sq.alpha2 - sq.alpha1;
    } else {
        out.imbalanced = margin > 0;
    }
    if (r.m == r.q) out.imbalanced = false;
    return out;
}

Decomposition gen_one_hot(const SparseMatrix& m) {
    const std::int64_t q = m.rows();
    if (m.cols() != q) throw DimensionError("one-hot needs a square matrix");
    Decomposition d;
    d.base = m;
    std::vector<std::vector<SparseMatrix::Entry>> columns(static_cast<std::size_t>(q));
    for (const auto& e : m.entries()) columns[e.col].push_back({e.row, 0, e.v});
    const FieldElement one = FieldElement::one(m.field());
    for (std::int64_t j = 0; j < q; ++j) {
        if (columns[j].empty()) continue;  // zero column: pair dropped
        FactorPair p;
        p.u = SparseMatrix::from_triplets(q, 1, m.field(), std::move(columns[j]));
        p.v = SparseMatrix::from_triplets(1, q, m.field(), {{0, static_cast<std::uint32_t>(j), one}});
        d.pairs.push_back(std::move(p));
    }
    return d;
}

Decomposition from_rigidity(const RigidityWitness& w) {
    Decomposition d;
    d.base = w.target;
    if (w.s.nnz() == 0) {
        d.pairs.push_back({w.u, w.v});
        return d;
    }
    SparseMatrix eye = SparseMatrix::identity(w.target.rows(), w.target.field());
    d.pairs.push_back({w.u, w.v});
    d.pairs.push_back({eye, w.s});
    d.dual_pairs = std::vector<FactorPair>{{w.u, w.v}, {w.s, eye}};
    d.hard_pair = HardPair{eye, w.target};
    return d;
}

Decomposition from_partition(const RectPartition& p) {
    p.validate();
    Decomposition d;
    d.base = p.base;
    const std::int64_t q = p.base.rows();
    const FieldElement one = FieldElement::one(p.base.field());
    for (const auto& rect : p.rects) {
        std::vector<SparseMatrix::Entry> ue, ve;
        for (std::uint32_t r : rect.rows) ue.push_back({r, 0, one});
        for (std::uint32_t c : rect.cols) ve.push_back({0, c, one});
        FactorPair fp;
        fp.u = SparseMatrix::from_triplets(q, 1, p.base.field(), std::move(ue));
        fp.v = SparseMatrix::from_triplets(1, p.base.cols(), p.base.field(), std::move(ve));
        d.pairs.push_back(std::move(fp));
    }
    return d;
}

namespace {

nlohmann::json pairs_to_json(const std::vector<FactorPair>& pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pairs) {
        arr.push_back({{"U", matrix_to_json_inline(p.u)}, {"V", matrix_to_json_inline(p.v)}});
    }
    return arr;
}

std::vector<FactorPair> pairs_from_json(const nlohmann::json& arr, const FieldSpec& field) {
    std::vector<FactorPair> out;
    for (const auto& p : arr) {
        out.push_back({matrix_from_json_inline(p.at("U"), field),
                       matrix_from_json_inline(p.at("V"), field)});
    }
    return out;
}

}  // namespace

void decomp_save(const std::string& path, const Decomposition& d) {
    nlohmann::json j;
    j["field"] = field_to_json(d.base.field());
    j["q"] = d.base.rows();
    j["base"] = matrix_to_json_inline(d.base);
    j["pairs"] = pairs_to_json(d.pairs);
    if (d.dual_pairs) j["dual_pairs"] = pairs_to_json(*d.dual_pairs);
    if (d.hard_pair) {
        j["hard_pair"] = {{"left", matrix_to_json_inline(d.hard_pair->left)},
                          {"right", matrix_to_json_inline(d.hard_pair->right)}};
    }
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

Decomposition decomp_load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    FieldSpec field = field_from_json(j.at("field"));
    Decomposition d;
    d.base = matrix_from_json_inline(j.at("base"), field);
    if (j.contains("q") && j.at("q").get<std::int64_t>() != d.base.rows()) {
        throw InvalidInputError("q disagrees with base dimension");
    }
    d.pairs = pairs_from_json(j.at("pairs"), field);
    if (j.contains("dual_pairs")) d.dual_pairs = pairs_from_json(j.at("dual_pairs"), field);
    if (j.contains("hard_pair")) {
        d.hard_pair = HardPair{matrix_from_json_inline(j.at("hard_pair").at("left"), field),
                               matrix_from_json_inline(j.at("hard_pair").at("right"), field)};
    }
    if (!validate(d)) throw InvalidInputError("loaded decomposition does not sum to its base");
    return d;
}

Decomposition parse_decomp(const std::string& name, const FieldSpec& field,
                           const SparseMatrix* base_hint) {
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            std::size_t next = s.find(':', pos);
            if (next == std::string::npos) {
                parts.push_back(s.substr(pos));
                break;
            }
            parts.push_back(s.substr(pos, next - pos));
            pos = next + 1;
        }
        return parts;
    };
    if (name.rfind("file:", 0) == 0) {
        // Both decomposition and rectangle-partition files are accepted; the
        // two schemas are disjoint ("pairs" vs "rects").
        std::string path = name.substr(5);
        std::ifstream is(path);
        if (!is) throw Error("cannot open: " + path);
        nlohmann::json j = nlohmann::json::parse(is);
        if (j.contains("rects")) return from_partition(partition_load(path));
        return decomp_load(path);
    }
    auto parts = split(name);
    if (parts[0] == "onehot" && parts.size() == 2) {
        return gen_one_hot(parse_base(parts[1], field).matrix);
    }
    if (parts[0] == "rigidity" && parts.size() == 3 && parts[1] == "wh") {
        return from_rigidity(rank1_construct_wh(std::stoi(parts[2]), field));
    }
    if (parts[0] == "rigidity" && parts.size() == 4 && parts[1] == "kron2") {
        FieldElement omega = FieldElement::parse(field, parts[2]);
        return from_rigidity(rank1_construct_kron2(omega, std::stoi(parts[3])));
    }
    if (parts[0] == "partition" && parts.size() == 2 && parts[1] == "auto") {
        if (!base_hint) throw InvalidInputError("partition:auto needs a base matrix");
        return from_partition(partition_search(*base_hint).partition);
    }
    throw InvalidInputError("unknown decomposition preset: " + name);
}

}  // namespace kroncirc
