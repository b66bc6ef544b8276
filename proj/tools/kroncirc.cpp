// kroncirc: build, verify and measure sparse factorizations of Kronecker
// power matrices.  Exit codes: 0 success, 1 verification failure, 2 invalid
// input, 3 resource cap exceeded.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json_util.hpp"
#include "kroncirc/builder.hpp"
#include "kroncirc/decomp.hpp"
#include "kroncirc/partition.hpp"
#include "kroncirc/presets.hpp"
#include "kroncirc/rigidity.hpp"
#include "kroncirc/verify.hpp"

namespace kc = kroncirc;

namespace {

std::string fmt4(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

// Number of base copies the decomposition's own base covers: d.base must be
// base^(x)t for some t >= 1 dividing n; returns n/t.
int units_over(const kc::BaseSpec& base, const kc::Decomposition& d, int n) {
    std::int64_t qb = base.matrix.rows();
    std::int64_t qd = d.base.rows();
    if (qb < 1) throw kc::InvalidInputError("empty base");
    int t = 0;
    std::int64_t acc = 1;
    while (acc < qd && t < 64) {
        acc *= qb;
        ++t;
    }
    if (acc != qd || t == 0 || d.base.cols() != kc::kron_power(base.matrix, t).cols() ||
        !kc::equals(d.base, kc::kron_power(base.matrix, t)))
        throw kc::InvalidInputError(
            "decomposition base is not a Kronecker power of the requested base");
    if (n % t != 0)
        throw kc::InvalidInputError("n must be a multiple of " + std::to_string(t) +
                                    ", the power the decomposition base covers");
    return n / t;
}

void emit(bool json, const nlohmann::json& j, const std::string& text) {
    if (json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << text;
}

std::string stats_text(const kc::DecompStats& st) {
    std::ostringstream os;
    os << "G = " << fmt4(st.G) << "  E = " << fmt4(st.E) << "  alpha1 = " << fmt4(st.alpha1)
       << "  alpha2 = " << fmt4(st.alpha2) << "  beta = " << fmt4(st.beta) << "\n"
       << "oriented = " << (st.oriented ? "true" : "false")
       << "  one_sided = " << (st.one_sided ? "true" : "false")
       << "  imbalanced = " << (st.imbalanced ? "true" : "false") << "\n";
    return os.str();
}

nlohmann::json stats_json(const kc::DecompStats& st) {
    return {{"G", st.G},
            {"E", st.E},
            {"alpha1", st.alpha1},
            {"alpha2", st.alpha2},
            {"beta", st.beta},
            {"oriented", st.oriented},
            {"one_sided", st.one_sided},
            {"imbalanced", st.imbalanced}};
}

nlohmann::json size_json(const kc::SizeReport& sr) { return sr.to_json(); }

std::string size_text(const kc::SizeReport& sr) {
    std::ostringstream os;
    os << "depth     = " << sr.depth << "\nper_layer =";
    for (auto v : sr.per_layer) os << " " << v;
    os << "\nsize      = " << sr.total << "\n";
    if (sr.exponent_raw)
        os << "exponent_raw       = " << fmt4(*sr.exponent_raw)
           << "   (ln size / (n ln q))\n";
    if (sr.exponent_adjusted)
        os << "exponent_adjusted  = " << fmt4(*sr.exponent_adjusted)
           << "   (slack 2 e^{2G} (n+1) removed)\n";
    if (sr.exponent_per_layer)
        os << "exponent_per_layer = " << fmt4(*sr.exponent_per_layer)
           << "   (ln(size/depth) / (n ln q))\n";
    if (sr.mixed_product_size)
        os << "mixed_product_size = " << sr.mixed_product_size->str()
           << "   (same-target depth-2 baseline)\n";
    return os.str();
}

struct BuildOpts {
    std::string base, decomp, method = "imbalanced", field = "Q", out;
    int n = 0, depth = 2;
    std::int64_t max_terms = std::int64_t(1) << 22;
    std::int64_t max_nnz = std::int64_t(1) << 28;
    bool json = false;
};

int cmd_build(const BuildOpts& o) {
    kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
    kc::BaseSpec base = kc::parse_base(o.base, field);
    kc::BuildCaps caps{o.max_terms, o.max_nnz};
    kc::Circuit c;
    if (o.method == "mixed-product") {
        c = kc::build_mixed_product(base.matrix, o.n, o.depth);
    } else {
        if (o.decomp.empty())
            throw kc::InvalidInputError("--decomp is required for method " + o.method);
        kc::Decomposition d = kc::parse_decomp(o.decomp, field, &base.matrix);
        int nu = units_over(base, d, o.n);
        kc::DecompStats st = kc::stats(d);
        if (o.method == "imbalanced" && !st.imbalanced)
            throw kc::InvalidInputError(
                "decomposition is not imbalanced (beta <= alpha2 - alpha1); try --method "
                "one-sided or mixed-product");
        if (o.method == "one-sided" && !st.one_sided)
            throw kc::InvalidInputError(
                "decomposition is not one-sided (some pair has nnz(U) > nnz(V))");
        if (o.method == "boost")
            c = kc::boost_depth(d, nu, o.depth, caps);
        else if (o.method == "imbalanced" || o.method == "one-sided")
            c = kc::build_depth2(d, nu, caps).circuit;
        else
            throw kc::InvalidInputError("unknown method: " + o.method);
        c.meta["decomp"] = o.decomp;
    }
    c.meta["cli_method"] = o.method;
    c.meta["base_preset"] = base.name;
    c.meta["n_requested"] = o.n;

    kc::SizeReport sr = kc::size_report(c);
    std::ostringstream text;
    text << "method    = " << o.method << "\ntarget    = " << o.base << " ^(x)" << o.n << "\n"
         << size_text(sr);
    nlohmann::json j{{"method", o.method},
                     {"base", o.base},
                     {"n", o.n},
                     {"report", size_json(sr)}};
    if (!o.out.empty()) {
        c.save(o.out);
        text << "saved -> " << o.out << "\n";
        j["out"] = o.out;
    }
    emit(o.json, j, text.str());
    return 0;
}

struct StatsOpts {
    std::string decomp, base, field = "Q";
    bool json = false;
};

int cmd_stats(const StatsOpts& o) {
    kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
    std::optional<kc::BaseSpec> base;
    if (!o.base.empty()) base = kc::parse_base(o.base, field);
    kc::Decomposition d =
        kc::parse_decomp(o.decomp, field, base ? &base->matrix : nullptr);
    kc::DecompStats st = kc::stats(d);
    std::ostringstream text;
    text << "decomp = " << o.decomp << "  pairs = " << d.pairs.size() << "  base nnz = "
         << d.base.nnz() << "  dim = " << d.base.rows() << "\n"
         << stats_text(st);
    text << "buildable via: "
         << (st.imbalanced && st.one_sided ? "imbalanced, one-sided"
             : st.imbalanced              ? "imbalanced"
             : st.one_sided               ? "one-sided"
                                          : "mixed-product only")
         << "\n";
    nlohmann::json j = stats_json(st);
    j["decomp"] = o.decomp;
    j["pairs"] = d.pairs.size();
    emit(o.json, j, text.str());
    return 0;
}

struct VerifyOpts {
    std::string circuit, mode = "random", base, field = "Q";
    int n = -1, trials = 20;
    std::uint64_t seed = 1;
    bool json = false;
};

int cmd_verify(const VerifyOpts& o) {
    kc::Circuit c = kc::Circuit::load(o.circuit);
    kc::SparseMatrix target_base;
    int n = 0;
    if (!o.base.empty()) {
        if (o.n < 0) throw kc::InvalidInputError("--base override also needs --n");
        kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
        target_base = kc::parse_base(o.base, field).matrix;
        n = o.n;
    } else if (c.meta.contains("base") && c.meta.contains("n")) {
        if (c.meta["base"].is_string()) {
            kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
            target_base = kc::parse_base(c.meta["base"].get<std::string>(), field).matrix;
        } else {
            target_base = kc::matrix_from_json(c.meta["base"]);
        }
        n = c.meta["n"].get<int>();
    } else {
        throw kc::InvalidInputError(
            "circuit manifest lacks target parameters; pass --base and --n");
    }
    kc::VerifyReport rep = o.mode == "exact"
                               ? kc::verify_exact(c, target_base, n)
                               : kc::verify_random(c, target_base, n, o.trials, o.seed);
    std::ostringstream text;
    text << "mode   = " << rep.mode << "\ntarget = " << rep.target << "\npass   = "
         << (rep.pass ? "yes" : "NO") << "\n";
    if (rep.mode == "random")
        text << "trials = " << rep.trials << "  seed = " << rep.seed << "\n";
    if (rep.details.contains("prime"))
        text << "prime  = " << rep.details["prime"].get<std::uint64_t>() << "\n";
    if (rep.details.contains("warning"))
        text << "warning: " << rep.details["warning"].get<std::string>() << "\n";
    if (rep.details.contains("mismatch")) text << "mismatch: " << rep.details["mismatch"].dump()
                                               << "\n";
    emit(o.json, rep.to_json(), text.str());
    return rep.pass ? 0 : 1;
}

struct RigConstructOpts {
    std::string family, omega = "2", field = "Q", out;
    int k = 1;
    bool json = false;
};

int cmd_rig_construct(const RigConstructOpts& o) {
    kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
    kc::RigidityWitness w;
    kc::PairMode mode;
    if (o.family == "wh") {
        w = kc::rank1_construct_wh(o.k, field);
        mode = kc::PairMode::wh;
    } else if (o.family == "kron2") {
        w = kc::rank1_construct_kron2(kc::FieldElement::parse(field, o.omega), o.k);
        mode = kc::PairMode::generic;
    } else {
        throw kc::InvalidInputError("--family must be wh or kron2");
    }
    kc::BigInt closed = kc::rank1_changes_closed_form(o.k, mode);
    std::ostringstream text;
    text << "family = " << o.family << "  k = " << o.k << "  target = " << w.target_name
         << "  N = " << w.target.rows() << "\n"
         << "rank_bound = " << w.rank_bound << "\nchanges    = " << w.changes << "\n"
         << "closed form changes = " << closed.str()
         << (kc::BigInt(w.changes) == closed ? "  [match]" : "  [MISMATCH]") << "\n";
    nlohmann::json j{{"family", o.family},  {"k", o.k},
                     {"target", w.target_name}, {"rank_bound", w.rank_bound},
                     {"changes", w.changes},    {"closed_form_changes", closed.str()}};
    if (!o.out.empty()) {
        kc::witness_save(o.out, w);
        text << "saved -> " << o.out << "\n";
        j["out"] = o.out;
    }
    emit(o.json, j, text.str());
    return 0;
}

struct RigOracleOpts {
    std::string base, pool = "1,-1", field = "Q", out;
    bool json = false;
};

int cmd_rig_oracle(const RigOracleOpts& o) {
    kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
    kc::BaseSpec base = kc::parse_base(o.base, field);
    std::vector<kc::FieldElement> pool;
    std::stringstream ss(o.pool);
    for (std::string item; std::getline(ss, item, ',');)
        pool.push_back(kc::FieldElement::parse(field, item));

    std::string cache_key = field.label() + "|" + o.base + "|" + o.pool;
    std::string cache_file;
    if (const char* dir = std::getenv("KRONCIRC_CACHE"); dir && *dir && o.out.empty()) {
        std::filesystem::create_directories(dir);
        cache_file = (std::filesystem::path(dir) /
                      ("oracle-" + std::to_string(std::hash<std::string>{}(cache_key)) + ".json"))
                         .string();
        if (std::ifstream is(cache_file); is) {
            nlohmann::json cached = nlohmann::json::parse(is);
            if (cached.value("key", "") == cache_key) {
                std::ostringstream text;
                text << "base = " << o.base << "  pool = {" << o.pool << "}\n"
                     << "minimum changes = " << cached["changes"].get<std::int64_t>()
                     << "   (cached)\n";
                nlohmann::json j{{"base", o.base},
                                 {"pool", o.pool},
                                 {"changes", cached["changes"]},
                                 {"cached", true}};
                emit(o.json, j, text.str());
                return 0;
            }
        }
    }

    kc::Rank1Minimum r = kc::rank1_oracle(base.matrix, pool);
    if (!cache_file.empty()) {
        std::ofstream os(cache_file);
        os << nlohmann::json{{"key", cache_key}, {"changes", r.changes}}.dump() << "\n";
    }
    std::ostringstream text;
    text << "base = " << o.base << "  pool = {" << o.pool << "}\n"
         << "minimum changes = " << r.changes << "\n";
    nlohmann::json j{{"base", o.base}, {"pool", o.pool}, {"changes", r.changes}};
    if (!o.out.empty()) {
        kc::witness_save(o.out, r.witness);
        text << "saved -> " << o.out << "\n";
        j["out"] = o.out;
    }
    emit(o.json, j, text.str());
    return 0;
}

struct RigPolyOpts {
    std::string base = "h1", field = "Q", out;
    int n = 4, l = 1, h = 3;
    bool json = false;
};

int cmd_rig_poly(const RigPolyOpts& o) {
    kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
    kc::BaseSpec base = kc::parse_base(o.base, field);
    kc::PolyDecomp pd = kc::polymethod_decomp(base.matrix, o.n, o.l, o.h);
    std::ostringstream text;
    text << "base = " << o.base << "  n = " << o.n << "  window = [" << o.l << ", " << o.h
         << "]\n"
         << "monomials (rank bound) = " << pd.rank_bound << "\n"
         << "changes = nnz(S)       = " << pd.changes << "\n"
         << "good pairs  = " << pd.good_pairs.str() << "\nbad pairs   = " << pd.bad_pairs.str()
         << "\nunion bound = " << pd.union_bound.str() << "\n";
    nlohmann::json j{{"base", o.base},
                     {"n", o.n},
                     {"l", o.l},
                     {"h", o.h},
                     {"rank_bound", pd.rank_bound},
                     {"changes", pd.changes},
                     {"good_pairs", pd.good_pairs.str()},
                     {"bad_pairs", pd.bad_pairs.str()},
                     {"union_bound", pd.union_bound.str()}};
    if (!o.out.empty()) {
        kc::RigidityWitness w;
        w.target = kc::kron_power(base.matrix, o.n);
        w.target_name = base.name + "^" + std::to_string(o.n);
        w.u = pd.u;
        w.v = pd.v;
        w.s = pd.s;
        w.rank_bound = pd.rank_bound;
        w.changes = pd.changes;
        kc::witness_save(o.out, w);
        text << "saved -> " << o.out << "\n";
        j["out"] = o.out;
    }
    emit(o.json, j, text.str());
    return 0;
}

struct RigReportOpts {
    int max_n = 8;
    bool json = false;
};

int cmd_rig_report(const RigReportOpts& o) {
    std::ostringstream text;
    nlohmann::json rows = nlohmann::json::array();
    text << "  n |        generic good     changes |             wh good     changes |  prior c\n";
    auto ct = kc::prior_c_table(o.max_n);
    for (int n = 1; n <= o.max_n; ++n) {
        kc::BigInt gg = kc::good_pair_count(n, kc::PairMode::generic);
        kc::BigInt gc = kc::rank1_changes_closed_form(n, kc::PairMode::generic);
        kc::BigInt wg = kc::good_pair_count(n, kc::PairMode::wh);
        kc::BigInt wc = kc::rank1_changes_closed_form(n, kc::PairMode::wh);
        double c = ct[std::size_t(n - 1)].second;
        char line[160];
        std::snprintf(line, sizeof line, "%3d | %19s %11s | %19s %11s | %8.4f\n", n,
                      gg.str().c_str(), gc.str().c_str(), wg.str().c_str(), wc.str().c_str(), c);
        text << line;
        rows.push_back({{"n", n},
                        {"generic_good", gg.str()},
                        {"generic_changes", gc.str()},
                        {"wh_good", wg.str()},
                        {"wh_changes", wc.str()},
                        {"prior_c", c}});
    }
    text << "note: H_5 exhaustive optimum is " << kc::kH5Rank1Exact
         << " changes; the closed-form construction gives 448\n";
    text << "exponents: kron2 c(6) = " << fmt4(kc::exponent_kron2(6))
         << ", wh c(6) = " << fmt4(kc::exponent_wh(6)) << ", js = " << fmt4(kc::exponent_js())
         << "\n";
    emit(o.json, rows, text.str());
    return 0;
}

struct PartSearchOpts {
    std::string base, field = "Q", out;
    int max_parts = 0;
    std::uint64_t node_cap = 200000000ull;
    bool json = false;
};

int cmd_part_search(const PartSearchOpts& o) {
    kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
    kc::BaseSpec base = kc::parse_base(o.base, field);
    kc::PartitionSearchResult r = kc::partition_search(base.matrix, o.max_parts, o.node_cap);
    std::ostringstream text;
    text << "base      = " << o.base << "  (" << base.matrix.rows() << "x" << base.matrix.cols()
         << ", nnz " << base.matrix.nnz() << ")\n"
         << "objective = " << fmt4(r.objective) << "  exponent = "
         << fmt4(r.partition.exponent()) << "\n"
         << "parts     = " << r.partition.rects.size() << "  optimal = "
         << (r.optimal ? "yes" : "no") << "  nodes = " << r.nodes << "\n";
    nlohmann::json jr = nlohmann::json::array();
    for (std::size_t i = 0; i < r.partition.rects.size(); ++i) {
        const auto& rect = r.partition.rects[i];
        text << "  rect " << i << ": rows {";
        for (std::size_t k = 0; k < rect.rows.size(); ++k)
            text << (k ? "," : "") << rect.rows[k];
        text << "} cols {";
        for (std::size_t k = 0; k < rect.cols.size(); ++k)
            text << (k ? "," : "") << rect.cols[k];
        text << "}\n";
        jr.push_back({{"rows", rect.rows}, {"cols", rect.cols}});
    }
    nlohmann::json j{{"base", o.base},
                     {"objective", r.objective},
                     {"exponent", r.partition.exponent()},
                     {"optimal", r.optimal},
                     {"nodes", r.nodes},
                     {"rects", jr}};
    if (!o.out.empty()) {
        kc::partition_save(o.out, r.partition);
        text << "saved -> " << o.out << "\n";
        j["out"] = o.out;
    }
    emit(o.json, j, text.str());
    return 0;
}

struct PartJsOpts {
    int levels = 20;
    bool json = false;
};

int cmd_part_js(const PartJsOpts& o) {
    auto levels = kc::js_recurrence(o.levels);
    std::ostringstream text;
    text << "level |            s            r |   size_bound        wires | log2 growth\n";
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& l = levels[i];
        double growth =
            i == 0 ? 0.0
                   : std::log2(double(l.size_bound) / double(levels[i - 1].size_bound));
        char line[160];
        std::snprintf(line, sizeof line, "%5d | %12lld %12lld | %12lld %12lld | %10.4f\n",
                      l.level, (long long)l.s, (long long)l.r, (long long)l.size_bound,
                      (long long)l.wires, growth);
        text << line;
        rows.push_back({{"level", l.level},
                        {"s", l.s},
                        {"r", l.r},
                        {"size_bound", l.size_bound},
                        {"wires", l.wires}});
    }
    text << "js exponent = " << fmt4(kc::exponent_js()) << "  (log2(1+sqrt 2))\n";
    emit(o.json, rows, text.str());
    return 0;
}

struct ExponentOpts {
    std::string family;
    int k = 6, max_n = 8;
    double q = 4, s = 0.4;
    bool json = false;
};

int cmd_exponent(const ExponentOpts& o) {
    std::ostringstream text;
    nlohmann::json j{{"family", o.family}};
    if (o.family == "kron2" || o.family == "wh") {
        double e = o.family == "wh" ? kc::exponent_wh(o.k) : kc::exponent_kron2(o.k);
        text << "family = " << o.family << "  k = " << o.k << "\nexponent = " << fmt4(e) << "\n";
        j["k"] = o.k;
        j["exponent"] = e;
    } else if (o.family == "js") {
        text << "family = js\nexponent = " << fmt4(kc::exponent_js()) << "\n";
        j["exponent"] = kc::exponent_js();
    } else if (o.family == "prior") {
        // Change counts: exact for k <= 4, the 432*4^(k-5) lower bound beyond.
        double rig = o.k <= 4 ? double(kc::rank1_changes_closed_form(o.k, kc::PairMode::wh)
                                           .convert_to<double>())
                              : 432.0 * std::pow(4.0, o.k - 5);
        kc::PriorExponent pe = kc::exponent_prior(1.0, rig, std::pow(2.0, o.k));
        text << "family = prior  k = " << o.k << "  R = " << rig << "\nc = " << fmt4(pe.c)
             << "\nexponent = " << fmt4(pe.exponent) << "\n";
        j["k"] = o.k;
        j["c"] = pe.c;
        j["exponent"] = pe.exponent;
    } else if (o.family == "prior-min") {
        auto ct = kc::prior_c_table(o.max_n);
        double mn = 1e300;
        int arg = 0;
        for (auto& [n, c] : ct)
            if (c < mn) mn = c, arg = n;
        text << "family = prior-min  over n <= " << o.max_n << "\nmin c = " << fmt4(mn)
             << "  at n = " << arg << "\n";
        j["max_n"] = o.max_n;
        j["min_c"] = mn;
        j["argmin"] = arg;
    } else if (o.family == "general-q") {
        kc::GeneralQExponent g = kc::exponent_general_q(o.q, o.s);
        text << "family = general-q  q = " << o.q << "  s = " << o.s << "\nh = " << g.h
             << "\na = " << fmt4(g.a) << "\nb = " << fmt4(g.b) << "\n";
        j["q"] = o.q;
        j["s"] = o.s;
        j["h"] = g.h;
        j["a"] = g.a;
        j["b"] = g.b;
    } else {
        throw kc::InvalidInputError(
            "--family must be one of kron2, wh, js, prior, prior-min, general-q");
    }
    emit(o.json, j, text.str());
    return 0;
}

struct ExpectOpts {
    std::string decomp, base, field = "Q";
    int n = 1;
    bool json = false;
};

int cmd_expect(const ExpectOpts& o) {
    kc::FieldSpec field = kc::FieldSpec::parse_label(o.field);
    std::optional<kc::BaseSpec> base;
    if (!o.base.empty()) base = kc::parse_base(o.base, field);
    kc::Decomposition d = kc::parse_decomp(o.decomp, field, base ? &base->matrix : nullptr);
    int nu = base ? units_over(*base, d, o.n) : o.n;
    auto [ea, eb] = kc::process_expectation(d, nu);
    std::ostringstream text;
    text << "decomp = " << o.decomp << "  n = " << o.n << "\n"
         << "E[exp(S_n)] first layer  = " << ea.str() << "\n"
         << "E[exp(S_n)] second layer = " << eb.str() << "\n";
    nlohmann::json j{
        {"decomp", o.decomp}, {"n", o.n}, {"first_layer", ea.str()}, {"second_layer", eb.str()}};
    emit(o.json, j, text.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kroncirc: sparse synchronous circuits for Kronecker power matrices"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "worker hint (results are thread-count independent)");

    int rc = 0;

    BuildOpts bo;
    auto* build = app.add_subcommand("build", "build a factor-chain circuit for base^(x)n");
    build->add_option("--base", bo.base, "target base preset (h<k>|r<k>|i<k>|omega:<w>|file:<p>)")
        ->required();
    build->add_option("--decomp", bo.decomp,
                      "decomposition preset (onehot:<base>|rigidity:wh:<k>|"
                      "rigidity:kron2:<w>:<k>|partition:auto|file:<p>)");
    build->add_option("--n", bo.n, "Kronecker power of the base")->required();
    build->add_option("--method", bo.method, "imbalanced|one-sided|mixed-product|boost");
    build->add_option("--depth", bo.depth, "factor count for mixed-product/boost");
    build->add_option("--field", bo.field, "Q or GF<p>");
    build->add_option("--out", bo.out, "output circuit directory");
    build->add_option("--max-terms", bo.max_terms, "term cap");
    build->add_option("--max-nnz", bo.max_nnz, "total nnz cap");
    build->add_flag("--json", bo.json, "machine-readable report");
    build->callback([&] { rc = cmd_build(bo); });

    StatsOpts so;
    auto* stats = app.add_subcommand("stats", "imbalance statistics of a decomposition");
    stats->add_option("--decomp", so.decomp, "decomposition preset")->required();
    stats->add_option("--base", so.base, "base hint (needed by partition:auto)");
    stats->add_option("--field", so.field, "Q or GF<p>");
    stats->add_flag("--json", so.json, "machine-readable report");
    stats->callback([&] { rc = cmd_stats(so); });

    VerifyOpts vo;
    auto* verify = app.add_subcommand("verify", "check a circuit against its target");
    verify->add_option("--circuit", vo.circuit, "circuit directory")->required();
    verify->add_option("--mode", vo.mode, "exact|random (default random)");
    verify->add_option("--trials", vo.trials, "random-mode trial count");
    verify->add_option("--seed", vo.seed, "master seed");
    verify->add_option("--base", vo.base, "target base override");
    verify->add_option("--n", vo.n, "target power override");
    verify->add_option("--field", vo.field, "Q or GF<p>");
    verify->add_flag("--json", vo.json, "machine-readable report");
    verify->callback([&] { rc = cmd_verify(vo); });

    auto* rig = app.add_subcommand("rigidity", "rank-1 witnesses, oracle, polynomial method");
    rig->require_subcommand(1);

    RigConstructOpts rco;
    auto* rigc = rig->add_subcommand("construct", "closed-form rank-1 witness");
    rigc->add_option("--family", rco.family, "wh|kron2")->required();
    rigc->add_option("--k", rco.k, "Kronecker power")->required();
    rigc->add_option("--omega", rco.omega, "corner entry for kron2");
    rigc->add_option("--field", rco.field, "Q or GF<p>");
    rigc->add_option("--out", rco.out, "witness JSON path");
    rigc->add_flag("--json", rco.json, "machine-readable report");
    rigc->callback([&] { rc = cmd_rig_construct(rco); });

    RigOracleOpts roo;
    auto* rigo = rig->add_subcommand("oracle", "exact minimum changes over a u-entry pool");
    rigo->add_option("--base", roo.base, "target base preset")->required();
    rigo->add_option("--pool", roo.pool, "comma-separated u-entry pool (default 1,-1)");
    rigo->add_option("--field", roo.field, "Q or GF<p>");
    rigo->add_option("--out", roo.out, "witness JSON path");
    rigo->add_flag("--json", roo.json, "machine-readable report");
    rigo->callback([&] { rc = cmd_rig_oracle(roo); });

    RigPolyOpts rpo;
    auto* rigp = rig->add_subcommand("poly", "polynomial-method decomposition");
    rigp->add_option("--base", rpo.base, "base preset (default h1)");
    rigp->add_option("--n", rpo.n, "Kronecker power")->required();
    rigp->add_option("--lo", rpo.l, "window lower end")->required();
    rigp->add_option("--hi", rpo.h, "window upper end")->required();
    rigp->add_option("--field", rpo.field, "Q or GF<p>");
    rigp->add_option("--out", rpo.out, "witness JSON path");
    rigp->add_flag("--json", rpo.json, "machine-readable report");
    rigp->callback([&] { rc = cmd_rig_poly(rpo); });

    RigReportOpts rro;
    auto* rigr = rig->add_subcommand("report", "good-pair/change-count table");
    rigr->add_option("--max-n", rro.max_n, "table rows (default 8)");
    rigr->add_flag("--json", rro.json, "machine-readable report");
    rigr->callback([&] { rc = cmd_rig_report(rro); });

    auto* part = app.add_subcommand("partition", "rectangle partitions");
    part->require_subcommand(1);

    PartSearchOpts pso;
    auto* parts = part->add_subcommand("search", "minimum-objective rectangle partition");
    parts->add_option("--base", pso.base, "target base preset")->required();
    parts->add_option("--max-parts", pso.max_parts, "0 = unconstrained");
    parts->add_option("--node-cap", pso.node_cap, "search node cap");
    parts->add_option("--field", pso.field, "Q or GF<p>");
    parts->add_option("--out", pso.out, "partition JSON path");
    parts->add_flag("--json", pso.json, "machine-readable report");
    parts->callback([&] { rc = cmd_part_search(pso); });

    PartJsOpts pjo;
    auto* partj = part->add_subcommand("js", "set-disjointness doubling recurrence");
    partj->add_option("--levels", pjo.levels, "levels to print (default 20)");
    partj->add_flag("--json", pjo.json, "machine-readable report");
    partj->callback([&] { rc = cmd_part_js(pjo); });

    ExponentOpts eo;
    auto* expo = app.add_subcommand("exponent", "circuit-size exponents");
    expo->add_option("--family", eo.family, "kron2|wh|js|prior|prior-min|general-q")->required();
    expo->add_option("--k", eo.k, "Kronecker power (kron2/wh/prior)");
    expo->add_option("--max-n", eo.max_n, "range for prior-min");
    expo->add_option("--q", eo.q, "alphabet size for general-q");
    expo->add_option("--s", eo.s, "window parameter for general-q");
    expo->add_flag("--json", eo.json, "machine-readable report");
    expo->callback([&] { rc = cmd_exponent(eo); });

    ExpectOpts xo;
    auto* expect = app.add_subcommand("expect", "exact expected layer sizes of the size process");
    expect->add_option("--decomp", xo.decomp, "decomposition preset")->required();
    expect->add_option("--base", xo.base, "base hint / unit for --n");
    expect->add_option("--n", xo.n, "Kronecker power")->required();
    expect->add_option("--field", xo.field, "Q or GF<p>");
    expect->add_flag("--json", xo.json, "machine-readable report");
    expect->callback([&] { rc = cmd_expect(xo); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const kc::CapExceededError& e) {
        std::cerr << "error (cap exceeded): " << e.what() << "\n";
        return 3;
    } catch (const kc::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
