#include "kroncirc/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include "kroncirc/presets.hpp"
#include "json_util.hpp"

namespace kroncirc {

void RectPartition::validate() const {
    const std::int64_t rows = base.rows(), cols = base.cols();
    std::vector<char> covered(static_cast<std::size_t>(rows * cols), 0);
    std::int64_t total = 0;
    for (const auto& p : rects) {
        if (p.rows.empty() || p.cols.empty()) throw InvalidInputError("empty rectangle in partition");
        for (std::uint32_t r : p.rows) {
            if (r >= rows) throw InvalidInputError("rectangle row out of range");
            for (std::uint32_t c : p.cols) {
                if (c >= cols) throw InvalidInputError("rectangle column out of range");
                if (!base.get(r, c).is_one()) throw InvalidInputError("rectangle covers a cell that is not one");
                std::size_t bit = static_cast<std::size_t>(r) * cols + c;
                if (covered[bit]) throw InvalidInputError("rectangles overlap");
                covered[bit] = 1;
                ++total;
            }
        }
    }
    if (total != base.nnz()) throw InvalidInputError("partition does not cover the whole support");
}

double RectPartition::objective() const {
    double total = 0.0;
    for (const auto& p : rects) total += std::sqrt(static_cast<double>(p.area()));
    return total;
}

double RectPartition::exponent() const {
    return std::log(objective()) / std::log(static_cast<double>(base.rows()));
}

void RectPartition::canonicalize() {
    for (auto& p : rects) {
        std::sort(p.rows.begin(), p.rows.end());
        std::sort(p.cols.begin(), p.cols.end());
    }
    std::sort(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) {
        if (a.rows != b.rows) return a.rows < b.rows;
        return a.cols < b.cols;
    });
}

namespace {

std::vector<std::uint32_t> check_binary_rowmasks(const SparseMatrix& base) {
    if (base.rows() > 16 || base.cols() > 16) {
        throw CapExceededError("rectangle enumeration cap is 16x16",
                               static_cast<std::uint64_t>(std::max(base.rows(), base.cols())), 16);
    }
    for (const auto& e : base.entries()) {
        if (!e.v.is_one()) throw InvalidInputError("rectangle operations need a 0/1 matrix");
    }
    std::vector<std::uint32_t> rowmask(static_cast<std::size_t>(base.rows()), 0);
    for (const auto& e : base.entries()) rowmask[e.row] |= 1u << e.col;
    return rowmask;
}

std::vector<std::uint32_t> bits_of(std::uint32_t mask) {
    std::vector<std::uint32_t> out;
    while (mask) {
        out.push_back(static_cast<std::uint32_t>(std::countr_zero(mask)));
        mask &= mask - 1;
    }
    return out;
}

}  // namespace

std::vector<Rect> enumerate_rectangles(const SparseMatrix& base) {
    auto rowmask = check_binary_rowmasks(base);
    const int nr = static_cast<int>(base.rows());
    // Closure: a maximal rectangle is (rows(C), C) with C = cols(rows(C)).
    // Every such C arises as cols(R) for some row subset R.
    std::map<std::uint32_t, std::uint32_t> by_cols;  // colset -> closed rowset
    for (std::uint32_t rs = 1; rs < (1u << nr); ++rs) {
        std::uint32_t common = ~0u;
        for (int i = 0; i < nr; ++i) {
            if ((rs >> i) & 1) common &= rowmask[i];
        }
        if (common == 0) continue;
        std::uint32_t closed_rows = 0;
        for (int i = 0; i < nr; ++i) {
            if ((rowmask[i] & common) == common) closed_rows |= 1u << i;
        }
        by_cols.emplace(common, closed_rows);
    }
    // Both sides of each closure pair are closed, so every pair is maximal.
    std::vector<Rect> out;
    for (const auto& [cols, rows] : by_cols) out.push_back({bits_of(rows), bits_of(cols)});
    std::sort(out.begin(), out.end(), [](const Rect& a, const Rect& b) {
        if (a.rows != b.rows) return a.rows < b.rows;
        return a.cols < b.cols;
    });
    return out;
}

namespace {

struct SearchState {
    int rows = 0, cols = 0;
    int ncells = 0;
    std::vector<std::pair<int, int>> cells;   // bit -> (row, col), row-major
    std::vector<std::vector<int>> cell_bit;   // [row][col] -> bit or -1
    std::uint64_t support = 0;
    std::vector<double> cell_lb;              // per bit: 1/sqrt(max all-ones rect area through it)
    std::uint64_t nodes = 0;
    std::uint64_t node_cap = 0;
    bool aborted = false;
    int max_parts = 0;

    struct Completion {
        double cost = std::numeric_limits<double>::infinity();
        int parts = 0;
        std::vector<std::uint64_t> rects;
    };
    std::unordered_map<std::uint64_t, Completion> memo;

    using RectKey = std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>;

    RectKey rect_key(std::uint64_t rect) const {
        RectKey key;
        std::uint32_t colset = 0;
        while (rect) {
            auto [r, c] = cells[std::countr_zero(rect)];  // cell bits are row-major
            if (key.first.empty() || key.first.back() != static_cast<std::uint32_t>(r)) {
                key.first.push_back(static_cast<std::uint32_t>(r));
            }
            colset |= 1u << c;
            rect &= rect - 1;
        }
        key.second = bits_of(colset);
        return key;
    }

    // Order used for tie-breaking: canonical rect lists ((rows, cols) both
    // ascending, rects sorted by that key) compared lexicographically.
    bool keys_less(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) const {
        std::vector<RectKey> ka, kb;
        ka.reserve(a.size());
        kb.reserve(b.size());
        for (std::uint64_t m : a) ka.push_back(rect_key(m));
        for (std::uint64_t m : b) kb.push_back(rect_key(m));
        std::sort(ka.begin(), ka.end());
        std::sort(kb.begin(), kb.end());
        return ka < kb;
    }

    bool uncovered(std::uint64_t mask, int r, int c) const {
        int b = cell_bit[r][c];
        return b >= 0 && ((mask >> b) & 1);
    }

    double lower_bound(std::uint64_t mask) const {
        double lb = 0.0;
        while (mask) {
            lb += cell_lb[std::countr_zero(mask)];
            mask &= mask - 1;
        }
        return lb;
    }

    struct Cand {
        std::uint64_t mask;
        std::int64_t area;
    };

    // All-ones, fully uncovered rectangles containing the given cell.
    std::vector<Cand> candidates(std::uint64_t mask, int r, int c) const {
        std::vector<int> rows_ok;
        for (int i = 0; i < rows; ++i) {
            if (i != r && uncovered(mask, i, c)) rows_ok.push_back(i);
        }
        std::vector<Cand> out;
        const std::uint64_t nsub = std::uint64_t(1) << rows_ok.size();
        std::vector<int> rsel;
        for (std::uint64_t rs = 0; rs < nsub; ++rs) {
            rsel.assign(1, r);
            for (std::size_t i = 0; i < rows_ok.size(); ++i) {
                if ((rs >> i) & 1) rsel.push_back(rows_ok[i]);
            }
            std::vector<int> cols_ok;
            for (int j = 0; j < cols; ++j) {
                if (j == c) continue;
                bool all = true;
                for (int i : rsel) {
                    if (!uncovered(mask, i, j)) { all = false; break; }
                }
                if (all) cols_ok.push_back(j);
            }
            const std::uint64_t ncsub = std::uint64_t(1) << cols_ok.size();
            for (std::uint64_t cs = 0; cs < ncsub; ++cs) {
                std::uint64_t rect = 0;
                std::int64_t ncols = 1;
                for (int i : rsel) rect |= std::uint64_t(1) << cell_bit[i][c];
                for (std::size_t j = 0; j < cols_ok.size(); ++j) {
                    if ((cs >> j) & 1) {
                        ++ncols;
                        for (int i : rsel) rect |= std::uint64_t(1) << cell_bit[i][cols_ok[j]];
                    }
                }
                out.push_back({rect, static_cast<std::int64_t>(rsel.size()) * ncols});
            }
        }
        std::sort(out.begin(), out.end(), [](const Cand& a, const Cand& b) {
            if (a.area != b.area) return a.area > b.area;
            return a.mask < b.mask;
        });
        return out;
    }

    // Optimal completion for the uncovered mask (unconstrained mode; memoized).
    Completion solve(std::uint64_t mask) {
        if (mask == 0) return {0.0, 0, {}};
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        if (++nodes > node_cap) aborted = true;
        Completion best;
        if (aborted) return best;
        auto [r, c] = cells[std::countr_zero(mask)];
        for (const Cand& cand : candidates(mask, r, c)) {
            double cost = std::sqrt(static_cast<double>(cand.area));
            if (cost + lower_bound(mask & ~cand.mask) > best.cost + 1e-12) continue;
            Completion rest = solve(mask & ~cand.mask);
            if (aborted) return best;
            double total = cost + rest.cost;
            std::vector<std::uint64_t> parts{cand.mask};
            parts.insert(parts.end(), rest.rects.begin(), rest.rects.end());
            std::sort(parts.begin(), parts.end());
            bool better = total < best.cost - 1e-12 ||
                          (total < best.cost + 1e-12 &&
                           (rest.parts + 1 < best.parts ||
                            (rest.parts + 1 == best.parts && keys_less(parts, best.rects))));
            if (better) {
                best.cost = total;
                best.parts = rest.parts + 1;
                best.rects = std::move(parts);
            }
        }
        if (!aborted && memo.size() < (1u << 22)) memo.emplace(mask, best);
        return best;
    }

    // Parts-constrained depth-first search with a global incumbent (no memo).
    Completion incumbent;
    std::vector<std::uint64_t> chain;

    void dfs(std::uint64_t mask, double cost, int parts) {
        if (aborted) return;
        if (mask == 0) {
            std::vector<std::uint64_t> sorted = chain;
            std::sort(sorted.begin(), sorted.end());
            bool better = cost < incumbent.cost - 1e-12 ||
                          (cost < incumbent.cost + 1e-12 &&
                           (parts < incumbent.parts ||
                            (parts == incumbent.parts && keys_less(sorted, incumbent.rects))));
            if (better) {
                incumbent.cost = cost;
                incumbent.parts = parts;
                incumbent.rects = std::move(sorted);
            }
            return;
        }
        if (parts >= max_parts) return;
        if (++nodes > node_cap) {
            aborted = true;
            return;
        }
        if (cost + lower_bound(mask) > incumbent.cost + 1e-12) return;
        auto [r, c] = cells[std::countr_zero(mask)];
        for (const Cand& cand : candidates(mask, r, c)) {
            chain.push_back(cand.mask);
            dfs(mask & ~cand.mask, cost + std::sqrt(static_cast<double>(cand.area)), parts + 1);
            chain.pop_back();
            if (aborted) return;
        }
    }
};

}  // namespace

PartitionSearchResult partition_search(const SparseMatrix& base, int max_parts, std::uint64_t node_cap) {
    auto rowmask = check_binary_rowmasks(base);
    if (base.nnz() > 64) {
        throw CapExceededError("partition search cap is 64 support cells",
                               static_cast<std::uint64_t>(base.nnz()), 64);
    }
    if (max_parts < 0) throw InvalidInputError("max_parts must be nonnegative");

    SearchState st;
    st.rows = static_cast<int>(base.rows());
    st.cols = static_cast<int>(base.cols());
    st.node_cap = node_cap;
    st.max_parts = max_parts;
    st.cell_bit.assign(st.rows, std::vector<int>(st.cols, -1));
    for (const auto& e : base.entries()) {  // entries are row-major sorted
        st.cell_bit[e.row][e.col] = st.ncells;
        st.cells.emplace_back(e.row, e.col);
        ++st.ncells;
    }
    st.support = st.ncells == 64 ? ~std::uint64_t(0) : ((std::uint64_t(1) << st.ncells) - 1);

    // Static per-cell bound: scan every row subset's all-ones rectangle.
    std::vector<std::int64_t> max_area(static_cast<std::size_t>(st.ncells), 0);
    for (std::uint32_t rs = 1; rs < (1u << st.rows); ++rs) {
        std::uint32_t common = ~0u;
        int nrows = 0;
        for (int i = 0; i < st.rows; ++i) {
            if ((rs >> i) & 1) {
                common &= rowmask[i];
                ++nrows;
            }
        }
        common &= (1u << st.cols) - 1;
        if (common == 0) continue;
        std::int64_t area = static_cast<std::int64_t>(nrows) * std::popcount(common);
        for (int i = 0; i < st.rows; ++i) {
            if (!((rs >> i) & 1)) continue;
            std::uint32_t cm = common;
            while (cm) {
                int bit = st.cell_bit[i][std::countr_zero(cm)];
                max_area[bit] = std::max(max_area[bit], area);
                cm &= cm - 1;
            }
        }
    }
    st.cell_lb.assign(static_cast<std::size_t>(st.ncells), 0.0);
    for (int b = 0; b < st.ncells; ++b) st.cell_lb[b] = 1.0 / std::sqrt(static_cast<double>(max_area[b]));

    SearchState::Completion best;
    if (max_parts == 0) {
        best = st.solve(st.support);
    } else {
        st.dfs(st.support, 0.0, 0);
        best = st.incumbent;
    }

    PartitionSearchResult out;
    out.nodes = st.nodes;
    if (!std::isfinite(best.cost)) {
        if (st.aborted) throw CapExceededError("partition search exhausted its node cap", st.nodes, node_cap);
        if (st.support != 0) throw InvalidInputError("no partition within max_parts");
        best = {0.0, 0, {}};
    }
    out.optimal = !st.aborted;
    out.partition.base = base;
    for (std::uint64_t rect : best.rects) {
        Rect part;
        std::uint32_t colset = 0;
        std::uint64_t m = rect;
        while (m) {
            auto [r, c] = st.cells[std::countr_zero(m)];
            if (part.rows.empty() || part.rows.back() != static_cast<std::uint32_t>(r)) {
                part.rows.push_back(static_cast<std::uint32_t>(r));
            }
            colset |= 1u << c;
            m &= m - 1;
        }
        part.cols = bits_of(colset);
        out.partition.rects.push_back(std::move(part));
    }
    out.partition.canonicalize();
    out.objective = out.partition.objective();
    out.partition.validate();
    return out;
}

std::vector<JsLevel> js_recurrence(int n) {
    if (n < 1 || n > 45) throw InvalidInputError("recurrence depth must be in [1, 45]");
    std::vector<JsLevel> out;
    std::int64_t s = 1, r = 1;
    for (int k = 1; k <= n; ++k) {
        out.push_back({k, s, r, 2 * (s + r), 2 * s + 3 * r});
        std::int64_t ns = s + 2 * r, nr = s + r;
        s = ns;
        r = nr;
    }
    return out;
}

void partition_save(const std::string& path, const RectPartition& p) {
    nlohmann::json j;
    j["base"] = matrix_to_json(p.base);
    j["rects"] = nlohmann::json::array();
    for (const auto& part : p.rects) {
        j["rects"].push_back({{"rows", part.rows}, {"cols", part.cols}});
    }
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

RectPartition partition_load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    RectPartition p;
    const auto& b = j.at("base");
    if (b.is_string()) {
        p.base = parse_base(b.get<std::string>(), FieldSpec::rationals()).matrix;
    } else {
        p.base = matrix_from_json(b);
    }
    for (const auto& part : j.at("rects")) {
        Rect r;
        r.rows = part.at("rows").get<std::vector<std::uint32_t>>();
        r.cols = part.at("cols").get<std::vector<std::uint32_t>>();
        p.rects.push_back(std::move(r));
    }
    return p;
}

}  // namespace kroncirc
