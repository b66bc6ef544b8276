#include "kroncirc/sparse.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace kroncirc {

namespace {

constexpr std::int64_t kMaxDim = std::numeric_limits<std::uint32_t>::max();

void check_dims(std::int64_t rows, std::int64_t cols) {
    if (rows < 0 || cols < 0) throw DimensionError("negative dimension");
    if (rows > kMaxDim || cols > kMaxDim) throw DimensionError("dimension exceeds 2^32-1");
}

void check_same_field(const SparseMatrix& a, const SparseMatrix& b) {
    if (!(a.field() == b.field())) {
        throw FieldMismatchError("matrix fields differ: " + a.field().label() + " vs " + b.field().label());
    }
}

}  // namespace

SparseMatrix::SparseMatrix(std::int64_t rows, std::int64_t cols, FieldSpec field)
    : rows_(rows), cols_(cols), field_(field) {
    check_dims(rows, cols);
}

SparseMatrix SparseMatrix::from_triplets(std::int64_t rows, std::int64_t cols, FieldSpec field,
                                         std::vector<Entry> entries) {
    check_dims(rows, cols);
    for (const Entry& e : entries) {
        if (e.row >= rows || e.col >= cols) throw DimensionError("entry coordinate out of range");
        if (!(e.v.spec() == field)) throw FieldMismatchError("entry field differs from matrix field");
    }
    auto by_coord = [](const Entry& x, const Entry& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    };
    if (!std::is_sorted(entries.begin(), entries.end(), by_coord)) {
        std::stable_sort(entries.begin(), entries.end(), by_coord);
    }
    std::vector<Entry> out;
    out.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size();) {
        std::size_t j = i;
        FieldElement v = entries[i].v;
        for (++j; j < entries.size() && entries[j].row == entries[i].row && entries[j].col == entries[i].col; ++j) {
            v += entries[j].v;
        }
        if (!v.is_zero()) out.push_back(Entry{entries[i].row, entries[i].col, std::move(v)});
        i = j;
    }
    SparseMatrix m(rows, cols, field);
    m.entries_ = std::move(out);
    return m;
}

SparseMatrix SparseMatrix::identity(std::int64_t n, const FieldSpec& field) {
    SparseMatrix m(n, n, field);
    m.entries_.reserve(static_cast<std::size_t>(n));
    FieldElement one = FieldElement::one(field);
    for (std::int64_t i = 0; i < n; ++i) {
        m.entries_.push_back(Entry{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), one});
    }
    return m;
}

FieldElement SparseMatrix::get(std::int64_t r, std::int64_t c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw DimensionError("get out of range");
    Entry probe{static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), FieldElement()};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                               [](const Entry& x, const Entry& y) {
                                   return x.row != y.row ? x.row < y.row : x.col < y.col;
                               });
    if (it != entries_.end() && it->row == r && it->col == c) return it->v;
    return FieldElement::zero(field_);
}

bool SparseMatrix::is_symmetric() const {
    if (rows_ != cols_) return false;
    return equals(*this, transpose(*this));
}

bool SparseMatrix::is_diagonal() const {
    for (const Entry& e : entries_) {
        if (e.row != e.col) return false;
    }
    return true;
}

std::vector<std::size_t> SparseMatrix::row_ptr() const {
    std::vector<std::size_t> ptr(static_cast<std::size_t>(rows_) + 1, 0);
    for (const Entry& e : entries_) ++ptr[e.row + 1];
    for (std::size_t i = 1; i < ptr.size(); ++i) ptr[i] += ptr[i - 1];
    return ptr;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    check_same_field(a, b);
    if (a.rows() * b.rows() > kMaxDim || a.cols() * b.cols() > kMaxDim) {
        throw DimensionError("kron result dimension exceeds 2^32-1");
    }
    SparseMatrix m(a.rows() * b.rows(), a.cols() * b.cols(), a.field());
    std::vector<SparseMatrix::Entry> out;
    out.reserve(static_cast<std::size_t>(a.nnz()) * static_cast<std::size_t>(b.nnz()));
    auto aptr = a.row_ptr();
    auto bptr = b.row_ptr();
    const auto& ae = a.entries();
    const auto& be = b.entries();
    // Row index is ar + a.rows*br and col is ac + a.cols*bc, so iterating
    // (br, ar, bc, ac) in lexicographic order emits canonical row-major order.
    for (std::int64_t br = 0; br < b.rows(); ++br) {
        if (bptr[br] == bptr[br + 1]) continue;
        for (std::int64_t ar = 0; ar < a.rows(); ++ar) {
            std::uint32_t row = static_cast<std::uint32_t>(ar + a.rows() * br);
            for (std::size_t bi = bptr[br]; bi < bptr[br + 1]; ++bi) {
                std::uint64_t cbase = static_cast<std::uint64_t>(a.cols()) * be[bi].col;
                for (std::size_t ai = aptr[ar]; ai < aptr[ar + 1]; ++ai) {
                    out.push_back(SparseMatrix::Entry{
                        row, static_cast<std::uint32_t>(ae[ai].col + cbase), ae[ai].v * be[bi].v});
                }
            }
        }
    }
    return SparseMatrix::from_triplets(m.rows(), m.cols(), a.field(), std::move(out));
}

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
    check_same_field(a, b);
    if (a.cols() != b.rows()) throw DimensionError("matmul inner dimensions differ");
    auto bptr = b.row_ptr();
    const auto& be = b.entries();
    std::vector<SparseMatrix::Entry> out;
    auto aptr = a.row_ptr();
    const auto& ae = a.entries();

    const bool dense_ok = b.cols() <= (1 << 16);
    std::vector<FieldElement> buf;
    std::vector<std::uint8_t> used;
    std::vector<std::uint32_t> touched;
    if (dense_ok) {
        buf.resize(static_cast<std::size_t>(b.cols()));
        used.assign(static_cast<std::size_t>(b.cols()), 0);
    }

    for (std::int64_t i = 0; i < a.rows(); ++i) {
        if (dense_ok) {
            touched.clear();
            for (std::size_t ai = aptr[i]; ai < aptr[i + 1]; ++ai) {
                std::uint32_t k = ae[ai].col;
                for (std::size_t bi = bptr[k]; bi < bptr[k + 1]; ++bi) {
                    std::uint32_t j = be[bi].col;
                    FieldElement p = ae[ai].v * be[bi].v;
                    if (used[j]) {
                        buf[j] += p;
                    } else {
                        buf[j] = std::move(p);
                        used[j] = 1;
                        touched.push_back(j);
                    }
                }
            }
            std::sort(touched.begin(), touched.end());
            for (std::uint32_t j : touched) {
                if (!buf[j].is_zero()) {
                    out.push_back(SparseMatrix::Entry{static_cast<std::uint32_t>(i), j, std::move(buf[j])});
                }
                used[j] = 0;
            }
        } else {
            std::map<std::uint32_t, FieldElement> acc;
            for (std::size_t ai = aptr[i]; ai < aptr[i + 1]; ++ai) {
                std::uint32_t k = ae[ai].col;
                for (std::size_t bi = bptr[k]; bi < bptr[k + 1]; ++bi) {
                    FieldElement p = ae[ai].v * be[bi].v;
                    auto [it, fresh] = acc.try_emplace(be[bi].col, p);
                    if (!fresh) it->second += p;
                }
            }
            for (auto& [j, v] : acc) {
                if (!v.is_zero()) out.push_back(SparseMatrix::Entry{static_cast<std::uint32_t>(i), j, std::move(v)});
            }
        }
    }
    SparseMatrix m(a.rows(), b.cols(), a.field());
    return SparseMatrix::from_triplets(a.rows(), b.cols(), a.field(), std::move(out));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b) {
    check_same_field(a, b);
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add shapes differ");
    std::vector<SparseMatrix::Entry> out;
    out.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
    out.insert(out.end(), a.entries().begin(), a.entries().end());
    out.insert(out.end(), b.entries().begin(), b.entries().end());
    return SparseMatrix::from_triplets(a.rows(), a.cols(), a.field(), std::move(out));
}

SparseMatrix sub(const SparseMatrix& a, const SparseMatrix& b) {
    check_same_field(a, b);
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("sub shapes differ");
    std::vector<SparseMatrix::Entry> out;
    out.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
    out.insert(out.end(), a.entries().begin(), a.entries().end());
    for (const auto& e : b.entries()) out.push_back(SparseMatrix::Entry{e.row, e.col, -e.v});
    return SparseMatrix::from_triplets(a.rows(), a.cols(), a.field(), std::move(out));
}

SparseMatrix transpose(const SparseMatrix& a) {
    std::vector<SparseMatrix::Entry> out;
    out.reserve(static_cast<std::size_t>(a.nnz()));
    for (const auto& e : a.entries()) out.push_back(SparseMatrix::Entry{e.col, e.row, e.v});
    return SparseMatrix::from_triplets(a.cols(), a.rows(), a.field(), std::move(out));
}

bool equals(const SparseMatrix& a, const SparseMatrix& b) {
    if (!(a.field() == b.field()) || a.rows() != b.rows() || a.cols() != b.cols() || a.nnz() != b.nnz()) {
        return false;
    }
    const auto& ae = a.entries();
    const auto& be = b.entries();
    for (std::size_t i = 0; i < ae.size(); ++i) {
        if (ae[i].row != be[i].row || ae[i].col != be[i].col || !(ae[i].v == be[i].v)) return false;
    }
    return true;
}

SparseMatrix scale(const SparseMatrix& a, const FieldElement& s) {
    if (!(s.spec() == a.field())) throw FieldMismatchError("scalar field differs from matrix field");
    std::vector<SparseMatrix::Entry> out;
    if (!s.is_zero()) {
        out.reserve(static_cast<std::size_t>(a.nnz()));
        for (const auto& e : a.entries()) out.push_back(SparseMatrix::Entry{e.row, e.col, e.v * s});
    }
    return SparseMatrix::from_triplets(a.rows(), a.cols(), a.field(), std::move(out));
}

SparseMatrix kron_power(const SparseMatrix& m, int n) {
    if (n < 0) throw InvalidInputError("negative kron power");
    SparseMatrix acc = SparseMatrix::identity(1, m.field());
    for (int i = 0; i < n; ++i) acc = kron(acc, m);
    return acc;
}

std::vector<FieldElement> apply(const SparseMatrix& m, const std::vector<FieldElement>& x) {
    if (static_cast<std::int64_t>(x.size()) != m.cols()) throw DimensionError("apply vector length differs");
    std::vector<FieldElement> y(static_cast<std::size_t>(m.rows()), FieldElement::zero(m.field()));
    for (const auto& e : m.entries()) y[e.row] += e.v * x[e.col];
    return y;
}

std::vector<FieldElement> kron_power_apply(const SparseMatrix& m, int n,
                                           const std::vector<FieldElement>& x) {
    if (m.rows() != m.cols()) throw DimensionError("kron_power_apply requires a square matrix");
    if (n < 0) throw InvalidInputError("negative kron power");
    const std::int64_t q = m.rows();
    std::int64_t len = 1;
    for (int i = 0; i < n; ++i) {
        if (len > kMaxDim / q) throw DimensionError("kron power dimension exceeds 2^32-1");
        len *= q;
    }
    if (static_cast<std::int64_t>(x.size()) != len) throw DimensionError("vector length is not q^n");

    auto ptr = m.row_ptr();
    const auto& me = m.entries();
    std::vector<FieldElement> cur = x;
    std::vector<FieldElement> slot(static_cast<std::size_t>(q));
    const FieldElement zero = FieldElement::zero(m.field());
    // Digit position d of the index addresses Kronecker factor d (low digit first).
    std::int64_t stride = 1;
    for (int d = 0; d < n; ++d) {
        for (std::int64_t base = 0; base < len; base += q * stride) {
            for (std::int64_t off = 0; off < stride; ++off) {
                for (std::int64_t b = 0; b < q; ++b) slot[b] = std::move(cur[base + off + b * stride]);
                for (std::int64_t a = 0; a < q; ++a) {
                    FieldElement acc = zero;
                    for (std::size_t i = ptr[a]; i < ptr[a + 1]; ++i) acc += me[i].v * slot[me[i].col];
                    cur[base + off + a * stride] = std::move(acc);
                }
            }
        }
        stride *= q;
    }
    return cur;
}

SparseMatrix hconcat(const std::vector<SparseMatrix>& blocks) {
    if (blocks.empty()) throw InvalidInputError("hconcat of zero blocks");
    std::int64_t rows = blocks[0].rows();
    std::int64_t cols = 0;
    std::size_t nnz = 0;
    for (const auto& b : blocks) {
        if (b.rows() != rows) throw DimensionError("hconcat row counts differ");
        check_same_field(blocks[0], b);
        cols += b.cols();
        nnz += static_cast<std::size_t>(b.nnz());
    }
    std::vector<SparseMatrix::Entry> out;
    out.reserve(nnz);
    std::int64_t off = 0;
    for (const auto& b : blocks) {
        for (const auto& e : b.entries()) {
            out.push_back(SparseMatrix::Entry{e.row, static_cast<std::uint32_t>(e.col + off), e.v});
        }
        off += b.cols();
    }
    return SparseMatrix::from_triplets(rows, cols, blocks[0].field(), std::move(out));
}

SparseMatrix vstack(const std::vector<SparseMatrix>& blocks) {
    if (blocks.empty()) throw InvalidInputError("vstack of zero blocks");
    std::int64_t cols = blocks[0].cols();
    std::int64_t rows = 0;
    std::size_t nnz = 0;
    for (const auto& b : blocks) {
        if (b.cols() != cols) throw DimensionError("vstack column counts differ");
        check_same_field(blocks[0], b);
        rows += b.rows();
        nnz += static_cast<std::size_t>(b.nnz());
    }
    std::vector<SparseMatrix::Entry> out;
    out.reserve(nnz);
    std::int64_t off = 0;
    for (const auto& b : blocks) {
        for (const auto& e : b.entries()) {
            out.push_back(SparseMatrix::Entry{static_cast<std::uint32_t>(e.row + off), e.col, e.v});
        }
        off += b.rows();
    }
    return SparseMatrix::from_triplets(rows, cols, blocks[0].field(), std::move(out));
}

SparseMatrix to_prime_field(const SparseMatrix& m, std::uint64_t p) {
    FieldSpec gf = FieldSpec::prime(p);
    std::vector<SparseMatrix::Entry> out;
    out.reserve(static_cast<std::size_t>(m.nnz()));
    for (const auto& e : m.entries()) {
        FieldElement v = FieldElement::zero(gf);
        if (m.field().kind == FieldKind::rational) {
            const Rat& r = e.v.rat();
            FieldElement den = FieldElement::from_bigint(gf, denominator(r));
            if (den.is_zero()) {
                throw InvalidInputError("denominator vanishes mod " + std::to_string(p));
            }
            v = FieldElement::from_bigint(gf, numerator(r)) / den;
        } else if (m.field().modulus == p) {
            v = e.v;
        } else {
            throw FieldMismatchError("cannot map between distinct prime fields");
        }
        if (!v.is_zero()) out.push_back(SparseMatrix::Entry{e.row, e.col, std::move(v)});
    }
    return SparseMatrix::from_triplets(m.rows(), m.cols(), gf, std::move(out));
}

void smx_write(std::ostream& os, const SparseMatrix& m) {
    os << "SMX " << m.rows() << " " << m.cols() << " " << m.nnz() << " " << m.field().label() << "\n";
    for (const auto& e : m.entries()) {
        os << e.row << " " << e.col << " " << e.v.str() << "\n";
    }
}

SparseMatrix smx_read(std::istream& is) {
    std::string magic;
    std::int64_t rows = -1, cols = -1, nnz = -1;
    std::string field_label;
    if (!(is >> magic >> rows >> cols >> nnz >> field_label) || magic != "SMX") {
        throw InvalidInputError("malformed SMX header");
    }
    if (nnz < 0) throw InvalidInputError("negative nnz in SMX header");
    FieldSpec field = FieldSpec::parse_label(field_label);
    std::vector<SparseMatrix::Entry> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    for (std::int64_t i = 0; i < nnz; ++i) {
        std::int64_t r = -1, c = -1;
        std::string val;
        if (!(is >> r >> c >> val)) throw InvalidInputError("truncated SMX body");
        if (r < 0 || r >= rows || c < 0 || c >= cols) throw InvalidInputError("SMX coordinate out of range");
        entries.push_back(SparseMatrix::Entry{static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c),
                                              FieldElement::parse(field, val)});
    }
    return SparseMatrix::from_triplets(rows, cols, field, std::move(entries));
}

void smx_save(const std::string& path, const SparseMatrix& m) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    smx_write(os, m);
    if (!os) throw Error("write failed: " + path);
}

SparseMatrix smx_load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open: " + path);
    return smx_read(is);
}

}  // namespace kroncirc
