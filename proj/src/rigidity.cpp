#include "kroncirc/rigidity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "kroncirc/presets.hpp"
#include "kroncirc/rng.hpp"
#include "json_util.hpp"

namespace kroncirc {

namespace {

constexpr int kMaxWitnessN = 12;  // witness matrices are materialized densely

FieldElement pow_conv(const FieldElement& base, long long e) {
    // 0^0 = 1 by convention; other zero powers are zero.
    if (base.is_zero()) {
        return e == 0 ? FieldElement::one(base.spec()) : FieldElement::zero(base.spec());
    }
    return base.pow(e);
}

RigidityWitness witness_from_rank1(std::string name, SparseMatrix target,
                                   const std::vector<FieldElement>& uvec,
                                   const std::vector<FieldElement>& vvec) {
    const std::int64_t n = target.rows();
    const FieldSpec field = target.field();
    std::vector<SparseMatrix::Entry> ue, ve;
    for (std::int64_t x = 0; x < n; ++x) {
        if (!uvec[x].is_zero()) ue.push_back({static_cast<std::uint32_t>(x), 0, uvec[x]});
    }
    for (std::int64_t y = 0; y < n; ++y) {
        if (!vvec[y].is_zero()) ve.push_back({0, static_cast<std::uint32_t>(y), vvec[y]});
    }
    RigidityWitness w;
    w.target_name = std::move(name);
    w.u = SparseMatrix::from_triplets(n, 1, field, std::move(ue));
    w.v = SparseMatrix::from_triplets(1, n, field, std::move(ve));
    w.s = sub(target, matmul(w.u, w.v));
    w.target = std::move(target);
    w.rank_bound = 1;
    w.changes = w.s.nnz();
    return w;
}

}  // namespace

BigInt binom(long long n, long long k) {
    if (k < 0) return 0;
    if (n < 0) {
        // C(n, k) = (-1)^k C(k - n - 1, k) for negative upper index.
        BigInt v = binom(k - n - 1, k);
        return (k % 2 == 0) ? v : -v;
    }
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt v = 1;
    for (long long t = 1; t <= k; ++t) {
        v *= (n - t + 1);
        v /= t;  // exact: product of t consecutive integers is divisible by t!
    }
    return v;
}

std::pair<std::vector<int>, std::vector<int>> rank1_b_vectors(int n) {
    if (n < 1) throw InvalidInputError("rank-1 construction requires n >= 1");
    const std::size_t size = std::size_t(1) << n;
    std::vector<int> b1(size), b2(size);
    for (std::size_t x = 0; x < size; ++x) {
        int w = std::popcount(x);
        int fl = w / 2, ce = (w + 1) / 2;
        switch (n % 4) {
            case 0: b1[x] = fl; b2[x] = ce - n / 4; break;
            case 1: b1[x] = fl; b2[x] = ce - (n - 1) / 4; break;
            case 2: b1[x] = ce; b2[x] = ce - (n + 2) / 4; break;
            default: b1[x] = ce; b2[x] = ce - (n + 1) / 4; break;
        }
    }
    return {std::move(b1), std::move(b2)};
}

namespace {

RigidityWitness rank1_from_b_vectors(const FieldElement& omega, int n, std::string name,
                                     SparseMatrix target) {
    if (n > kMaxWitnessN) {
        throw CapExceededError("rank-1 witness cap: n > 12", static_cast<std::uint64_t>(n), kMaxWitnessN);
    }
    auto [b1, b2] = rank1_b_vectors(n);
    const std::size_t size = std::size_t(1) << n;
    // Power cache over the full exponent range of b1 + b2 and <x,y>.
    std::vector<FieldElement> pw(4 * n + 1, FieldElement::one(omega.spec()));
    for (int e = -2 * n; e <= 2 * n; ++e) pw[e + 2 * n] = omega.pow(e);
    auto wpow = [&](int e) -> const FieldElement& { return pw[e + 2 * n]; };

    std::vector<FieldElement> uvec, vvec;
    uvec.reserve(size);
    vvec.reserve(size);
    for (std::size_t x = 0; x < size; ++x) uvec.push_back(wpow(b1[x]));
    for (std::size_t y = 0; y < size; ++y) vvec.push_back(wpow(b2[y]));
    return witness_from_rank1(std::move(name), std::move(target), uvec, vvec);
}

}  // namespace

RigidityWitness rank1_construct_kron2(const FieldElement& omega, int n) {
    if (omega.is_zero() || omega.is_one()) {
        throw InvalidInputError("rank-1 construction needs omega outside {0, 1}");
    }
    SparseMatrix target = kron_power(omega_base(omega), n);
    return rank1_from_b_vectors(omega, n, "kron2:" + omega.str() + ":" + std::to_string(n),
                                std::move(target));
}

RigidityWitness rank1_construct_wh(int n, const FieldSpec& field) {
    if (field.kind == FieldKind::prime && field.modulus == 2) {
        throw InvalidInputError("sign construction is degenerate in characteristic 2");
    }
    FieldElement minus_one = -FieldElement::one(field);
    return rank1_from_b_vectors(minus_one, n, "h" + std::to_string(n), walsh_hadamard(n, field));
}

BigInt good_pair_count(int n, PairMode mode) {
    if (n < 1) throw InvalidInputError("good_pair_count requires n >= 1");
    BigInt one = 1;
    if (mode == PairMode::generic) {
        if (n % 2 == 0) return (one << n) * binom(n + 1, n / 2);
        return (one << (n - 1)) * binom(n + 2, (n + 1) / 2);
    }
    if (n % 2 == 0) return (one << (2 * n - 1)) + (one << (3 * n / 2 - 1));
    return (one << (2 * n - 1)) + (one << (3 * (n - 1) / 2));
}

BigInt rank1_changes_closed_form(int n, PairMode mode) {
    return (BigInt(1) << (2 * n)) - good_pair_count(n, mode);
}

BigInt multisection(int n, int s, int r) {
    if (n < 0 || s < 1 || r < 0 || r >= s) throw InvalidInputError("multisection parameter out of range");
    BigInt total = 0;
    for (int t = r; t <= n; t += s) total += binom(n, t);
    return total;
}

BigInt multisection4_closed(int n, int r) {
    if (n < 0 || r < 0 || r >= 4) throw InvalidInputError("multisection parameter out of range");
    if (n == 0) return r == 0 ? 1 : 0;
    // Elements of Z[sqrt 2] scaled by 2: value = (a + b*sqrt 2) / 2.
    struct Z2 {
        BigInt a, b;
    };
    auto cos_q = [](long long t) -> Z2 {  // 2 * cos(pi t / 4)
        switch (((t % 8) + 8) % 8) {
            case 0: return {2, 0};
            case 1: return {0, 1};
            case 2: return {0, 0};
            case 3: return {0, -1};
            case 4: return {-2, 0};
            case 5: return {0, -1};
            case 6: return {0, 0};
            default: return {0, 1};
        }
    };
    // 2 * (sqrt 2)^n
    Z2 root_pow = (n % 2 == 0) ? Z2{BigInt(2) << (n / 2), 0} : Z2{0, BigInt(2) << ((n - 1) / 2)};
    auto mul = [](const Z2& x, const Z2& y) {
        return Z2{x.a * y.a + 2 * x.b * y.b, x.a * y.b + x.b * y.a};
    };
    const long long m = n - 2ll * r;
    // Sum over j of (2 cos(pi j/4))^n cos(pi m j / 4); the j = 2 term vanishes
    // for n >= 1.  Everything is tracked as 4 * value.
    Z2 total{BigInt(4) << n, 0};  // j = 0
    Z2 j1 = mul(root_pow, cos_q(m));
    Z2 j3 = mul(root_pow, cos_q(3 * m));
    if (n % 2 == 1) j3 = Z2{-j3.a, -j3.b};
    total = Z2{total.a + j1.a + j3.a, total.b + j1.b + j3.b};
    if (total.b != 0) throw Error("irrational part did not cancel in multisection closed form");
    if (total.a % 16 != 0) throw Error("closed-form multisection value is not integral");
    return total.a / 16;
}

Rank1Minimum rank1_oracle(const SparseMatrix& m, const std::vector<FieldElement>& entry_pool) {
    const std::int64_t n = m.rows();
    if (n != m.cols()) throw InvalidInputError("rank1_oracle requires a square matrix");
    if (n < 1 || n > 16) throw InvalidInputError("rank1_oracle dimension cap is 16");
    if (entry_pool.empty()) throw InvalidInputError("empty entry pool");
    for (const auto& e : entry_pool) {
        if (!(e.spec() == m.field())) throw FieldMismatchError("pool entry field differs from matrix");
    }
    double work = std::pow(static_cast<double>(entry_pool.size()), static_cast<double>(n)) *
                  static_cast<double>(n) * static_cast<double>(n);
    if (work > 4e9) {
        throw CapExceededError("rank1_oracle search space too large", static_cast<std::uint64_t>(work),
                               static_cast<std::uint64_t>(4e9));
    }

    std::vector<std::vector<FieldElement>> dm(n, std::vector<FieldElement>(n, FieldElement::zero(m.field())));
    for (const auto& e : m.entries()) dm[e.row][e.col] = e.v;

    const std::size_t p = entry_pool.size();
    std::vector<std::size_t> idx(n, 0);
    std::vector<FieldElement> u(n, entry_pool[0]);
    std::vector<FieldElement> best_u, best_v;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();

    std::vector<std::pair<FieldElement, int>> tally;
    std::vector<FieldElement> v(n, FieldElement::zero(m.field()));
    for (;;) {
        std::int64_t cost = 0;
        for (std::int64_t y = 0; y < n; ++y) {
            tally.clear();
            int zeros_agree = 0;
            for (std::int64_t x = 0; x < n; ++x) {
                if (u[x].is_zero()) {
                    if (dm[x][y].is_zero()) ++zeros_agree;
                    continue;
                }
                FieldElement c = dm[x][y] / u[x];
                bool found = false;
                for (auto& [val, cnt] : tally) {
                    if (val == c) { ++cnt; found = true; break; }
                }
                if (!found) tally.emplace_back(std::move(c), 1);
            }
            int best_votes = 0;
            const FieldElement* winner = nullptr;
            for (const auto& [val, cnt] : tally) {
                if (cnt > best_votes) { best_votes = cnt; winner = &val; }
            }
            v[y] = winner ? *winner : FieldElement::zero(m.field());
            cost += n - (zeros_agree + best_votes);
        }
        if (cost < best) {
            best = cost;
            best_u = u;
            best_v = v;
        }
        // Odometer; idx[0] most significant, so enumeration is lexicographic.
        std::int64_t pos = n - 1;
        while (pos >= 0 && idx[pos] + 1 == p) {
            idx[pos] = 0;
            u[pos] = entry_pool[0];
            --pos;
        }
        if (pos < 0) break;
        ++idx[pos];
        u[pos] = entry_pool[idx[pos]];
    }

    Rank1Minimum out;
    out.changes = best;
    out.witness = witness_from_rank1("", m, best_u, best_v);
    if (out.witness.changes != best) throw Error("oracle witness disagrees with its own count");
    return out;
}

namespace {

std::int64_t sign_vector_cost(const std::vector<std::vector<FieldElement>>& dm,
                              const std::vector<int>& sign, std::vector<FieldElement>* vout) {
    const std::int64_t n = static_cast<std::int64_t>(dm.size());
    std::int64_t cost = 0;
    std::vector<std::pair<FieldElement, int>> tally;
    for (std::int64_t y = 0; y < n; ++y) {
        tally.clear();
        for (std::int64_t x = 0; x < n; ++x) {
            FieldElement c = sign[x] > 0 ? dm[x][y] : -dm[x][y];
            bool found = false;
            for (auto& [val, cnt] : tally) {
                if (val == c) { ++cnt; found = true; break; }
            }
            if (!found) tally.emplace_back(std::move(c), 1);
        }
        int best_votes = 0;
        const FieldElement* winner = nullptr;
        for (const auto& [val, cnt] : tally) {
            if (cnt > best_votes) { best_votes = cnt; winner = &val; }
        }
        if (vout) (*vout)[y] = *winner;
        cost += n - best_votes;
    }
    return cost;
}

}  // namespace

Rank1Minimum rank1_anneal(const SparseMatrix& m, std::uint64_t iterations, std::uint64_t seed) {
    const std::int64_t n = m.rows();
    if (n != m.cols() || n < 1) throw InvalidInputError("rank1_anneal requires a square matrix");
    std::vector<std::vector<FieldElement>> dm(n, std::vector<FieldElement>(n, FieldElement::zero(m.field())));
    for (const auto& e : m.entries()) dm[e.row][e.col] = e.v;

    std::vector<int> sign(n, 1);
    if ((n & (n - 1)) == 0 && n > 1) {
        // Power-of-two dimension: start from the construction's sign vector.
        int k = std::countr_zero(static_cast<std::uint64_t>(n));
        auto [b1, b2] = rank1_b_vectors(k);
        for (std::int64_t x = 0; x < n; ++x) sign[x] = (b1[x] % 2 == 0) ? 1 : -1;
    }

    std::int64_t cost = sign_vector_cost(dm, sign, nullptr);
    std::vector<int> best_sign = sign;
    std::int64_t best = cost;
    SplitMix64 rng(seed);
    const double t0 = static_cast<double>(n) / 2.0, t1 = 0.01;
    for (std::uint64_t it = 0; it < iterations; ++it) {
        double temp = t0 * std::pow(t1 / t0, iterations <= 1 ? 1.0 : static_cast<double>(it) /
                                                                       static_cast<double>(iterations - 1));
        std::int64_t flip = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
        sign[flip] = -sign[flip];
        std::int64_t next = sign_vector_cost(dm, sign, nullptr);
        std::int64_t delta = next - cost;
        if (delta <= 0 || rng.unit() < std::exp(-static_cast<double>(delta) / temp)) {
            cost = next;
            if (cost < best) {
                best = cost;
                best_sign = sign;
            }
        } else {
            sign[flip] = -sign[flip];
        }
    }

    std::vector<FieldElement> u, v(n, FieldElement::zero(m.field()));
    FieldElement one = FieldElement::one(m.field());
    for (std::int64_t x = 0; x < n; ++x) u.push_back(best_sign[x] > 0 ? one : -one);
    sign_vector_cost(dm, best_sign, &v);
    Rank1Minimum out;
    out.changes = best;
    out.witness = witness_from_rank1("", m, u, v);
    if (out.witness.changes != best) throw Error("annealing witness disagrees with its own count");
    return out;
}

FieldElement InterpolationPoly::eval_at_weight(long long w) const {
    FieldElement acc = FieldElement::zero(field);
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        acc += coeffs[j] * FieldElement::from_bigint(field, binom(w - k - 1, static_cast<long long>(j)));
    }
    return acc;
}

InterpolationPoly interpolation_poly(const FieldSpec& field, int r, int k,
                                     const std::vector<FieldElement>& constants) {
    if (r < 1 || constants.size() != static_cast<std::size_t>(r)) {
        throw InvalidInputError("interpolation needs r >= 1 prescribed values");
    }
    for (const auto& c : constants) {
        if (!(c.spec() == field)) throw FieldMismatchError("constant field differs");
    }
    InterpolationPoly p;
    p.field = field;
    p.k = k;
    p.coeffs.reserve(r);
    // Row i has entries C(i-1, j) with unit diagonal: forward substitution,
    // no division.
    for (int i = 1; i <= r; ++i) {
        FieldElement a = constants[i - 1];
        for (int j = 0; j < i - 1; ++j) {
            a -= p.coeffs[j] * FieldElement::from_bigint(field, binom(i - 1, j));
        }
        p.coeffs.push_back(std::move(a));
    }
    return p;
}

namespace {

// Count pairs (x, y) whose q^2 pattern counts all lie in [l, h]: sum of
// multinomials over bounded compositions of n into q^2 parts.
BigInt window_pair_count(int n, int patterns, int l, int h) {
    BigInt total = 0;
    std::vector<int> parts(patterns, 0);
    BigInt nfact = 1;
    for (int i = 2; i <= n; ++i) nfact *= i;
    std::vector<BigInt> fact(n + 1, 1);
    for (int i = 2; i <= n; ++i) fact[i] = fact[i - 1] * i;
    auto rec = [&](auto&& self, int p, int left) -> void {
        if (p == patterns - 1) {
            if (left < l || left > h) return;
            parts[p] = left;
            BigInt term = nfact;
            for (int c : parts) term /= fact[c];
            total += term;
            return;
        }
        for (int c = l; c <= std::min(h, left); ++c) {
            parts[p] = c;
            self(self, p + 1, left - c);
        }
    };
    rec(rec, 0, n);
    return total;
}

}  // namespace

PolyDecomp polymethod_decomp(const SparseMatrix& m, int n, int l, int h) {
    const std::int64_t q = m.rows();
    if (q != m.cols() || q < 1) throw InvalidInputError("polymethod requires a square base");
    if (n < 1 || l < 0 || l > h || h > n) throw InvalidInputError("polymethod window out of range");
    const int patterns = static_cast<int>(q * q);
    if (patterns * n > 64) throw CapExceededError("monomial bitmask needs q^2 n <= 64",
                                                  static_cast<std::uint64_t>(patterns * n), 64);
    std::int64_t dim = 1;
    for (int i = 0; i < n; ++i) {
        dim *= q;
        if (dim > 4096) throw CapExceededError("polymethod target cap is q^n <= 4096",
                                               static_cast<std::uint64_t>(dim), 4096);
    }
    const FieldSpec field = m.field();
    const int r = h - l + 1;

    std::vector<std::vector<FieldElement>> dm(q, std::vector<FieldElement>(q, FieldElement::zero(field)));
    for (const auto& e : m.entries()) dm[e.row][e.col] = e.v;

    // Multilinear coefficients mu[pattern][size]: each pattern polynomial is
    // sum over subsets S of mu[|S|] * prod_{i in S} e_s(x_i) e_t(y_i).
    std::vector<std::vector<FieldElement>> mu(patterns);
    for (int s = 0; s < q; ++s) {
        for (int t = 0; t < q; ++t) {
            std::vector<FieldElement> constants;
            for (int i = 1; i <= r; ++i) constants.push_back(pow_conv(dm[s][t], l - 1 + i));
            InterpolationPoly ip = interpolation_poly(field, r, l - 1, constants);
            std::vector<FieldElement> tv;
            for (int w = 0; w <= ip.degree(); ++w) tv.push_back(ip.eval_at_weight(w));
            auto& mpat = mu[s * q + t];
            for (int mm = 0; mm <= ip.degree(); ++mm) {
                FieldElement acc = FieldElement::zero(field);
                for (int i = 0; i <= mm; ++i) {
                    FieldElement c = FieldElement::from_bigint(field, binom(mm, i)) * tv[i];
                    acc += (mm - i) % 2 == 0 ? c : -c;
                }
                mpat.push_back(std::move(acc));
            }
        }
    }

    // Subsets of positions by size.
    std::vector<std::vector<std::uint32_t>> subsets_by_size(n + 1);
    for (std::uint32_t s = 0; s < (1u << n); ++s) subsets_by_size[std::popcount(s)].push_back(s);

    struct Mono {
        std::uint64_t mask;     // bit (pat*n + i): position i assigned pattern pat
        std::uint32_t occ;      // union of assigned positions
        FieldElement c;
    };
    std::vector<Mono> cur{{0, 0, FieldElement::one(field)}};
    // Distinct patterns are indicators of disjoint events per position, so a
    // position claimed twice kills the monomial; eager reduction = skip.
    for (int pat = 0; pat < patterns; ++pat) {
        std::vector<Mono> next;
        for (const Mono& mo : cur) {
            for (int sz = 0; sz < static_cast<int>(mu[pat].size()); ++sz) {
                if (mu[pat][sz].is_zero()) continue;
                for (std::uint32_t sel : subsets_by_size[sz]) {
                    if (sel & mo.occ) continue;
                    next.push_back(Mono{mo.mask | (static_cast<std::uint64_t>(sel) << (pat * n)),
                                        mo.occ | sel, mo.c * mu[pat][sz]});
                }
            }
        }
        cur = std::move(next);
        if (cur.size() > (1u << 22)) {
            throw CapExceededError("monomial count cap", cur.size(), 1u << 22);
        }
    }
    std::sort(cur.begin(), cur.end(), [](const Mono& a, const Mono& b) { return a.mask < b.mask; });

    // u[x, i] = c_i when x matches monomial i's source digits; v[i, y] = 1 when
    // y matches its target digits.
    auto digits_of = [&](std::int64_t x) {
        std::vector<int> d(n);
        for (int i = 0; i < n; ++i) {
            d[i] = static_cast<int>(x % q);
            x /= q;
        }
        return d;
    };
    std::vector<SparseMatrix::Entry> ue, ve;
    const std::int64_t mono_count = static_cast<std::int64_t>(cur.size());
    for (std::int64_t x = 0; x < dim; ++x) {
        auto d = digits_of(x);
        for (std::int64_t i = 0; i < mono_count; ++i) {
            bool ok = true;
            for (int pos = 0; pos < n && ok; ++pos) {
                for (int pat = 0; pat < patterns; ++pat) {
                    if ((cur[i].mask >> (pat * n + pos)) & 1) {
                        if (d[pos] != pat / q) ok = false;
                        break;
                    }
                }
            }
            if (ok) ue.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(i), cur[i].c});
        }
    }
    const FieldElement one = FieldElement::one(field);
    for (std::int64_t i = 0; i < mono_count; ++i) {
        for (std::int64_t y = 0; y < dim; ++y) {
            auto d = digits_of(y);
            bool ok = true;
            for (int pos = 0; pos < n && ok; ++pos) {
                for (int pat = 0; pat < patterns; ++pat) {
                    if ((cur[i].mask >> (pat * n + pos)) & 1) {
                        if (d[pos] != pat % q) ok = false;
                        break;
                    }
                }
            }
            if (ok) ve.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(y), one});
        }
    }

    PolyDecomp out;
    out.u = SparseMatrix::from_triplets(dim, mono_count, field, std::move(ue));
    out.v = SparseMatrix::from_triplets(mono_count, dim, field, std::move(ve));
    out.s = sub(kron_power(m, n), matmul(out.u, out.v));
    out.rank_bound = mono_count;
    out.changes = out.s.nnz();
    out.good_pairs = window_pair_count(n, patterns, l, h);
    BigInt all_pairs = 1;
    for (int i = 0; i < 2 * n; ++i) all_pairs *= q;
    out.bad_pairs = all_pairs - out.good_pairs;
    BigInt outside = 0;
    for (int t = 0; t <= n; ++t) {
        if (t >= l && t <= h) continue;
        BigInt rest = 1;
        for (int i = 0; i < n - t; ++i) rest *= (patterns - 1);
        outside += binom(n, t) * rest;
    }
    out.union_bound = BigInt(patterns) * outside;
    return out;
}

double exponent_kron2(int k) {
    if (k < 1) throw InvalidInputError("exponent needs k >= 1");
    double r = rank1_changes_closed_form(k, PairMode::generic).convert_to<double>();
    double qd = std::ldexp(1.0, k);
    return std::log(qd + std::sqrt(qd * r)) / (k * std::log(2.0));
}

double exponent_wh(int k) {
    if (k < 1) throw InvalidInputError("exponent needs k >= 1");
    double r = rank1_changes_closed_form(k, PairMode::wh).convert_to<double>();
    double qd = std::ldexp(1.0, k);
    return std::log(qd + std::sqrt(qd * r)) / (k * std::log(2.0));
}

PriorExponent exponent_prior(double r, double rig, double n_dim) {
    if (r < 0 || rig < 0 || n_dim <= 1) throw InvalidInputError("bad prior-exponent parameters");
    PriorExponent out;
    out.c = std::log((r + 1.0) * (r + rig / n_dim)) / std::log(n_dim);
    out.exponent = 1.0 + out.c / 2.0;
    return out;
}

std::vector<std::pair<int, double>> prior_c_table(int max_n) {
    std::vector<std::pair<int, double>> out;
    for (int n = 1; n <= max_n; ++n) {
        double rig = n <= 4 ? rank1_changes_closed_form(n, PairMode::wh).convert_to<double>()
                            : 432.0 * std::ldexp(1.0, 2 * (n - 5));
        double dim = std::ldexp(1.0, n);
        out.emplace_back(n, std::log(2.0 * (1.0 + rig / dim)) / std::log(dim));
    }
    return out;
}

GeneralQExponent exponent_general_q(double q, double s) {
    if (q < 2 || s <= 0 || s >= 0.5) throw InvalidInputError("general-q parameters need q >= 2, 0 < s < 1/2");
    GeneralQExponent out;
    double l2 = std::log2(q);
    out.h = (1.0 / (4.0 * q * q * l2)) * ((s / 128.0) * (s / 128.0) / (std::log2(2.0 / s) * std::log2(2.0 / s)));
    out.a = std::min(0.5 - s, out.h / 2.0);
    out.b = 1.5 - out.a;
    return out;
}

double exponent_js() { return std::log2(1.0 + std::sqrt(2.0)); }

void witness_save(const std::string& path, const RigidityWitness& w) {
    nlohmann::json j;
    j["field"] = field_to_json(w.target.field());
    if (!w.target_name.empty()) j["target_name"] = w.target_name;
    j["target"] = matrix_to_json_inline(w.target);
    j["rank_bound"] = w.rank_bound;
    j["changes"] = w.changes;
    j["U"] = matrix_to_json_inline(w.u);
    j["V"] = matrix_to_json_inline(w.v);
    j["S"] = matrix_to_json_inline(w.s);
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

RigidityWitness witness_load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    RigidityWitness w;
    FieldSpec field = j.contains("field") ? field_from_json(j.at("field")) : FieldSpec::rationals();
    if (j.contains("target_name")) w.target_name = j["target_name"].get<std::string>();
    const auto& t = j.at("target");
    if (t.is_string()) {
        w.target_name = t.get<std::string>();
        w.target = parse_base(w.target_name, field).matrix;
    } else {
        w.target = matrix_from_json_inline(t, field);
    }
    w.rank_bound = j.at("rank_bound").get<std::int64_t>();
    w.changes = j.at("changes").get<std::int64_t>();
    w.u = matrix_from_json_inline(j.at("U"), field);
    w.v = matrix_from_json_inline(j.at("V"), field);
    w.s = matrix_from_json_inline(j.at("S"), field);
    if (w.changes != w.s.nnz()) throw InvalidInputError("witness changes disagree with nnz(S)");
    if (!equals(w.target, add(matmul(w.u, w.v), w.s))) {
        throw InvalidInputError("witness identity target = U x V + S fails");
    }
    return w;
}

Outer1Split outer1_normalize(const SparseMatrix& m) {
    const std::int64_t n = m.rows();
    if (n != m.cols() || n < 1) throw InvalidInputError("outer1_normalize requires a square matrix");
    const FieldSpec field = m.field();
    FieldElement corner = m.get(0, 0);
    if (corner.is_zero()) throw InvalidInputError("outer1_normalize needs m[0,0] != 0");
    std::vector<FieldElement> dl, dr;
    for (std::int64_t i = 0; i < n; ++i) {
        FieldElement e = m.get(i, 0);
        if (e.is_zero()) throw InvalidInputError("outer1_normalize needs a nonzero first column");
        dl.push_back(std::move(e));
    }
    for (std::int64_t j = 0; j < n; ++j) {
        FieldElement e = m.get(0, j);
        if (e.is_zero()) throw InvalidInputError("outer1_normalize needs a nonzero first row");
        dr.push_back(e / corner);
    }
    std::vector<SparseMatrix::Entry> dle, dre, m1e;
    for (std::int64_t i = 0; i < n; ++i) {
        dle.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), dl[i]});
        dre.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), dr[i]});
    }
    for (const auto& e : m.entries()) {
        m1e.push_back({e.row, e.col, e.v / (dl[e.row] * dr[e.col])});
    }
    Outer1Split out;
    out.dl = SparseMatrix::from_triplets(n, n, field, std::move(dle));
    out.dr = SparseMatrix::from_triplets(n, n, field, std::move(dre));
    out.m1 = SparseMatrix::from_triplets(n, n, field, std::move(m1e));
    return out;
}

}  // namespace kroncirc
