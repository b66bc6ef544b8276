#include "kroncirc/field.hpp"

#include <charconv>

namespace kroncirc {

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, p);
        a = mulmod_u64(a, a, p);
        e >>= 1;
    }
    return r;
}

std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t p) {
    a %= p;
    if (a == 0) throw InvalidInputError("division by zero in GF(" + std::to_string(p) + ")");
    return powmod_u64(a, p - 2, p);
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // This witness set is exact for every n < 2^64.
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < s - 1; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

FieldSpec FieldSpec::prime(std::uint64_t p) {
    if (p >= (1ull << 63)) throw InvalidInputError("prime modulus must be < 2^63");
    if (!is_prime_u64(p)) throw InvalidInputError("modulus " + std::to_string(p) + " is not prime");
    return FieldSpec{FieldKind::prime, p};
}

std::string FieldSpec::label() const {
    if (kind == FieldKind::rational) return "Q";
    return "GF" + std::to_string(modulus);
}

FieldSpec FieldSpec::parse_label(std::string_view s) {
    if (s == "Q") return rationals();
    if (s.size() > 2 && s.substr(0, 2) == "GF") {
        std::uint64_t p = 0;
        auto body = s.substr(2);
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), p);
        if (ec == std::errc() && ptr == body.data() + body.size()) return prime(p);
    }
    throw InvalidInputError("unrecognized field label: " + std::string(s));
}

FieldElement FieldElement::zero(const FieldSpec& f) {
    return f.kind == FieldKind::rational ? rational(Rat(0)) : prime(0, f.modulus);
}

FieldElement FieldElement::one(const FieldSpec& f) {
    return f.kind == FieldKind::rational ? rational(Rat(1)) : prime(1, f.modulus);
}

FieldElement FieldElement::from_int(const FieldSpec& f, long long n) {
    if (f.kind == FieldKind::rational) return rational(Rat(n));
    std::uint64_t p = f.modulus;
    std::uint64_t r = static_cast<std::uint64_t>(((n % static_cast<long long>(p)) + static_cast<long long>(p))) % p;
    return prime(r, p);
}

FieldElement FieldElement::from_bigint(const FieldSpec& f, const BigInt& n) {
    if (f.kind == FieldKind::rational) return rational(Rat(n));
    BigInt p(f.modulus);
    BigInt r = n % p;
    if (r < 0) r += p;
    return prime(r.convert_to<std::uint64_t>(), f.modulus);
}

FieldSpec FieldElement::spec() const {
    if (std::holds_alternative<Rat>(val_)) return FieldSpec::rationals();
    return FieldSpec{FieldKind::prime, std::get<PrimeVal>(val_).p};
}

bool FieldElement::is_zero() const {
    if (auto* r = std::get_if<Rat>(&val_)) return *r == 0;
    return std::get<PrimeVal>(val_).v == 0;
}

bool FieldElement::is_one() const {
    if (auto* r = std::get_if<Rat>(&val_)) return *r == 1;
    return std::get<PrimeVal>(val_).v == 1 % std::get<PrimeVal>(val_).p;
}

const Rat& FieldElement::rat() const {
    if (auto* r = std::get_if<Rat>(&val_)) return *r;
    throw FieldMismatchError("rational value requested from a prime-field element");
}

std::uint64_t FieldElement::residue() const {
    if (auto* pv = std::get_if<PrimeVal>(&val_)) return pv->v;
    throw FieldMismatchError("residue requested from a rational element");
}

void FieldElement::check_same(const FieldElement& o) const {
    if (!(spec() == o.spec())) {
        throw FieldMismatchError("field mismatch: " + spec().label() + " vs " + o.spec().label());
    }
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
    check_same(o);
    if (auto* r = std::get_if<Rat>(&val_)) return rational(*r + std::get<Rat>(o.val_));
    auto a = std::get<PrimeVal>(val_), b = std::get<PrimeVal>(o.val_);
    std::uint64_t s = a.v + b.v;  // p < 2^63, no overflow
    if (s >= a.p) s -= a.p;
    return prime(s, a.p);
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
    check_same(o);
    if (auto* r = std::get_if<Rat>(&val_)) return rational(*r - std::get<Rat>(o.val_));
    auto a = std::get<PrimeVal>(val_), b = std::get<PrimeVal>(o.val_);
    return prime(a.v >= b.v ? a.v - b.v : a.v + a.p - b.v, a.p);
}

FieldElement FieldElement::operator*(const FieldElement& o) const {
    check_same(o);
    if (auto* r = std::get_if<Rat>(&val_)) return rational(*r * std::get<Rat>(o.val_));
    auto a = std::get<PrimeVal>(val_), b = std::get<PrimeVal>(o.val_);
    return prime(mulmod_u64(a.v, b.v, a.p), a.p);
}

FieldElement FieldElement::operator/(const FieldElement& o) const {
    return *this * o.inverse();
}

FieldElement FieldElement::operator-() const {
    if (auto* r = std::get_if<Rat>(&val_)) return rational(-*r);
    auto a = std::get<PrimeVal>(val_);
    return prime(a.v == 0 ? 0 : a.p - a.v, a.p);
}

bool FieldElement::operator==(const FieldElement& o) const {
    return val_ == o.val_;
}

FieldElement FieldElement::inverse() const {
    if (auto* r = std::get_if<Rat>(&val_)) {
        if (*r == 0) throw InvalidInputError("division by zero");
        return rational(1 / *r);
    }
    auto a = std::get<PrimeVal>(val_);
    return prime(invmod_u64(a.v, a.p), a.p);
}

FieldElement FieldElement::pow(long long e) const {
    if (e < 0) return inverse().pow(-e);
    if (auto* r = std::get_if<Rat>(&val_)) {
        Rat acc(1), b = *r;
        unsigned long long k = static_cast<unsigned long long>(e);
        while (k) {
            if (k & 1) acc *= b;
            b *= b;
            k >>= 1;
        }
        return rational(acc);
    }
    auto a = std::get<PrimeVal>(val_);
    return prime(powmod_u64(a.v, static_cast<std::uint64_t>(e), a.p), a.p);
}

std::string FieldElement::str() const {
    if (auto* r = std::get_if<Rat>(&val_)) {
        std::string s = numerator(*r).str();
        if (denominator(*r) != 1) s += "/" + denominator(*r).str();
        return s;
    }
    return std::to_string(std::get<PrimeVal>(val_).v);
}

FieldElement FieldElement::parse(const FieldSpec& f, std::string_view s) {
    auto bad = [&] { return InvalidInputError("malformed value: '" + std::string(s) + "'"); };
    if (s.empty()) throw bad();
    std::string_view num = s, den;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        num = s.substr(0, slash);
        den = s.substr(slash + 1);
        if (num.empty() || den.empty()) throw bad();
    }
    auto parse_int = [&](std::string_view t) -> BigInt {
        bool neg = false;
        if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
            neg = t[0] == '-';
            t = t.substr(1);
        }
        if (t.empty()) throw bad();
        BigInt v = 0;
        for (char c : t) {
            if (c < '0' || c > '9') throw bad();
            v = v * 10 + (c - '0');
        }
        return neg ? -v : v;
    };
    BigInt n = parse_int(num);
    BigInt d = den.empty() ? BigInt(1) : parse_int(den);
    if (d == 0) throw InvalidInputError("zero denominator in '" + std::string(s) + "'");
    if (f.kind == FieldKind::rational) return rational(Rat(n, d));
    return from_bigint(f, n) / from_bigint(f, d);
}

}  // namespace kroncirc
