#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

namespace kroncirc {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract inputs (CLI exit code 2).
struct InvalidInputError : Error {
    using Error::Error;
};

struct FieldMismatchError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

struct DimensionError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

// Resource cap hit (CLI exit code 3); carries whatever progress was made.
struct CapExceededError : Error {
    std::uint64_t reached = 0;
    std::uint64_t cap = 0;
    CapExceededError(const std::string& what, std::uint64_t reached_, std::uint64_t cap_)
        : Error(what), reached(reached_), cap(cap_) {}
};

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime_u64(std::uint64_t n);

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t p);
std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t p);
std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t p);

enum class FieldKind { rational, prime };

struct FieldSpec {
    FieldKind kind = FieldKind::rational;
    std::uint64_t modulus = 0;  // 0 for rationals

    static FieldSpec rationals() { return FieldSpec{FieldKind::rational, 0}; }
    static FieldSpec prime(std::uint64_t p);

    bool operator==(const FieldSpec&) const = default;

    // "Q" or "GF<p>" (e.g. "GF5"), the form used by the SMX header.
    std::string label() const;
    static FieldSpec parse_label(std::string_view s);
};

// Exact scalar: arbitrary-precision rational or residue mod a prime < 2^63.
class FieldElement {
  public:
    FieldElement() : val_(Rat(0)) {}

    static FieldElement rational(Rat r) { return FieldElement(std::move(r)); }
    static FieldElement rational(long long n) { return FieldElement(Rat(n)); }
    static FieldElement prime(std::uint64_t v, std::uint64_t p) {
        return FieldElement(PrimeVal{v % p, p});
    }
    static FieldElement zero(const FieldSpec& f);
    static FieldElement one(const FieldSpec& f);
    // Image of a signed integer in the field.
    static FieldElement from_int(const FieldSpec& f, long long n);
    static FieldElement from_bigint(const FieldSpec& f, const BigInt& n);

    FieldSpec spec() const;
    bool is_zero() const;
    bool is_one() const;

    // Rational accessor; throws on prime-field elements.
    const Rat& rat() const;
    std::uint64_t residue() const;

    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator*(const FieldElement& o) const;
    FieldElement operator/(const FieldElement& o) const;
    FieldElement operator-() const;
    FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
    FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
    FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }
    bool operator==(const FieldElement& o) const;
    bool operator!=(const FieldElement& o) const { return !(*this == o); }

    FieldElement inverse() const;
    // Integer power; negative exponents require invertibility.
    FieldElement pow(long long e) const;

    // Canonical form: lowest terms with positive denominator, "n" or "n/d";
    // prime residues as a decimal in [0, p).
    std::string str() const;
    static FieldElement parse(const FieldSpec& f, std::string_view s);

  private:
    struct PrimeVal {
        std::uint64_t v;
        std::uint64_t p;
        bool operator==(const PrimeVal&) const = default;
    };
    explicit FieldElement(Rat r) : val_(std::move(r)) {}
    explicit FieldElement(PrimeVal pv) : val_(pv) {}
    void check_same(const FieldElement& o) const;

    std::variant<Rat, PrimeVal> val_;
};

}  // namespace kroncirc
