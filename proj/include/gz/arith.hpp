#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gz {

using i64 = std::int64_t;
using i128 = __int128;

struct ArithError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

i64 gcd64(i64 a, i64 b);
i64 lcm64(i64 a, i64 b);
// floor-mod, result in [0, |m|)
i64 mod64(i64 a, i64 m);
i64 mulmod(i64 a, i64 b, i64 m);
i64 powmod(i64 a, i64 e, i64 m);
// inverse of a mod m; throws if not a unit
i64 invmod(i64 a, i64 m);
// g = gcd(a,b) = x*a + y*b
i64 ext_gcd(i64 a, i64 b, i64& x, i64& y);
i64 ipow(i64 b, unsigned e);
// exact integer square root when n is a perfect square
std::optional<i64> exact_sqrt(i64 n);
i64 isqrt(i64 n);
i64 checked_narrow(i128 v);

// Exact rational on 64-bit numerator/denominator, products formed in 128 bits.
class Rational {
public:
    Rational() = default;
    Rational(i64 n) : num_(n) {}
    Rational(i64 n, i64 d);

    i64 num() const { return num_; }
    i64 den() const { return den_; }
    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    Rational operator-() const { return Rational(-num_, den_); }
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend bool operator<(const Rational& a, const Rational& b);

    std::string str() const;

private:
    static Rational from128(i128 n, i128 d);
    i64 num_ = 0;
    i64 den_ = 1;
};

struct Factorization {
    i64 value = 1;
    std::vector<std::pair<i64, int>> factors;

    int ord(i64 prime) const;
    std::vector<i64> primes() const;
};

constexpr i64 kSieveLimit = 1000000;

// Trial division against the sieve; complete for n <= kSieveLimit^2.
Factorization factorize(i64 n);
bool is_prime(i64 n);
int ord_p(i64 n, i64 p);
std::vector<i64> divisors(i64 n);
i64 sigma1(i64 n);
i64 totient(i64 n);

int kronecker_symbol(i64 a, i64 n);

// Square root of a mod r^k; nullopt when a is a non-residue mod r.
std::optional<i64> hensel_sqrt(i64 a, i64 r, int k);

std::vector<std::pair<i64, i64>> form_representations(i64 A, i64 B, i64 C, i64 n);

class PadicTrunc {
public:
    PadicTrunc(i64 p, int M, i64 value = 0);

    i64 p() const { return p_; }
    int precision() const { return M_; }
    i64 modulus() const { return mod_; }
    i64 residue() const { return r_; }
    bool is_unit() const { return r_ % p_ != 0; }
    // p-adic valuation of the residue, M for zero
    int valuation() const;

    PadicTrunc operator+(const PadicTrunc& o) const;
    PadicTrunc operator-(const PadicTrunc& o) const;
    PadicTrunc operator-() const;
    PadicTrunc operator*(const PadicTrunc& o) const;
    PadicTrunc inverse() const;
    PadicTrunc operator/(const PadicTrunc& o) const { return *this * o.inverse(); }
    PadicTrunc pow(i64 e) const;
    PadicTrunc& operator+=(const PadicTrunc& o) { return *this = *this + o; }
    PadicTrunc& operator-=(const PadicTrunc& o) { return *this = *this - o; }
    PadicTrunc& operator*=(const PadicTrunc& o) { return *this = *this * o; }
    bool operator==(const PadicTrunc& o) const;
    bool operator!=(const PadicTrunc& o) const { return !(*this == o); }

    PadicTrunc lift(i64 v) const { return PadicTrunc(p_, M_, v); }

private:
    void check_compatible(const PadicTrunc& o) const;
    i64 p_;
    int M_;
    i64 mod_;
    i64 r_;
};

// Sum of c_l * log(l) over primes l, kept symbolic.
class FormalLogSum {
public:
    FormalLogSum() = default;

    static FormalLogSum log_of(i64 n);
    static FormalLogSum term(i64 prime, const Rational& c);

    const std::map<i64, Rational>& coeffs() const { return c_; }
    Rational coeff(i64 prime) const;
    bool is_zero() const { return c_.empty(); }
    bool is_integral() const;

    void add(i64 prime, const Rational& c);
    FormalLogSum& operator+=(const FormalLogSum& o);
    FormalLogSum& operator-=(const FormalLogSum& o);
    FormalLogSum operator+(const FormalLogSum& o) const;
    FormalLogSum operator-(const FormalLogSum& o) const;
    FormalLogSum operator-() const;
    FormalLogSum scaled(const Rational& k) const;
    bool operator==(const FormalLogSum& o) const { return c_ == o.c_; }

    std::string str() const;

private:
    std::map<i64, Rational> c_;
};

}  // namespace gz
