#include "gz/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gz {

i64 gcd64(i64 a, i64 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        i64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

i64 lcm64(i64 a, i64 b) {
    if (a == 0 || b == 0) return 0;
    return checked_narrow(static_cast<i128>(a / gcd64(a, b)) * b);
}

i64 mod64(i64 a, i64 m) {
    if (m < 0) m = -m;
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

i64 mulmod(i64 a, i64 b, i64 m) {
    i128 r = static_cast<i128>(mod64(a, m)) * mod64(b, m) % m;
    return static_cast<i64>(r);
}

i64 powmod(i64 a, i64 e, i64 m) {
    if (e < 0) return powmod(invmod(a, m), -e, m);
    i64 r = 1 % m, b = mod64(a, m);
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
    i64 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i64 q = a / b;
        i64 t = a - q * b;
        a = b;
        b = t;
        t = x0 - q * x1;
        x0 = x1;
        x1 = t;
        t = y0 - q * y1;
        y0 = y1;
        y1 = t;
    }
    if (a < 0) {
        a = -a;
        x0 = -x0;
        y0 = -y0;
    }
    x = x0;
    y = y0;
    return a;
}

i64 invmod(i64 a, i64 m) {
    i64 x, y;
    if (ext_gcd(mod64(a, m), m, x, y) != 1) throw ArithError("not invertible modulo " + std::to_string(m));
    return mod64(x, m);
}

i64 ipow(i64 b, unsigned e) {
    i128 r = 1;
    for (unsigned i = 0; i < e; ++i) r = static_cast<i128>(checked_narrow(r)) * b;
    return checked_narrow(r);
}

i64 isqrt(i64 n) {
    if (n < 0) throw ArithError("isqrt of negative");
    i64 r = static_cast<i64>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && static_cast<i128>(r) * r > n) --r;
    while (static_cast<i128>(r + 1) * (r + 1) <= n) ++r;
    return r;
}

std::optional<i64> exact_sqrt(i64 n) {
    if (n < 0) return std::nullopt;
    i64 r = isqrt(n);
    if (r * r == n) return r;
    return std::nullopt;
}

i64 checked_narrow(i128 v) {
    if (v > std::numeric_limits<i64>::max() || v < std::numeric_limits<i64>::min())
        throw ArithError("integer overflow");
    return static_cast<i64>(v);
}

// ---- Rational

Rational::Rational(i64 n, i64 d) {
    if (d == 0) throw ArithError("zero denominator");
    *this = from128(n, d);
}

Rational Rational::from128(i128 n, i128 d) {
    if (d == 0) throw ArithError("zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    i128 a = n < 0 ? -n : n, b = d;
    while (b) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        n /= a;
        d /= a;
    }
    Rational r;
    r.num_ = checked_narrow(n);
    r.den_ = checked_narrow(d);
    return r;
}

Rational operator+(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return Rational::from128(static_cast<i128>(a.num_) + b.num_, a.den_);
    return Rational::from128(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                             static_cast<i128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
    return Rational::from128(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw ArithError("division by zero");
    return Rational::from128(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

bool operator<(const Rational& a, const Rational& b) {
    return static_cast<i128>(a.num_) * b.den_ < static_cast<i128>(b.num_) * a.den_;
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

// ---- factorization

namespace {

const std::vector<std::int32_t>& spf_table() {
    static const std::vector<std::int32_t> spf = [] {
        std::vector<std::int32_t> t(kSieveLimit + 1, 0);
        for (i64 i = 2; i <= kSieveLimit; ++i) {
            if (t[i]) continue;
            for (i64 j = i; j <= kSieveLimit; j += i)
                if (!t[j]) t[j] = static_cast<std::int32_t>(i);
        }
        return t;
    }();
    return spf;
}

const std::vector<std::int32_t>& prime_list() {
    static const std::vector<std::int32_t> primes = [] {
        std::vector<std::int32_t> out;
        const auto& spf = spf_table();
        for (i64 i = 2; i <= kSieveLimit; ++i)
            if (spf[i] == i) out.push_back(static_cast<std::int32_t>(i));
        return out;
    }();
    return primes;
}

}  // namespace

int Factorization::ord(i64 prime) const {
    for (auto& [q, e] : factors)
        if (q == prime) return e;
    return 0;
}

std::vector<i64> Factorization::primes() const {
    std::vector<i64> out;
    for (auto& f : factors) out.push_back(f.first);
    return out;
}

Factorization factorize(i64 n) {
    if (n < 1) throw ArithError("factorize: argument must be positive");
    if (n > kSieveLimit * kSieveLimit) throw ArithError("factorize: argument beyond sieve range");
    Factorization f;
    f.value = n;
    const auto& spf = spf_table();
    if (n <= kSieveLimit) {
        while (n > 1) {
            i64 q = spf[n];
            int e = 0;
            while (n % q == 0) {
                n /= q;
                ++e;
            }
            f.factors.emplace_back(q, e);
        }
        return f;
    }
    for (i64 q : prime_list()) {
        if (q * q > n) break;
        if (n % q) continue;
        int e = 0;
        while (n % q == 0) {
            n /= q;
            ++e;
        }
        f.factors.emplace_back(q, e);
        if (n <= kSieveLimit) {
            Factorization rest = factorize(n);
            f.factors.insert(f.factors.end(), rest.factors.begin(), rest.factors.end());
            return f;
        }
    }
    if (n > 1) f.factors.emplace_back(n, 1);
    return f;
}

bool is_prime(i64 n) {
    if (n < 2) return false;
    if (n <= kSieveLimit) return spf_table()[n] == n;
    auto f = factorize(n);
    return f.factors.size() == 1 && f.factors[0].second == 1;
}

int ord_p(i64 n, i64 p) {
    if (n == 0) throw ArithError("ord of zero");
    int e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

std::vector<i64> divisors(i64 n) {
    std::vector<i64> out{1};
    for (auto [q, e] : factorize(n).factors) {
        size_t sz = out.size();
        i64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= q;
            for (size_t i = 0; i < sz; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

i64 sigma1(i64 n) {
    i64 s = 1;
    for (auto [q, e] : factorize(n).factors) {
        i64 t = 1, pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= q;
            t += pk;
        }
        s *= t;
    }
    return s;
}

i64 totient(i64 n) {
    i64 r = n;
    for (auto [q, e] : factorize(n).factors) r = r / q * (q - 1);
    return r;
}

// ---- Kronecker symbol

int kronecker_symbol(i64 a, i64 n) {
    if (n == 0) {
        if (a == 1 || a == -1) return 1;
        throw ArithError("undefined symbol");
    }
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    int v = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++v;
    }
    if (v > 0) {
        if (a % 2 == 0) return 0;
        i64 r8 = mod64(a, 8);
        if ((v & 1) && (r8 == 3 || r8 == 5)) result = -result;
    }
    // Jacobi symbol (a/n), n odd positive
    i64 x = mod64(a, n);
    while (x != 0) {
        while (x % 2 == 0) {
            x /= 2;
            i64 r8 = n % 8;
            if (r8 == 3 || r8 == 5) result = -result;
        }
        std::swap(x, n);
        if (x % 4 == 3 && n % 4 == 3) result = -result;
        x %= n;
    }
    return n == 1 ? result : 0;
}

// ---- square roots

namespace {

i64 sqrt_mod_prime(i64 a, i64 r) {
    a = mod64(a, r);
    if (r % 4 == 3) return powmod(a, (r + 1) / 4, r);
    // Tonelli-Shanks
    i64 q = r - 1;
    int s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    i64 z = 2;
    while (kronecker_symbol(z, r) != -1) ++z;
    i64 m = s, c = powmod(z, q, r), t = powmod(a, q, r), x = powmod(a, (q + 1) / 2, r);
    while (t != 1) {
        i64 i = 0, tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, r);
            ++i;
        }
        i64 b = c;
        for (i64 j = 0; j < m - i - 1; ++j) b = mulmod(b, b, r);
        m = i;
        c = mulmod(b, b, r);
        t = mulmod(t, c, r);
        x = mulmod(x, b, r);
    }
    return x;
}

}  // namespace

std::optional<i64> hensel_sqrt(i64 a, i64 r, int k) {
    if (r < 3 || r % 2 == 0 || !is_prime(r)) throw ArithError("hensel_sqrt: modulus must be an odd prime");
    if (k < 1) throw ArithError("hensel_sqrt: exponent must be positive");
    if (mod64(a, r) == 0) throw ArithError("non-unit argument");
    if (kronecker_symbol(a, r) != 1) return std::nullopt;
    i64 x = sqrt_mod_prime(a, r);
    if (x > (r - 1) / 2) x = r - x;
    i64 mod = r;
    for (int j = 1; j < k; ++j) {
        mod = checked_narrow(static_cast<i128>(mod) * r);
        // x <- x - (x^2 - a)/(2x)
        i64 fx = mod64(mulmod(x, x, mod) - mod64(a, mod), mod);
        x = mod64(x - mulmod(fx, invmod(mod64(2 * x, mod), mod), mod), mod);
    }
    return x;
}

std::vector<std::pair<i64, i64>> form_representations(i64 A, i64 B, i64 C, i64 n) {
    i64 disc = checked_narrow(static_cast<i128>(B) * B - static_cast<i128>(4) * A * C);
    if (A <= 0 || disc >= 0) throw ArithError("form not positive definite");
    if (n < 0) throw ArithError("form_representations: negative target");
    std::vector<std::pair<i64, i64>> out;
    if (n == 0) {
        out.emplace_back(0, 0);
        return out;
    }
    // 4An = (2Ax + By)^2 + |disc| y^2
    i128 fourAn = static_cast<i128>(4) * A * n;
    i64 ymax = isqrt(checked_narrow(fourAn / (-disc)));
    for (i64 y = -ymax; y <= ymax; ++y) {
        i128 rest = fourAn + static_cast<i128>(disc) * y * y;
        if (rest < 0) continue;
        auto sq = exact_sqrt(checked_narrow(rest));
        if (!sq) continue;
        for (i64 sgn : {-1, 1}) {
            i64 num = sgn * *sq - B * y;
            if (num % (2 * A) != 0) continue;
            out.emplace_back(num / (2 * A), y);
            if (*sq == 0) break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- PadicTrunc

PadicTrunc::PadicTrunc(i64 p, int M, i64 value) : p_(p), M_(M) {
    if (p < 2 || M < 1) throw ArithError("PadicTrunc: bad prime or precision");
    i128 m = 1;
    for (int i = 0; i < M; ++i) {
        m *= p;
        if (m > (static_cast<i128>(1) << 62)) throw ArithError("PadicTrunc: modulus too large");
    }
    mod_ = static_cast<i64>(m);
    r_ = mod64(value, mod_);
}

void PadicTrunc::check_compatible(const PadicTrunc& o) const {
    if (p_ != o.p_ || M_ != o.M_) throw ArithError("PadicTrunc: mismatched prime or precision");
}

int PadicTrunc::valuation() const {
    if (r_ == 0) return M_;
    return ord_p(r_, p_);
}

PadicTrunc PadicTrunc::operator+(const PadicTrunc& o) const {
    check_compatible(o);
    return lift(r_ + o.r_ - mod_);
}

PadicTrunc PadicTrunc::operator-(const PadicTrunc& o) const {
    check_compatible(o);
    return lift(r_ - o.r_);
}

PadicTrunc PadicTrunc::operator-() const { return lift(-r_); }

PadicTrunc PadicTrunc::operator*(const PadicTrunc& o) const {
    check_compatible(o);
    return lift(mulmod(r_, o.r_, mod_));
}

PadicTrunc PadicTrunc::inverse() const {
    if (!is_unit()) throw ArithError("PadicTrunc: inverse of non-unit");
    return lift(invmod(r_, mod_));
}

PadicTrunc PadicTrunc::pow(i64 e) const {
    if (e < 0) return inverse().pow(-e);
    return lift(powmod(r_, e, mod_));
}

bool PadicTrunc::operator==(const PadicTrunc& o) const {
    return p_ == o.p_ && M_ == o.M_ && r_ == o.r_;
}

// ---- FormalLogSum

FormalLogSum FormalLogSum::log_of(i64 n) {
    FormalLogSum s;
    if (n == 1) return s;
    for (auto [q, e] : factorize(n).factors) s.add(q, Rational(e));
    return s;
}

FormalLogSum FormalLogSum::term(i64 prime, const Rational& c) {
    FormalLogSum s;
    s.add(prime, c);
    return s;
}

Rational FormalLogSum::coeff(i64 prime) const {
    auto it = c_.find(prime);
    return it == c_.end() ? Rational(0) : it->second;
}

bool FormalLogSum::is_integral() const {
    return std::all_of(c_.begin(), c_.end(), [](auto& kv) { return kv.second.is_integer(); });
}

void FormalLogSum::add(i64 prime, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = c_.emplace(prime, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) c_.erase(it);
    }
}

FormalLogSum& FormalLogSum::operator+=(const FormalLogSum& o) {
    for (auto& [q, c] : o.c_) add(q, c);
    return *this;
}

FormalLogSum& FormalLogSum::operator-=(const FormalLogSum& o) {
    for (auto& [q, c] : o.c_) add(q, -c);
    return *this;
}

FormalLogSum FormalLogSum::operator+(const FormalLogSum& o) const {
    FormalLogSum r = *this;
    return r += o;
}

FormalLogSum FormalLogSum::operator-(const FormalLogSum& o) const {
    FormalLogSum r = *this;
    return r -= o;
}

FormalLogSum FormalLogSum::operator-() const { return scaled(Rational(-1)); }

FormalLogSum FormalLogSum::scaled(const Rational& k) const {
    FormalLogSum r;
    for (auto& [q, c] : c_) r.add(q, c * k);
    return r;
}

std::string FormalLogSum::str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [q, c] : c_) {
        if (!first) os << " + ";
        first = false;
        os << c.str() << "*log(" << q << ")";
    }
    return os.str();
}

}  // namespace gz
