#include "gz/qexp.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace gz {

namespace {

constexpr i64 kMaxEtaTrunc = 100000;

// prod (1 - q^{step n}) up to q^T by the pentagonal number theorem
std::vector<i64> euler_product(i64 T, i64 step) {
    std::vector<i64> e(T + 1, 0);
    e[0] = 1;
    for (i64 k = 1;; ++k) {
        i64 sign = (k % 2) ? -1 : 1;
        i64 g1 = step * k * (3 * k - 1) / 2, g2 = step * k * (3 * k + 1) / 2;
        if (g1 > T) break;
        e[g1] += sign;
        if (g2 <= T) e[g2] += sign;
    }
    return e;
}

// product of two series up to q^T, skipping zero coefficients of the second factor
std::vector<i64> mul_series(const std::vector<i64>& a, const std::vector<i64>& b, i64 T) {
    std::vector<i64> out(T + 1, 0);
    for (i64 j = 0; j <= T; ++j) {
        if (!b[j]) continue;
        for (i64 i = 0; i + j <= T; ++i)
            if (a[i]) out[i + j] += a[i] * b[j];
    }
    return out;
}

}  // namespace

QExp QExp::integer(std::vector<i64> coeffs) {
    QExp g;
    g.ring_ = CoeffRing::Integer;
    g.a_ = std::move(coeffs);
    if (g.a_.empty()) g.a_.push_back(0);
    return g;
}

QExp QExp::padic(i64 p, int M, std::vector<i64> coeffs) {
    QExp g;
    g.ring_ = CoeffRing::Padic;
    g.p_ = p;
    g.M_ = M;
    g.mod_ = PadicTrunc(p, M).modulus();
    g.a_ = std::move(coeffs);
    if (g.a_.empty()) g.a_.push_back(0);
    for (auto& x : g.a_) x = mod64(x, g.mod_);
    return g;
}

QExp QExp::zero_padic(i64 p, int M, i64 T) { return padic(p, M, std::vector<i64>(T + 1, 0)); }

i64 QExp::a(i64 n) const {
    if (n < 0 || n > trunc()) throw QExpError("coefficient beyond truncation: " + std::to_string(n));
    return a_[n];
}

PadicTrunc QExp::coeff(i64 n) const {
    if (ring_ != CoeffRing::Padic) throw QExpError("coeff: not a p-adic expansion");
    return PadicTrunc(p_, M_, a(n));
}

QExp QExp::to_padic(i64 p, int M) const {
    if (ring_ == CoeffRing::Padic) {
        if (p != p_ || M > M_) throw QExpError("to_padic: incompatible precision");
        return padic(p, M, a_);
    }
    return padic(p, M, a_);
}

QExp QExp::truncated(i64 T) const {
    if (T > trunc()) throw QExpError("truncated: cannot extend past the truncation");
    QExp g = *this;
    g.a_.resize(T + 1);
    return g;
}

void QExp::check_same_ring(const QExp& o) const {
    if (ring_ != o.ring_ || p_ != o.p_ || M_ != o.M_) throw QExpError("coefficient rings differ");
}

QExp QExp::operator+(const QExp& o) const {
    check_same_ring(o);
    QExp g = *this;
    g.a_.resize(std::min(a_.size(), o.a_.size()));
    for (size_t i = 0; i < g.a_.size(); ++i) {
        g.a_[i] += o.a_[i];
        if (ring_ == CoeffRing::Padic) g.a_[i] = mod64(g.a_[i], mod_);
    }
    return g;
}

QExp QExp::operator-(const QExp& o) const {
    check_same_ring(o);
    QExp g = *this;
    g.a_.resize(std::min(a_.size(), o.a_.size()));
    for (size_t i = 0; i < g.a_.size(); ++i) {
        g.a_[i] -= o.a_[i];
        if (ring_ == CoeffRing::Padic) g.a_[i] = mod64(g.a_[i], mod_);
    }
    return g;
}

QExp QExp::scaled(const PadicTrunc& c) const {
    if (ring_ != CoeffRing::Padic || c.p() != p_ || c.precision() != M_) throw QExpError("scaled: ring mismatch");
    QExp g = *this;
    for (auto& x : g.a_) x = mulmod(x, c.residue(), mod_);
    return g;
}

bool QExp::operator==(const QExp& o) const {
    return ring_ == o.ring_ && p_ == o.p_ && M_ == o.M_ && a_ == o.a_;
}

QExp u_op(const QExp& g, i64 p) {
    i64 T = g.trunc() / p;
    std::vector<i64> a(T + 1);
    for (i64 m = 0; m <= T; ++m) a[m] = g.a(m * p);
    return g.ring() == CoeffRing::Padic ? QExp::padic(g.p(), g.precision(), std::move(a)) : QExp::integer(std::move(a));
}

QExp v_op(const QExp& g, i64 p, i64 cap) {
    i64 T = g.trunc() * p;
    if (cap >= 0) T = std::min(T, cap);
    std::vector<i64> a(T + 1, 0);
    for (i64 m = 0; m * p <= T; ++m) a[m * p] = g.a(m);
    return g.ring() == CoeffRing::Padic ? QExp::padic(g.p(), g.precision(), std::move(a)) : QExp::integer(std::move(a));
}

NewformData::NewformData(i64 level, std::vector<i64> coeffs) : level_(level), a_(std::move(coeffs)) {
    if (a_.size() < 2) throw QExpError("newform needs at least a_1");
    if (a_[1] != 1) throw QExpError("newform not normalized: a_1 != 1");
}

NewformData NewformData::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw QExpError("cannot open newform file " + path);
    std::string line;
    if (!std::getline(in, line)) throw QExpError("newform file is empty");
    std::istringstream hs(line);
    std::string w1, w2;
    i64 level = 0, weight = 0;
    if (!(hs >> w1 >> level >> w2 >> weight) || w1 != "level" || w2 != "weight" || weight != 2)
        throw QExpError("bad newform header: expected \"level N weight 2\"");
    std::vector<i64> a{0};
    i64 n, v;
    while (in >> n >> v) {
        if (n != static_cast<i64>(a.size())) throw QExpError("newform file: indices must be 1, 2, ... in order");
        a.push_back(v);
    }
    if (!in.eof()) throw QExpError("newform file: malformed line after n = " + std::to_string(a.size() - 1));
    NewformData f(level, std::move(a));
    auto bad = f.consistency_failure();
    if (!bad.empty()) throw QExpError("newform file: " + bad);
    return f;
}

i64 NewformData::a(i64 n) const {
    if (n < 1 || n > trunc()) throw QExpError("newform coefficient beyond truncation: " + std::to_string(n));
    return a_[n];
}

std::string NewformData::consistency_failure() const {
    i64 T = trunc();
    for (i64 n = 2; n <= T; ++n) {
        auto fn = factorize(n);
        if (fn.factors.size() > 1) {
            auto [r, e] = fn.factors[0];
            i64 q = ipow(r, static_cast<unsigned>(e));
            if (a_[n] != a_[q] * a_[n / q]) return "multiplicativity fails at n = " + std::to_string(n);
            continue;
        }
        auto [r, e] = fn.factors[0];
        if (e < 2) continue;
        i64 pk = n / r, pk1 = pk / r;
        i64 expect = level_ % r == 0 ? a_[r] * a_[pk] : a_[r] * a_[pk] - r * a_[pk1];
        if (a_[n] != expect) return "Hecke recursion fails at n = " + std::to_string(n);
    }
    return {};
}

NewformData eta_newform_11(i64 T) {
    if (T < 1 || T > kMaxEtaTrunc) throw QExpError("eta_newform_11: truncation out of range");
    // exponents up to T-1 of prod (1-q^n)^2 (1-q^{11n})^2, then shift by q
    i64 S = T - 1;
    auto e1 = euler_product(S, 1), e11 = euler_product(S, 11);
    auto sq1 = mul_series(e1, e1, S), sq11 = mul_series(e11, e11, S);
    auto prod = mul_series(sq1, sq11, S);
    std::vector<i64> a(T + 1, 0);
    for (i64 n = 1; n <= T; ++n) a[n] = prod[n - 1];
    return NewformData(11, std::move(a));
}

PadicTrunc alpha_root(i64 ap, i64 p, int M) {
    if (mod64(ap, p) == 0) throw QExpError("not ordinary");
    PadicTrunc x(p, M, ap), a(p, M, ap), pp(p, M, p);
    // Newton on X^2 - a X + p; the derivative 2X - a is a unit near X = a
    for (int it = 0; it < 2 * M + 2; ++it) {
        PadicTrunc fx = x * x - a * x + pp;
        if (fx.residue() == 0) break;
        x = x - fx / (x + x - a);
    }
    if ((x * x - a * x + pp).residue() != 0) throw QExpError("alpha_root: Hensel lift failed");
    return x;
}

Stabilization stabilize(const NewformData& f, i64 p, int M, i64 T) {
    if (T > f.trunc()) throw QExpError("stabilize: truncation exceeds the newform data");
    if (T < p) throw QExpError("stabilize: truncation must reach q^p");
    Stabilization st{alpha_root(f.a(p), p, M), PadicTrunc(p, M), QExp(), QExp()};
    st.beta = PadicTrunc(p, M, p) / st.alpha;
    QExp g = f.qexp().truncated(T).to_padic(p, M);
    QExp vg = v_op(g, p, T);
    st.f0 = g - vg.scaled(st.beta);
    st.f1 = g - vg.scaled(st.alpha);
    if (st.f0.coeff(p) != st.alpha || st.f1.coeff(p) != st.beta) throw QExpError("stabilize: a_p check failed");
    return st;
}

bool operator==(const SpanElem& a, const SpanElem& b) { return a.c == b.c && a.cv == b.cv; }

OldSpan::OldSpan(const NewformData& f, i64 p, int M)
    : f_(f), p_(p), M_(M), alpha_(alpha_root(f.a(p), p, M)), beta_(PadicTrunc(p, M, p) / alpha_) {
    if (f.level() % p == 0) throw QExpError("OldSpan: p divides the level");
}

SpanElem OldSpan::add(const SpanElem& x, const SpanElem& y) const { return {x.c + y.c, x.cv + y.cv}; }

SpanElem OldSpan::scale(const SpanElem& x, const PadicTrunc& k) const { return {x.c * k, x.cv * k}; }

SpanElem OldSpan::u(const SpanElem& x) const {
    // U f = a_p f - p V f, U V f = f
    return {x.c * ap() + x.cv, -(x.c * lift(p_))};
}

SpanElem OldSpan::t_tilde(const SpanElem& x, i64 m) const {
    if (m < 1 || gcd64(m, f_.level()) != 1) throw QExpError("t_tilde: m must be prime to the level");
    i64 mp = m;
    int k = 0;
    while (mp % p_ == 0) {
        mp /= p_;
        ++k;
    }
    SpanElem y = scale(x, lift(f_.a(mp)));
    for (int i = 0; i < k; ++i) y = u(y);
    return y;
}

std::pair<PadicTrunc, PadicTrunc> OldSpan::eigen(const SpanElem& x) const {
    PadicTrunc c0 = (x.cv + alpha_ * x.c) / (alpha_ - beta_);
    return {c0, x.c - c0};
}

QExp OldSpan::to_qexp(const SpanElem& x, i64 T) const {
    QExp g = f_.qexp().truncated(T).to_padic(p_, M_);
    return g.scaled(x.c) + v_op(g, p_, T).scaled(x.cv);
}

SpanElem OldSpan::fit(const QExp& g) const {
    if (g.ring() != CoeffRing::Padic || g.p() != p_ || g.precision() != M_) throw QExpError("fit: ring mismatch");
    if (g.trunc() < p_) throw QExpError("fit: truncation must reach q^p");
    SpanElem x{g.coeff(1), g.coeff(p_) - g.coeff(1) * ap()};
    if (!(to_qexp(x, g.trunc()) == g)) throw QExpError("not in f-old span");
    return x;
}

std::pair<SpanElem, int> OldSpan::eord(const SpanElem& x, int k_max) const {
    // 2x2 matrix of U on (c, c'), raised to k! incrementally
    using Mat = std::array<PadicTrunc, 4>;
    auto mul = [](const Mat& a, const Mat& b) -> Mat {
        return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3]};
    };
    auto pw = [&](Mat a, i64 e) {
        Mat r{lift(1), lift(0), lift(0), lift(1)};
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    };
    auto apply = [](const Mat& m, const SpanElem& v) -> SpanElem {
        return {m[0] * v.c + m[1] * v.cv, m[2] * v.c + m[3] * v.cv};
    };
    Mat U{ap(), lift(1), -lift(p_), lift(0)};  // column (c, c') -> (a_p c + c', -p c)
    Mat P = U;                                  // U^{1!}
    SpanElem prev = apply(P, x);
    for (int k = 2; k <= k_max; ++k) {
        P = pw(P, k);  // U^{k!}
        SpanElem cur = apply(P, x);
        if (cur == prev) return {cur, k - 1};
        prev = cur;
    }
    throw QExpError("eord: no stabilization by k = " + std::to_string(k_max));
}

PadicTrunc OldSpan::lf(const SpanElem& x) const {
    PadicTrunc one = lift(1);
    PadicTrunc a2 = alpha_ * alpha_;
    return (one - lift(p_) / a2) * (one - one / a2) * eigen(x).first;
}

EordResult eord_truncate(const OldSpan& span, const QExp& g, int k_max) {
    auto [lim, k] = span.eord(span.fit(g), k_max);
    return {span.to_qexp(lim, g.trunc()), k};
}

PadicTrunc lf_functional(const OldSpan& span, const QExp& g) { return span.lf(span.fit(g)); }

}  // namespace gz
