#include "gz/lfun.hpp"

#include <sstream>

namespace gz {

namespace {

// norms scanned when testing the genus hypothesis: target + k*Dp for k < kScanSteps
constexpr i64 kScanSteps = 4000;

i64 smallest_norm_coprime(const IdealCounter& counter, int cls, i64 m) {
    for (i64 v = 1; v < kScanSteps * m; ++v)
        if (gcd64(v, m) == 1 && counter.r(cls, v) > 0) return v;
    throw QuadError("auxiliary ideal not found");
}

}  // namespace

int aux_class(const PicGroup& g, i64 target, i64 modulus, int rank) {
    IdealCounter counter(std::shared_ptr<const PicGroup>(&g, [](const PicGroup*) {}));
    i64 v = mod64(target, modulus);
    if (v == 0) v = modulus;
    int seen = 0;
    for (i64 k = 0; k < kScanSteps; ++k, v += modulus) {
        if (v % g.order().setting.p == 0) continue;
        for (auto [cls, cnt] : counter.classes_of_norm(v)) {
            (void)cnt;
            if (seen++ == rank) return cls;
        }
    }
    throw QuadError("auxiliary ideal not found");
}

SigmaContext::SigmaContext(const QuadSetting& st, int s, int a_index, int aux_rank)
    : st_(st),
      s_(s),
      a_(a_index),
      aux_rank_(aux_rank),
      pic_(pic_group(QuadOrder{st, s})),
      counter_(pic_),
      mu_(std::make_shared<std::mutex>()),
      c_cache_(std::make_shared<std::map<i64, int>>()),
      hyp_cache_(std::make_shared<std::map<std::pair<int, i64>, i64>>()) {
    if (s < 1) throw QuadError("SigmaContext: s must be at least 1");
    if (a_ < 0 || a_ >= pic_->size()) throw QuadError("SigmaContext: class index out of range");
    ds_ = pic_->index_of(ds_class(QuadOrder{st, s}));
    a_norm_ = smallest_norm_coprime(counter_, a_, -st.D * st.p);
    auto nc = counter_.classes_of_norm(st.N);
    if (static_cast<int>(nc.size()) <= aux_rank) throw QuadError("SigmaContext: no ideal of norm N");
    auto it = nc.begin();
    std::advance(it, aux_rank);
    n_cls_ = it->first;
}

SigmaContext SigmaContext::for_class(const QuadSetting& st, int s, const Form& a, int aux_rank) {
    auto g = pic_group(QuadOrder{st, s});
    return SigmaContext(st, s, g->index_of(reduce(a)), aux_rank);
}

SigmaContext SigmaContext::with_class(int a_index) const {
    SigmaContext c = *this;
    c.a_ = a_index;
    c.a_norm_ = smallest_norm_coprime(counter_, a_index, Dp());
    return c;
}

int SigmaContext::c_class(i64 ell) const {
    i64 target = mod64(-ell, Dp());
    std::lock_guard lk(*mu_);
    auto it = c_cache_->find(target);
    if (it != c_cache_->end()) return it->second;
    int c = aux_class(*pic_, target, Dp(), aux_rank_);
    c_cache_->emplace(target, c);
    return c;
}

int epsilon_factor(const SigmaContext& ctx, i64 n, i64 d) {
    if (n < 1 || d < 1 || n % d) throw QuadError("epsilon_factor: d must divide n");
    const QuadSetting& st = ctx.setting();
    i64 e = n / d;
    if (gcd64(gcd64(d, e), st.D) != 1) return 0;
    i64 D2 = 1;
    for (i64 r : st.d_primes())
        if (d % r == 0) D2 *= (r % 4 == 1) ? r : -r;
    i64 D1 = st.D / D2;
    return kronecker_symbol(D1, d) * kronecker_symbol(D2, -st.N * e) * ctx.genus_char(D1);
}

FormalLogSum sigma_prime(const SigmaContext& ctx, i64 n) {
    if (n < 1 || n % ctx.setting().p == 0) throw QuadError("sigma_prime: n must be positive and prime to p");
    Factorization fn = factorize(n);
    FormalLogSum out;
    for (i64 d : divisors(n)) {
        int e = epsilon_factor(ctx, n, d);
        if (!e) continue;
        for (auto [ell, k] : fn.factors) {
            i64 c = k - 2 * ord_p(d, ell);
            if (c) out.add(ell, Rational(e * c));
        }
    }
    return out;
}

bool genus_hypothesis(const SigmaContext& ctx, i64 n, std::string* witness) {
    const QuadSetting& st = ctx.setting();
    i64 Dp = ctx.Dp();
    i64 target = mod64(-n * st.N, Dp);
    i64 start = target == 0 ? Dp : target;
    i64 found = -1;
    {
        std::lock_guard lk(*ctx.mu_);
        auto it = ctx.hyp_cache_->find({ctx.a(), target});
        if (it != ctx.hyp_cache_->end()) found = it->second;
    }
    if (found < 0) {
        found = 0;
        i64 v = start;
        for (i64 k = 0; k < kScanSteps; ++k, v += Dp)
            if (ctx.counter().r(ctx.a(), v) > 0) {
                found = v;
                break;
            }
        std::lock_guard lk(*ctx.mu_);
        ctx.hyp_cache_->emplace(std::make_pair(ctx.a(), target), found);
    }
    if (found) {
        if (witness) *witness = "norm " + std::to_string(found);
        return true;
    }
    if (witness) {
        std::ostringstream os;
        os << "class " << ctx.pic().form(ctx.a()).str() << " n=" << n << ": no ideal with norm = " << target
           << " mod " << Dp << " below " << start + kScanSteps * Dp;
        *witness = os.str();
    }
    return false;
}

ClosedForm sigma_prime_closed(const SigmaContext& ctx, i64 n) {
    const QuadSetting& st = ctx.setting();
    if (n < 1 || n % st.p == 0) throw QuadError("sigma_prime_closed: n must be positive and prime to p");
    ClosedForm out;
    out.hypothesis = genus_hypothesis(ctx, n, &out.witness);
    if (!out.hypothesis) return out;
    const PicGroup& g = ctx.pic();
    Factorization fn = factorize(n);
    i64 delta = delta_of(n, st.D);
    for (auto [ell, k] : fn.factors) {
        int e = st.eps(ell);
        if (e == 1) continue;
        i64 mult = (e == -1) ? 1 + k : k;
        int cls = g.mul(ctx.a(), g.mul(ctx.n_class(), ctx.c_class(ell)));
        i64 R = ctx.counter().R(cls, n / ell);
        if (R) out.value.add(ell, Rational(mult * delta * R));
    }
    return out;
}

FormalLogSum g_coeff(const SigmaContext& ctx, i64 m) {
    const QuadSetting& st = ctx.setting();
    if (m < 1 || m % st.p) throw QuadError("g_coeff: m must be a positive multiple of p");
    const PicGroup& g = ctx.pic();
    int ad = g.mul(ctx.a(), ctx.ds());
    i64 top = m * -st.D;
    FormalLogSum out;
    for (i64 n = 1; n * st.N < top; ++n) {
        if (n % st.p == 0) continue;
        i64 r = ctx.counter().r(ad, top - n * st.N);
        if (r) out -= sigma_prime(ctx, n).scaled(Rational(r));
    }
    return out;
}

FormalLogSum g_coeff_twisted_closed(const SigmaContext& ctx, i64 m) {
    const QuadSetting& st = ctx.setting();
    if (m < 1 || m % st.p) throw QuadError("g_coeff_twisted_closed: m must be a positive multiple of p");
    // sigma' only sees a through genus characters of O_K, which are trivial on d_s
    i64 top = m * -st.D;
    FormalLogSum out;
    for (i64 n = 1; n * st.N < top; ++n) {
        if (n % st.p == 0) continue;
        i64 r = ctx.counter().r(ctx.a(), top - n * st.N);
        if (!r) continue;
        ClosedForm c = sigma_prime_closed(ctx, n);
        if (!c.hypothesis) throw QuadError("g_coeff_twisted_closed: genus hypothesis fails: " + c.witness);
        out -= c.value.scaled(Rational(r));
    }
    return out;
}

}  // namespace gz
