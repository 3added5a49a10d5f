#include "gz/quat.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <tuple>
#include <unordered_map>

namespace gz {

namespace {

constexpr i64 kQSearchLimit = 100000000;

struct LatVec {
    i64 x, y, val;
};

// all nonzero (x, y) with 0 < f(x, y) <= bound
std::vector<LatVec> lattice_vectors(const Form& f, i64 bound) {
    std::vector<LatVec> out;
    if (bound <= 0) return out;
    i64 disc = f.disc();
    i64 ymax = isqrt(checked_narrow(static_cast<i128>(4) * f.a * bound / -disc));
    for (i64 y = -ymax; y <= ymax; ++y) {
        i128 rest = static_cast<i128>(4) * f.a * bound + static_cast<i128>(disc) * y * y;
        if (rest < 0) continue;
        i64 sq = isqrt(checked_narrow(rest));
        i64 lo = (-f.b * y - sq) / (2 * f.a) - 1, hi = (-f.b * y + sq) / (2 * f.a) + 1;
        for (i64 x = lo; x <= hi; ++x) {
            i64 v = f.eval(x, y);
            if (v > 0 && v <= bound) out.push_back({x, y, v});
        }
    }
    return out;
}

int ord_rational(const Rational& r, i64 ell) {
    if (r.is_zero()) throw QuadError("valuation of zero");
    return ord_p(std::abs(r.num()), ell) - ord_p(r.den(), ell);
}

// x + y/2 mod M for x + y omega with denominators prime to M
i64 rho(const KElem& e, i64 M) {
    auto red = [M](const Rational& r) { return mulmod(mod64(r.num(), M), invmod(mod64(r.den(), M), M), M); };
    return mod64(red(e.x) + mulmod(red(e.y), invmod(2, M), M), M);
}

KElem kscale(const KElem& e, i64 k) { return KElem{e.x * Rational(k), e.y * Rational(k)}; }
KElem kadd(const KElem& a, const KElem& b) { return KElem{a.x + b.x, a.y + b.y}; }

// a prime of O_f above the prime r (r split or ramified in K, r prime to f)
FracIdeal prime_above(i64 D, i64 f, i64 r) {
    i64 disc = D * f * f;
    i64 B;
    if (r == 2) {
        if (mod64(disc, 8) != 1) throw QuadError("prime_above: 2 does not split");
        B = 1;
    } else if (mod64(disc, r) == 0) {
        B = r;
    } else {
        auto root = hensel_sqrt(mod64(disc, r), r, 1);
        if (!root) throw QuadError("prime_above: inert prime");
        B = *root;
        if (mod64(B - disc, 2)) B += r;
    }
    i128 num = static_cast<i128>(B) * B - disc;
    return FracIdeal::from_form(D, Form{r, B, checked_narrow(num / (4 * r))});
}

// proper integral ideal of norm n = product of split/ramified primes
FracIdeal ideal_of_norm(i64 D, i64 f, i64 n) {
    FracIdeal out = FracIdeal::order(D, f);
    for (auto [r, e] : factorize(n).factors) {
        FracIdeal P = prime_above(D, f, r);
        for (int i = 0; i < e; ++i) out = out * P;
    }
    return out;
}

FracIdeal smallest_coprime_ideal(const IdealClass& cls, i64 m, int rank) {
    i64 bound = 4 * -cls.order.disc() + 64;
    for (int tries = 0; tries < 12; ++tries, bound *= 4) {
        try {
            return find_ideal_in_class(cls, bound, [m](i64 v) { return gcd64(v, m) == 1; }, rank).second;
        } catch (const QuadError&) {
        }
    }
    throw QuadError("auxiliary ideal not found");
}

i64 as_integer(const Rational& r, const char* what) {
    if (!r.is_integer()) throw QuadError(std::string(what) + " is not an integer");
    return r.num();
}

FracIdeal alpha_lattice(const EichlerContext& c) { return c.l_ideal * c.a_ideal; }

// n q^{-1} g gbar^{-1} abar
FracIdeal beta_base(const EichlerContext& c) {
    return c.n_ideal * c.q_ideal.inverse() * c.g_ideal * c.g_ideal.conj().inverse() * c.a_ideal.conj();
}

FracIdeal beta_lattice(const EichlerContext& c) { return c.l_ideal * beta_base(c); }

i64 x_for(const EichlerContext& c, i64 r) {
    i64 X = c.x_roots.at(r), M = c.moduli.at(r);
    return (c.w % r == 0) ? mod64(-X, M) : X;
}

struct SideData {
    FracIdeal L;
    KElem e0, e1;  // reduced basis
    Form f;        // N(x e0 + y e1) = kappa f(x, y)
    Rational kappa;
    std::vector<std::pair<i64, i64>> rho_basis;  // per congruence prime: rho(e0), rho(e1)
};

// Lagrange reduction of the HNF basis (1/den)<a, b + c omega>, exact in 128 bits
SideData side(const FracIdeal& L, const std::vector<i64>& mods) {
    SideData s;
    s.L = L;
    s.kappa = L.norm();
    i128 a = L.ha(), b = L.hb(), c = L.hc(), k = (1 - L.D()) / 4;
    i128 scale = static_cast<i128>(L.den()) * L.den() * s.kappa.num();
    i128 q0 = a * a * s.kappa.den(), q1 = a * (2 * b + c) * s.kappa.den(), q2 = (b * b + b * c + k * c * c) * s.kappa.den();
    if (q0 % scale || q1 % scale || q2 % scale) throw QuadError("norm form not integral");
    i128 A = q0 / scale, B = q1 / scale, C = q2 / scale;
    // rows: current basis vectors as integer combinations of (a, b + c omega)
    i128 m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    for (;;) {
        if (B > A || B <= -A) {
            // ceiling of (B - A) / 2A, so that the new B lies in (-A, A]
            i128 t = (B - A) / (2 * A);
            if (B - A > 0 && (B - A) % (2 * A)) ++t;
            // e1 <- e1 - t e0
            C = C - t * B + t * t * A;
            B = B - 2 * t * A;
            m10 -= t * m00;
            m11 -= t * m01;
            continue;
        }
        if (A > C) {
            // (e0, e1) <- (e1, -e0)
            std::swap(A, C);
            B = -B;
            std::swap(m00, m10);
            std::swap(m01, m11);
            m10 = -m10;
            m11 = -m11;
            continue;
        }
        break;
    }
    s.f = Form{checked_narrow(A), checked_narrow(B), checked_narrow(C)};
    auto make = [&](i128 u, i128 v) {
        return KElem{Rational(checked_narrow(u * a + v * b), L.den()), Rational(checked_narrow(v * c), L.den())};
    };
    s.e0 = make(m00, m01);
    s.e1 = make(m10, m11);
    for (i64 M : mods) s.rho_basis.emplace_back(rho(s.e0, M), rho(s.e1, M));
    return s;
}

i64 rho_vec(const SideData& s, size_t k, i64 M, const LatVec& v) {
    auto [r0, r1] = s.rho_basis[k];
    return mod64(static_cast<i64>((static_cast<i128>(mod64(v.x, M)) * r0 + static_cast<i128>(mod64(v.y, M)) * r1) % M), M);
}

KElem element(const SideData& s, const LatVec& v) {
    return kadd(kscale(s.e0, v.x), kscale(s.e1, v.y));
}

// alpha side of the scan; independent of g, w and (for unramified ell) of ell itself
struct AlphaData {
    SideData side;
    i64 ka = 1;
    std::vector<LatVec> vecs;
    std::unordered_map<i64, std::vector<int>> by_val;
    std::vector<std::vector<i64>> rho;
};

std::shared_ptr<const AlphaData> alpha_data(const FracIdeal& L, const std::vector<i64>& mods, i64 top, int off, i64 p) {
    using Key = std::tuple<FracIdeal, std::vector<i64>, i64, int>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const AlphaData>> cache;
    Key key{L, mods, top, off};
    {
        std::lock_guard lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto ad = std::make_shared<AlphaData>();
    ad->side = side(L, mods);
    ad->ka = as_integer(ad->side.kappa, "alpha lattice norm");
    for (auto& v : lattice_vectors(ad->side.f, top / ad->ka)) {
        if (ord_p(v.val, p) != off) continue;
        ad->by_val[v.val].push_back(static_cast<int>(ad->vecs.size()));
        ad->vecs.push_back(v);
    }
    ad->rho.assign(ad->vecs.size(), std::vector<i64>(mods.size()));
    for (size_t i = 0; i < ad->vecs.size(); ++i)
        for (size_t k = 0; k < mods.size(); ++k) ad->rho[i][k] = rho_vec(ad->side, k, mods[k], ad->vecs[i]);
    std::lock_guard lk(mu);
    if (cache.size() >= 8) cache.clear();
    cache.emplace(key, ad);
    return ad;
}

using Visit = std::function<void(size_t mi, size_t ci, const LatVec& a, const LatVec& b, const SideData& bs)>;

// all pairs (alpha', beta') solving the norm equation with the p-adic conditions and the
// congruences of each context; contexts share a, l and the algebra
void scan_dsets(const std::vector<EichlerContext>& ctxs, const std::vector<i64>& ms, int off, const Visit& visit) {
    if (ctxs.empty() || ms.empty()) return;
    const EichlerContext& c0 = ctxs[0];
    const QuadSetting& st = c0.setting;
    if (off < 0) return;  // alpha' is integral: negative valuations never occur
    std::vector<i64> primes, mods;
    for (auto [r, M] : c0.moduli) {
        primes.push_back(r);
        mods.push_back(M);
    }
    i64 Na = as_integer(c0.a_ideal.norm(), "N(a)");
    i64 T1 = ipow(st.p, 2 * c0.s) * -st.D;
    i64 mmax = *std::max_element(ms.begin(), ms.end());
    i64 top = checked_narrow(static_cast<i128>(mmax) * T1 * Na);

    auto ad = alpha_data(alpha_lattice(c0), mods, top, off, st.p);
    i64 ka = ad->ka;
    const auto& avecs = ad->vecs;
    const auto& by_val = ad->by_val;
    const auto& arho = ad->rho;

    // contexts grouped by g
    std::map<int, std::vector<size_t>> groups;
    for (size_t ci = 0; ci < ctxs.size(); ++ci) groups[ctxs[ci].g_index].push_back(ci);
    for (auto& [gi, members] : groups) {
        const EichlerContext& cg = ctxs[members[0]];
        SideData bs = side(beta_lattice(cg), mods);
        i64 cb = as_integer(bs.kappa * Rational(cg.alg.j_norm), "beta norm scale");
        auto bvecs = lattice_vectors(bs.f, top / cb);
        std::vector<std::vector<i64>> xs(members.size(), std::vector<i64>(mods.size()));
        for (size_t u = 0; u < members.size(); ++u)
            for (size_t k = 0; k < mods.size(); ++k) xs[u][k] = x_for(ctxs[members[u]], primes[k]);
        std::vector<i64> brho(mods.size());
        for (auto& b : bvecs) {
            if (ord_p(b.val, st.p) != off) continue;
            for (size_t k = 0; k < mods.size(); ++k) brho[k] = rho_vec(bs, k, mods[k], b);
            for (size_t mi = 0; mi < ms.size(); ++mi) {
                i64 Tn = ms[mi] * T1 * Na;
                i64 res = Tn - cb * b.val;
                if (res <= 0 || res % ka) continue;
                auto it = by_val.find(res / ka);
                if (it == by_val.end()) continue;
                for (int ai : it->second)
                    for (size_t u = 0; u < members.size(); ++u) {
                        bool ok = true;
                        for (size_t k = 0; k < mods.size() && ok; ++k)
                            ok = mod64(arho[ai][k] - static_cast<i64>(static_cast<i128>(xs[u][k]) * brho[k] % mods[k]),
                                       mods[k]) == 0;
                        if (ok) visit(mi, members[u], avecs[ai], b, bs);
                    }
            }
        }
    }
}

Rational weight_from_beta_norm(const QuatAlg& alg, const Rational& nb) {
    int o = ord_rational(nb, alg.ell);
    if (alg.kase == -1) return Rational(2 + o, 2);
    return Rational(o);
}

i64 twist_coprime(const QuadSetting& st, const QuatAlg& alg) {
    return -st.D * st.p * alg.ell * alg.q * st.N;
}

}  // namespace

QuatAlg choose_q(const QuadSetting& st, i64 ell) {
    if (!is_prime(ell) || ell == st.p) throw QuadError("choose_q: ell must be a prime other than p");
    QuatAlg a;
    a.ell = ell;
    a.kase = st.eps(ell);
    if (a.kase == 1) throw QuadError("choose_q: ell splits in K");
    i64 Dp = -st.D * st.p;
    i64 mod = a.kase == -1 ? Dp : Dp / ell;
    i64 start = a.kase == -1 ? mod64(-ell, mod) : mod64(-1, mod);
    for (i64 q = start; q < kQSearchLimit; q += mod) {
        if (q < 2 || !is_prime(q) || gcd64(q, Dp * st.N * ell) != 1 || st.eps(q) != 1) continue;
        i64 jn = a.kase == -1 ? ell * q : q;
        if (a.kase == 0 && kronecker_symbol(-q, ell) != -1) continue;
        bool roots = true;
        for (i64 r : st.d_primes())
            if (r != ell && kronecker_symbol(-jn, r) != 1) roots = false;
        if (kronecker_symbol(-jn, st.p) != 1) roots = false;
        if (!roots) continue;
        a.q = q;
        a.j_norm = jn;
        return a;
    }
    throw QuadError("choose_q: no auxiliary prime found");
}

QuatElem quat_mul(const QuatElem& a, const QuatElem& b, i64 D, i64 jn) {
    KElem t = kmul(a.beta, kconj(b.beta), D);
    KElem x = kadd(kmul(a.alpha, b.alpha, D), KElem{t.x * Rational(-jn), t.y * Rational(-jn)});
    KElem y = kadd(kmul(a.alpha, b.beta, D), kmul(a.beta, kconj(b.alpha), D));
    return {x, y};
}

QuatElem quat_conj(const QuatElem& a) { return {kconj(a.alpha), KElem{-a.beta.x, -a.beta.y}}; }

Rational quat_norm(const QuatElem& a, i64 D, i64 jn) { return knorm(a.alpha, D) + Rational(jn) * knorm(a.beta, D); }

Rational quat_trace(const QuatElem& a) { return ktrace(a.alpha); }

TwistData twist_data(const QuadSetting& st, int s, i64 ell, i64 coprime_to) {
    TwistData t;
    int kase = st.eps(ell);
    for (i64 r : st.d_primes())
        if (!(kase == 0 && r == ell)) t.w0.push_back(r);
    t.w0.push_back(st.p);
    std::sort(t.w0.begin(), t.w0.end());
    for (size_t mask = 0; mask < (size_t{1} << t.w0.size()); ++mask) {
        i64 w = 1;
        for (size_t i = 0; i < t.w0.size(); ++i)
            if (mask >> i & 1) w *= t.w0[i];
        t.ws.push_back(w);
    }
    std::sort(t.ws.begin(), t.ws.end());
    auto g = pic_group(QuadOrder{st, s});
    std::map<int, int> first;
    for (int i = 0; i < g->size(); ++i)
        if (!first.count(g->mul(i, i))) first[g->mul(i, i)] = i;
    for (int i = 0; i < g->size(); ++i) {
        if (first.at(g->mul(i, i)) != i) continue;
        t.g_classes.push_back(i);
        t.g_ideals.push_back(smallest_coprime_ideal(g->element(i), coprime_to, 0));
    }
    return t;
}

EichlerContext eichler_context(const QuadSetting& st, int s, int a_cls, i64 ell, i64 w, int g_index, int a_rank) {
    if (s < 1) throw QuadError("eichler_context: s must be at least 1");
    EichlerContext c;
    c.setting = st;
    c.s = s;
    c.alg = choose_q(st, ell);
    i64 f = ipow(st.p, static_cast<unsigned>(s));
    c.n_ideal = ideal_of_norm(st.D, f, st.N);
    c.q_ideal = prime_above(st.D, f, c.alg.q);
    c.l_ideal = c.alg.kase == 0 ? prime_above(st.D, f, ell) : FracIdeal::order(st.D, f);
    auto g = pic_group(QuadOrder{st, s});
    i64 cop = twist_coprime(st, c.alg);
    c.a_ideal = smallest_coprime_ideal(g->element(a_cls), cop, a_rank);
    TwistData t = twist_data(st, s, ell, cop);
    for (i64 r : t.w0) {
        int e = r == st.p ? 2 * s : 1;
        i64 M = ipow(r, static_cast<unsigned>(e));
        auto X = hensel_sqrt(mod64(-c.alg.j_norm, M), r, e);
        if (!X) throw QuadError("eichler_context: -j^2 is not a square locally");
        c.x_roots[r] = *X;
        c.moduli[r] = M;
    }
    if (std::find(t.ws.begin(), t.ws.end(), w) == t.ws.end()) throw QuadError("eichler_context: w not in W");
    if (g_index < 0 || g_index >= static_cast<int>(t.g_ideals.size())) throw QuadError("eichler_context: bad g");
    c.w = w;
    c.g_index = g_index;
    c.g_ideal = t.g_ideals[g_index];
    return c;
}

std::vector<EichlerContext> eichler_family(const QuadSetting& st, int s, int a_cls, i64 ell, int a_rank) {
    EichlerContext base = eichler_context(st, s, a_cls, ell, 1, 0, a_rank);
    TwistData t = twist_data(st, s, ell, twist_coprime(st, base.alg));
    std::vector<EichlerContext> out;
    for (size_t gi = 0; gi < t.g_ideals.size(); ++gi)
        for (i64 w : t.ws) {
            EichlerContext c = base;
            c.w = w;
            c.g_index = static_cast<int>(gi);
            c.g_ideal = t.g_ideals[gi];
            out.push_back(c);
        }
    return out;
}

EichlerLattice eichler_lattice(const EichlerContext& ctx) {
    EichlerLattice L;
    L.alpha = alpha_lattice(ctx);
    L.beta = beta_lattice(ctx);
    for (auto [r, M] : ctx.moduli) L.cong.push_back({r, M, x_for(ctx, r)});
    return L;
}

std::pair<KElem, KElem> to_scaled(const EichlerContext& ctx, const QuatElem& b) {
    i64 D = ctx.setting.D;
    KElem k = kscale(KElem{-1, 2}, ipow(ctx.setting.p, static_cast<unsigned>(ctx.s)));
    return {kmul(b.alpha, k, D), kmul(b.beta, k, D)};
}

QuatElem from_scaled(const EichlerContext& ctx, const KElem& as, const KElem& bs) {
    i64 D = ctx.setting.D;
    KElem k = kinv(kscale(KElem{-1, 2}, ipow(ctx.setting.p, static_cast<unsigned>(ctx.s))), D);
    return {kmul(as, k, D), kmul(bs, k, D)};
}

bool eichler_contains(const EichlerContext& ctx, const QuatElem& b) {
    auto [as, bs] = to_scaled(ctx, b);
    EichlerLattice L = eichler_lattice(ctx);
    if (!L.alpha.contains(as) || !L.beta.contains(bs)) return false;
    for (auto& c : L.cong)
        if (mod64(rho(as, c.modulus) - mulmod(c.x, rho(bs, c.modulus), c.modulus), c.modulus)) return false;
    return true;
}

std::array<QuatElem, 4> eichler_basis(const EichlerContext& ctx) {
    EichlerLattice L = eichler_lattice(ctx);
    i64 M = 1, X = 0;
    for (auto& c : L.cong) {
        // CRT of the roots
        i64 M2 = M * c.modulus;
        i64 t = mulmod(mod64(c.x - X, c.modulus), invmod(mod64(M, c.modulus), c.modulus), c.modulus);
        X = mod64(X + M * t, M2);
        M = M2;
    }
    KElem a0 = L.alpha.basis0(), a1 = L.alpha.basis1();
    i64 r0 = rho(a0, M), r1 = rho(a1, M);
    // unimodular change of basis so that the first vector has a unit residue
    KElem u, v;
    bool found = false;
    for (i64 s0 = 0; s0 <= 50 && !found; ++s0)
        for (i64 s1 = 0; s1 <= 50 && !found; ++s1) {
            if (gcd64(s0, s1) != 1) continue;
            i64 ru = mod64(s0 * r0 + s1 * r1, M);
            if (gcd64(ru, M) != 1) continue;
            i64 x, y;
            ext_gcd(s0, s1, x, y);  // s0 x + s1 y = 1
            u = kadd(kscale(a0, s0), kscale(a1, s1));
            v = kadd(kscale(a0, -y), kscale(a1, x));
            found = true;
        }
    if (!found) throw QuadError("eichler_basis: no unit residue");
    i64 inv = invmod(rho(u, M), M);
    KElem zero{0, 0};
    std::array<QuatElem, 4> out;
    auto fix = [&](i64 resid) { return mulmod(resid, inv, M); };
    out[0] = from_scaled(ctx, kscale(u, M), zero);
    out[1] = from_scaled(ctx, kadd(v, kscale(u, -fix(rho(v, M)))), zero);
    out[2] = from_scaled(ctx, kscale(u, fix(mulmod(X, rho(L.beta.basis0(), M), M))), L.beta.basis0());
    out[3] = from_scaled(ctx, kscale(u, fix(mulmod(X, rho(L.beta.basis1(), M), M))), L.beta.basis1());
    return out;
}

Rational gram_determinant(const std::array<QuatElem, 4>& b, i64 D, i64 jn) {
    Rational m[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            m[i][j] = ktrace(kmul(b[i].alpha, kconj(b[j].alpha), D)) +
                      Rational(jn) * ktrace(kmul(b[i].beta, kconj(b[j].beta), D));
    Rational det(1);
    for (int c = 0; c < 4; ++c) {
        int piv = -1;
        for (int r = c; r < 4; ++r)
            if (!m[r][c].is_zero()) piv = r;
        if (piv < 0) return Rational(0);
        if (piv != c) {
            for (int k = 0; k < 4; ++k) std::swap(m[piv][k], m[c][k]);
            det = -det;
        }
        det *= m[c][c];
        for (int r = c + 1; r < 4; ++r) {
            Rational f = m[r][c] / m[c][c];
            for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
        }
    }
    return det;
}

Rational dset_weight(const EichlerContext& ctx, const QuatElem& b) {
    return weight_from_beta_norm(ctx.alg, knorm(to_scaled(ctx, b).second, ctx.setting.D));
}

std::vector<QuatElem> enumerate_Dset(const EichlerContext& ctx, i64 m, int val_offset) {
    std::vector<QuatElem> out;
    std::vector<EichlerContext> one{ctx};
    SideData as = side(alpha_lattice(ctx), {});
    scan_dsets(one, {m}, val_offset, [&](size_t, size_t, const LatVec& a, const LatVec& b, const SideData& bs) {
        out.push_back(from_scaled(ctx, element(as, a), element(bs, b)));
    });
    return out;
}

FormalLogSum delta_S(const EichlerContext& ctx, i64 m, int val_offset) {
    Rational total;
    std::vector<EichlerContext> one{ctx};
    scan_dsets(one, {m}, val_offset, [&](size_t, size_t, const LatVec&, const LatVec& b, const SideData& bs) {
        total += weight_from_beta_norm(ctx.alg, bs.kappa * Rational(b.val));
    });
    return FormalLogSum::term(ctx.alg.ell, total);
}

std::vector<FormalLogSum> delta_total_multi(const QuadSetting& st, int s, int a_cls, i64 ell, const std::vector<i64>& ms,
                                            int val_offset, int a_rank) {
    auto fam = eichler_family(st, s, a_cls, ell, a_rank);
    std::vector<Rational> tot(ms.size());
    const QuatAlg& alg = fam[0].alg;
    scan_dsets(fam, ms, val_offset, [&](size_t mi, size_t, const LatVec&, const LatVec& b, const SideData& bs) {
        tot[mi] += weight_from_beta_norm(alg, bs.kappa * Rational(b.val));
    });
    std::vector<FormalLogSum> out;
    for (auto& t : tot) out.push_back(FormalLogSum::term(ell, t * Rational(1, 2)));
    return out;
}

FormalLogSum delta_total(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m, int val_offset) {
    return delta_total_multi(st, s, a_cls, ell, {m}, val_offset)[0];
}

std::vector<std::vector<PairImage>> dset_pair_images_multi(const QuadSetting& st, int s, int a_cls, i64 ell,
                                                          const std::vector<i64>& ms) {
    auto fam = eichler_family(st, s, a_cls, ell);
    std::vector<std::vector<PairImage>> out(ms.size());
    SideData as = side(alpha_lattice(fam[0]), {});
    // reduced bases of the inverses keep the products small (HNF bases of g gbar^{-1} are skewed)
    SideData a_inv = side(fam[0].a_ideal.inverse(), {});
    std::map<int, SideData> base_inv;
    for (auto& c : fam)
        if (!base_inv.count(c.g_index)) base_inv.emplace(c.g_index, side(beta_base(c).inverse(), {}));
    auto times = [&](const SideData& inv, const KElem& x) {
        return FracIdeal::from_generators(st.D, {kmul(x, inv.e0, st.D), kmul(x, inv.e1, st.D)});
    };
    scan_dsets(fam, ms, 0, [&](size_t mi, size_t ci, const LatVec& a, const LatVec& b, const SideData& bs) {
        const EichlerContext& c = fam[ci];
        PairImage pi;
        pi.w = c.w;
        pi.g_index = c.g_index;
        pi.c_plus = times(a_inv, element(as, a));
        pi.c_minus = times(base_inv.at(c.g_index), element(bs, b));
        out[mi].push_back(std::move(pi));
    });
    return out;
}

std::vector<PairImage> dset_pair_images(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m) {
    return dset_pair_images_multi(st, s, a_cls, ell, {m})[0];
}

std::vector<FormalLogSum> ideal_pair_count_all(const QuadSetting& st, int s, i64 ell, i64 m) {
    auto g = pic_group(QuadOrder{st, s});
    IdealCounter counter(g);
    EichlerContext base = eichler_context(st, s, g->identity(), ell, 1, 0);
    const QuatAlg& alg = base.alg;
    TwistData t = twist_data(st, s, ell, twist_coprime(st, alg));
    QuadOrder o{st, s};
    // class of c- is a * [nbar q gbar^2]
    std::vector<int> Y;
    for (auto& gi : t.g_ideals) {
        FracIdeal gb = gi.conj();
        Y.push_back(g->index_of(ideal_to_class(base.n_ideal.conj() * base.q_ideal * gb * gb, o)));
    }
    i64 T = m * ipow(st.p, 2 * s) * -st.D;
    i64 c = alg.kase == -1 ? ell * st.N : st.N;
    std::vector<Rational> tot(g->size());
    for (i64 nm = 1; c * nm < T; ++nm) {
        if (nm % st.p == 0) continue;
        if (alg.kase == 0 && nm % ell) continue;
        auto plus = counter.classes_of_norm(T - c * nm);
        if (plus.empty()) continue;
        auto minus = counter.classes_of_norm(nm);
        if (minus.empty()) continue;
        i64 dprime = 1;
        for (i64 r : t.w0)
            if (nm % r == 0) dprime *= 2;
        int o_ell = ord_p(nm, ell);
        Rational wt = alg.kase == -1 ? Rational(2 + o_ell, 2) : Rational(o_ell);
        for (auto [cp, np] : plus) {
            int a = g->inv(cp);
            i64 cnt = 0;
            for (int y : Y) {
                auto it = minus.find(g->mul(a, y));
                if (it != minus.end()) cnt += it->second;
            }
            if (cnt) tot[a] += Rational(2 * dprime * np * cnt) * wt;
        }
    }
    std::vector<FormalLogSum> out;
    for (auto& x : tot) out.push_back(FormalLogSum::term(ell, x));
    return out;
}

FormalLogSum ideal_pair_count(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m) {
    return ideal_pair_count_all(st, s, ell, m).at(a_cls);
}

std::vector<FormalLogSum> delta_closed_all(const QuadSetting& st, int s, i64 ell, i64 m) {
    auto g = pic_group(QuadOrder{st, s});
    IdealCounter counter(g);
    EichlerContext base = eichler_context(st, s, g->identity(), ell, 1, 0);
    const QuatAlg& alg = base.alg;
    QuadOrder o{st, s};
    int X = g->index_of(ideal_to_class(base.n_ideal * base.q_ideal * base.l_ideal, o));
    i64 T = m * ipow(st.p, 2 * s) * -st.D;
    std::vector<Rational> tot(g->size());
    for (i64 n = ell; n * st.N < T; n += ell) {
        if (n % st.p == 0) continue;
        auto plus = counter.classes_of_norm(T - n * st.N);
        if (plus.empty()) continue;
        auto rest = counter.classes_of_norm(n / ell);
        if (rest.empty()) continue;
        i64 mult = alg.kase == -1 ? 1 + ord_p(n, ell) : ord_p(n, ell);
        i64 delta = delta_of(n, st.D);
        for (auto [a, r] : plus) {
            int ax = g->mul(a, X);
            i64 R = 0;
            for (auto [b, v] : rest)
                if (g->is_square(g->mul(ax, g->inv(b)))) R += v;
            if (R) tot[a] += Rational(delta * r * mult * R);
        }
    }
    std::vector<FormalLogSum> out;
    for (auto& x : tot) out.push_back(FormalLogSum::term(ell, x));
    return out;
}

FormalLogSum delta_closed(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m) {
    return delta_closed_all(st, s, ell, m).at(a_cls);
}

FormalLogSum nonsplit_height_part(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m) {
    return delta_closed(st, s, a_cls, ell, m * st.p * st.p) - delta_closed(st, s, a_cls, ell, m);
}

std::vector<i64> nonsplit_support(const QuadSetting& st, int s, i64 m) {
    i64 T = m * ipow(st.p, 2 * s) * -st.D;
    std::vector<i64> out;
    for (i64 ell = 2; ell * st.N < T; ++ell)
        if (ell != st.p && is_prime(ell) && st.eps(ell) != 1) out.push_back(ell);
    return out;
}

GzReport gz_identity_check(const QuadSetting& st, int s, int a_cls, i64 m, i64 audit_limit) {
    GzReport rep;
    SigmaContext ctx(st, s, a_cls);
    auto g = ctx.pic_ptr();
    SigmaContext tw = ctx.with_class(g->mul(a_cls, ctx.ds()));
    i64 m1 = m * ipow(st.p, 2 * s), m2 = m1 * st.p * st.p;
    rep.rhs = g_coeff_twisted_closed(ctx, m1) - g_coeff_twisted_closed(ctx, m2);
    rep.rhs_definition = g_coeff(tw, m1) - g_coeff(tw, m2);
    if (!(rep.rhs == rep.rhs_definition)) rep.problems.push_back("twisted coefficients: closed form differs from definition");
    for (i64 ell : nonsplit_support(st, s, m * st.p * st.p)) {
        FormalLogSum hi = delta_closed(st, s, a_cls, ell, m * st.p * st.p);
        FormalLogSum lo = delta_closed(st, s, a_cls, ell, m);
        FormalLogSum part = hi - lo;
        if (!part.is_zero()) rep.ells.push_back(ell);
        rep.lhs += part;
        if (ell <= audit_limit) {
            auto enumd = delta_total_multi(st, s, a_cls, ell, {m, m * st.p * st.p});
            rep.audited.push_back(ell);
            if (!(enumd[0] == lo) || !(enumd[1] == hi))
                rep.problems.push_back("ell=" + std::to_string(ell) + ": enumeration " + enumd[0].str() + ", " +
                                       enumd[1].str() + " vs closed " + lo.str() + ", " + hi.str());
        }
    }
    if (!(rep.lhs == rep.rhs)) rep.problems.push_back("lhs " + rep.lhs.str() + " != rhs " + rep.rhs.str());
    rep.ok = rep.problems.empty();
    return rep;
}

}  // namespace gz
