#include "gz/hecke.hpp"

#include <mutex>
#include <set>
#include <tuple>

namespace gz {

int LatticeClass::t(i64 p) const { return ord_p(conductor, p); }

LatticeClass lattice_class(const FracIdeal& L) {
    auto [f, form] = classify_lattice(L);
    return LatticeClass{f, form};
}

LatticeClass lattice_class(const IdealClass& c) { return LatticeClass{c.order.conductor(), reduce(c.form)}; }

FracIdeal lattice_of(i64 D, const LatticeClass& c) { return FracIdeal::from_form(D, c.form); }

// ---- divisors

void FormalDivisor::add(const LatticeClass& c, i64 mult) {
    if (mult == 0) return;
    auto [it, inserted] = terms_.emplace(c, mult);
    if (!inserted) {
        it->second += mult;
        if (it->second == 0) terms_.erase(it);
    }
}

i64 FormalDivisor::degree() const {
    i64 d = 0;
    for (auto& [c, m] : terms_) d += m;
    return d;
}

bool FormalDivisor::homogeneous(i64 conductor) const {
    for (auto& [c, m] : terms_)
        if (c.conductor != conductor) return false;
    return true;
}

FormalDivisor& FormalDivisor::operator+=(const FormalDivisor& o) {
    for (auto& [c, m] : o.terms_) add(c, m);
    return *this;
}

FormalDivisor& FormalDivisor::operator-=(const FormalDivisor& o) {
    for (auto& [c, m] : o.terms_) add(c, -m);
    return *this;
}

FormalDivisor FormalDivisor::operator+(const FormalDivisor& o) const {
    FormalDivisor r = *this;
    return r += o;
}

FormalDivisor FormalDivisor::operator-(const FormalDivisor& o) const {
    FormalDivisor r = *this;
    return r -= o;
}

// ---- class maps between orders

LatticeClass extend_class(i64 D, const LatticeClass& c, i64 to_conductor) {
    if (c.conductor % to_conductor != 0) throw QuadError("extend_class: conductor must divide");
    if (c.conductor == to_conductor) return c;
    FracIdeal L = lattice_of(D, c) * FracIdeal::order(D, to_conductor);
    LatticeClass out = lattice_class(L);
    if (out.conductor != to_conductor) throw QuadError("extend_class: extension has wrong conductor");
    return out;
}

namespace {

std::mutex g_kernel_mutex;
std::map<std::tuple<i64, i64, i64>, std::vector<Form>> g_kernel_cache;

std::mutex g_norm_mutex;
std::map<std::tuple<i64, i64, i64>, std::vector<Form>> g_norm_cache;

const std::vector<Form>& classes_of_norm_cached(i64 D, i64 f, i64 n) {
    auto key = std::make_tuple(D, f, n);
    {
        std::lock_guard lock(g_norm_mutex);
        auto it = g_norm_cache.find(key);
        if (it != g_norm_cache.end()) return it->second;
    }
    auto v = ideal_classes_of_norm(D, f, n);
    std::lock_guard lock(g_norm_mutex);
    return g_norm_cache.emplace(key, std::move(v)).first->second;
}

std::vector<std::pair<i64, i64>> projective_reps(i64 f) {
    std::vector<std::pair<i64, i64>> out;
    auto fac = factorize(f);
    if (fac.factors.size() == 1) {
        i64 r = fac.factors[0].first;
        for (i64 y = 0; y < f; ++y) out.emplace_back(1, y);
        for (i64 x = 0; x < f; x += r) out.emplace_back(x, 1);
    } else {
        for (i64 x = 0; x < f; ++x)
            for (i64 y = 0; y < f; ++y) out.emplace_back(x, y);
    }
    return out;
}

}  // namespace

std::vector<Form> ring_class_kernel(i64 D, i64 d, i64 f) {
    auto key = std::make_tuple(D, d, f);
    {
        std::lock_guard lock(g_kernel_mutex);
        auto it = g_kernel_cache.find(key);
        if (it != g_kernel_cache.end()) return it->second;
    }
    std::set<Form> found;
    if (f == 1) {
        found.insert(principal_form(checked_narrow(static_cast<i128>(d) * d * D)));
    } else {
        i64 k = (1 - D) / 4;
        FracIdeal Od = FracIdeal::order(D, d), Odf = FracIdeal::order(D, d * f);
        for (auto [x, y] : projective_reps(f)) {
            // alpha = x + y d omega, a unit of O_d / f
            i128 nrm = static_cast<i128>(x) * x + static_cast<i128>(d) * x * y + static_cast<i128>(k) * d * d * y * y;
            if (gcd64(checked_narrow(nrm % f), f) != 1) continue;
            FracIdeal L = Od.scaled(KElem{x, y * d}).intersect(Odf);
            LatticeClass c = lattice_class(L);
            if (c.conductor != d * f) throw QuadError("ring_class_kernel: unexpected conductor");
            found.insert(c.form);
        }
    }
    std::vector<Form> out(found.begin(), found.end());
    std::lock_guard lock(g_kernel_mutex);
    return g_kernel_cache.emplace(key, std::move(out)).first->second;
}

Form lift_class(const Form& X, i64 f) {
    Form y = form_with_leading_coprime(X, f);
    return reduce(Form{y.a, checked_narrow(static_cast<i128>(f) * y.b), checked_narrow(static_cast<i128>(f) * f * y.c)});
}

// ---- Hecke operators

namespace {

FormalDivisor apply_prime_power(i64 D, i64 r, int k, const LatticeClass& cls) {
    FormalDivisor out;
    i64 d = cls.conductor;
    int e = ord_p(d, r);
    for (int j = -std::min(k, e); j <= k; ++j) {
        if (j <= 0) {
            i64 c = d / ipow(r, -j);
            i64 n = ipow(r, k + j);
            Form X = extend_class(D, cls, c).form;
            for (auto& B : classes_of_norm_cached(D, c, n)) out.add(LatticeClass{c, compose(X, B)}, 1);
        } else {
            i64 f = ipow(r, j);
            i64 c = d * f;
            i64 n = ipow(r, k - j);
            const auto& ker = ring_class_kernel(D, d, f);
            for (auto& B : classes_of_norm_cached(D, d, n)) {
                Form L = lift_class(compose(cls.form, B), f);
                for (auto& kappa : ker) out.add(LatticeClass{c, compose(L, kappa)}, 1);
            }
        }
    }
    return out;
}

}  // namespace

FormalDivisor hecke_apply(i64 D, i64 m, const FormalDivisor& d) {
    if (m < 1) throw QuadError("hecke_apply: m must be positive");
    FormalDivisor cur = d;
    if (m == 1) return cur;
    for (auto [r, k] : factorize(m).factors) {
        FormalDivisor next;
        for (auto& [c, mult] : cur.terms()) {
            FormalDivisor img = apply_prime_power(D, r, k, c);
            for (auto& [c2, m2] : img.terms()) next.add(c2, m2 * mult);
        }
        cur = std::move(next);
    }
    return cur;
}

FormalDivisor hecke_oracle(i64 m, const FracIdeal& L) {
    if (m < 1) throw QuadError("hecke_oracle: m must be positive");
    if (m > 10000) throw QuadError("oracle bound");
    KElem e1 = L.basis0(), e2 = L.basis1();
    auto lin = [](const KElem& u, i64 s, const KElem& v, i64 t) {
        return KElem{u.x * Rational(s) + v.x * Rational(t), u.y * Rational(s) + v.y * Rational(t)};
    };
    FormalDivisor out;
    for (i64 a = 1; a <= m; ++a) {
        if (m % a) continue;
        i64 dd = m / a;
        for (i64 b = 0; b < dd; ++b) {
            FracIdeal sub = FracIdeal::from_generators(L.D(), {lin(e1, a, e2, b), lin(e1, 0, e2, dd)});
            out.add(lattice_class(sub), 1);
        }
    }
    return out;
}

// ---- norm maps and Euler relations

FormalDivisor norm_push(const QuadSetting& st, int s, int r, const FormalDivisor& d) {
    i64 top = ipow(st.p, s + r);
    if (!d.homogeneous(top)) throw QuadError("inhomogeneous divisor");
    if (r == 0) return d;
    const auto& ker = ring_class_kernel(st.D, ipow(st.p, s), ipow(st.p, r));
    FormalDivisor out;
    for (auto& [c, m] : d.terms())
        for (auto& kappa : ker) out.add(LatticeClass{top, compose(c.form, kappa)}, m);
    return out;
}

std::vector<LatticeClass> tower(const QuadSetting& st, const LatticeClass& top) {
    int T = top.t(st.p);
    if (top.conductor != ipow(st.p, T)) throw QuadError("tower: top conductor must be a power of p");
    std::vector<LatticeClass> out(T + 1);
    out[T] = top;
    for (int t = T - 1; t >= 0; --t) out[t] = extend_class(st.D, out[t + 1], ipow(st.p, t));
    return out;
}

namespace {

RelationReport finish(std::string what, FormalDivisor lhs, FormalDivisor rhs) {
    RelationReport rep;
    rep.ok = lhs == rhs;
    rep.what = std::move(what);
    rep.lhs = std::move(lhs);
    rep.rhs = std::move(rhs);
    return rep;
}

}  // namespace

RelationReport euler_relation_check(const QuadSetting& st, int s, int r, const LatticeClass& top) {
    if (s < 1 || r < 1) throw QuadError("euler_relation_check: needs s, r >= 1");
    if (top.conductor != ipow(st.p, s + r)) throw QuadError("euler_relation_check: top must have conductor p^(s+r)");
    auto h = tower(st, top);
    FormalDivisor lhs = hecke_apply(st.D, ipow(st.p, r), FormalDivisor(h[s]));
    FormalDivisor rhs = norm_push(st, s, r, FormalDivisor(h[s + r])) +
                        hecke_apply(st.D, ipow(st.p, r - 1), FormalDivisor(h[s - 1]));
    return finish("euler s=" + std::to_string(s) + " r=" + std::to_string(r), lhs, rhs);
}

RelationReport euler_relation_check_s0(const QuadSetting& st, const LatticeClass& top) {
    if (top.conductor != st.p) throw QuadError("euler_relation_check_s0: top must have conductor p");
    auto h = tower(st, top);
    FormalDivisor lhs = hecke_apply(st.D, st.p, FormalDivisor(h[0]));
    FormalDivisor rhs = norm_push(st, 0, 1, FormalDivisor(h[1]));
    // Frobenius classes: the two primes above p, as forms (p, +-B, C)
    auto primes = ideal_classes_of_norm(st.D, 1, st.p);
    if (primes.size() != 2) throw QuadError("euler_relation_check_s0: p must split");
    for (auto& pf : primes) rhs.add(LatticeClass{1, compose(h[0].form, pf)}, 1);
    return finish("euler s=0", lhs, rhs);
}

std::map<int, i64> conductor_support(const QuadSetting& st, i64 m0, const FormalDivisor& d) {
    std::map<int, i64> out;
    FormalDivisor img = hecke_apply(st.D, m0, d);
    for (auto& [c, m] : img.terms()) out[c.t(st.p)] += m;
    return out;
}

std::vector<RelationReport> fexp_divisor_identity(const QuadSetting& st, i64 m0, int r, int s, const LatticeClass& top) {
    if (s < 1 || r < 0) throw QuadError("fexp_divisor_identity: needs s >= 1, r >= 0");
    if (gcd64(m0, st.N * st.p) != 1) throw QuadError("fexp_divisor_identity: m0 must be prime to Np");
    if (top.conductor != ipow(st.p, s + r + 2)) throw QuadError("fexp_divisor_identity: top must have conductor p^(s+r+2)");
    auto h = tower(st, top);
    std::vector<RelationReport> out;
    for (int e : {r + 2, r + 1}) {
        // T_{m0 p^e}[h_s] - T_{m0 p^(e-1)}[h_{s-1}] against T_{m0} norm_push_{s,e}[h_{s+e}]
        FormalDivisor lhs = hecke_apply(st.D, m0 * ipow(st.p, e), FormalDivisor(h[s])) -
                            hecke_apply(st.D, m0 * ipow(st.p, e - 1), FormalDivisor(h[s - 1]));
        FormalDivisor rhs = hecke_apply(st.D, m0, norm_push(st, s, e, FormalDivisor(h[s + e])));
        out.push_back(finish("fexp m0=" + std::to_string(m0) + " e=" + std::to_string(e), lhs, rhs));
    }
    return out;
}

}  // namespace gz
