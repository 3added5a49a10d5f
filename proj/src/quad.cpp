#include "gz/quad.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace gz {

namespace {

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

i128 mod128(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

bool is_squarefree(i64 n) {
    for (auto& f : factorize(n < 0 ? -n : n).factors)
        if (f.second > 1) return false;
    return true;
}

bool is_fundamental(i64 d) {
    if (d == 1) return true;
    i64 r = mod64(d, 4);
    if (r == 1) return is_squarefree(d);
    if (r != 0) return false;
    i64 m = d / 4;
    i64 m4 = mod64(m, 4);
    return (m4 == 2 || m4 == 3) && is_squarefree(m);
}

}  // namespace

// ---- setting

QuadSetting QuadSetting::make(i64 D, i64 p, i64 N) {
    if (D >= 0) throw QuadError("D must be negative");
    if (D % 2 == 0) throw QuadError("D must be odd");
    if (D == -3) throw QuadError("D = -3 is excluded");
    if (mod64(D, 4) != 1 || !is_squarefree(D)) throw QuadError("D must be a fundamental discriminant");
    if (p < 3 || !is_prime(p)) throw QuadError("p must be an odd prime");
    if (D % p == 0) throw QuadError("p must not divide D");
    if (kronecker_symbol(D, p) != 1) throw QuadError("p must split in K");
    if (N < 1) throw QuadError("N must be positive");
    if (gcd64(N, D * p) != 1) throw QuadError("N must be prime to Dp");
    if (N > 1)
        for (i64 l : factorize(N).primes())
            if (kronecker_symbol(D, l) != 1) throw QuadError("every prime dividing N must split in K");
    return QuadSetting{D, p, N};
}

std::vector<i64> QuadSetting::d_primes() const { return factorize(-D).primes(); }

i64 QuadOrder::disc() const {
    i64 f = conductor();
    return checked_narrow(static_cast<i128>(f) * f * setting.D);
}

// ---- forms

i64 Form::disc() const { return checked_narrow(static_cast<i128>(b) * b - static_cast<i128>(4) * a * c); }

bool Form::is_reduced() const {
    if (!(std::abs(b) <= a && a <= c)) return false;
    if ((std::abs(b) == a || a == c) && b < 0) return false;
    return true;
}

i64 Form::eval(i64 x, i64 y) const {
    return checked_narrow(static_cast<i128>(a) * x * x + static_cast<i128>(b) * x * y + static_cast<i128>(c) * y * y);
}

std::string Form::str() const {
    return "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
}

Form reduce(Form f) {
    i128 a = f.a, b = f.b, c = f.c;
    i128 disc = b * b - 4 * a * c;
    if (a <= 0 || disc >= 0) throw QuadError("form not positive definite");
    for (;;) {
        if (b > a || b <= -a) {
            i128 r = mod128(b, 2 * a);
            if (r > a) r -= 2 * a;
            c = (r * r - disc) / (4 * a);
            b = r;
        }
        if (a > c) {
            std::swap(a, c);
            b = -b;
            continue;
        }
        if (a == c && b < 0) b = -b;
        break;
    }
    return Form{checked_narrow(a), checked_narrow(b), checked_narrow(c)};
}

Form compose(const Form& f, const Form& g) {
    i64 disc = f.disc();
    if (g.disc() != disc) throw QuadError("compose: discriminants differ");
    i128 a1 = f.a, b1 = f.b, a2 = g.a, b2 = g.b, c2 = g.c;
    i128 s = (b1 + b2) / 2;
    i64 x1, y1, x2, y2;
    i64 d1 = ext_gcd(checked_narrow(a1), checked_narrow(a2), x1, y1);
    i64 e = ext_gcd(d1, checked_narrow(s), x2, y2);
    // u a1 + v a2 + w s = e
    i128 v = static_cast<i128>(x2) * y1, w = y2;
    i128 a3 = (a1 / e) * (a2 / e);
    i128 b3 = b2 + 2 * (a2 / e) * mod128(v * (s - b2) - w * c2, a1 / e);
    b3 = mod128(b3, 2 * a3);
    i128 c3 = (b3 * b3 - disc) / (4 * a3);
    if (b3 * b3 - 4 * a3 * c3 != disc) throw QuadError("compose: internal inconsistency");
    return reduce(Form{checked_narrow(a3), checked_narrow(b3), checked_narrow(c3)});
}

Form form_inverse(const Form& f) { return reduce(Form{f.a, -f.b, f.c}); }

Form principal_form(i64 disc) {
    if (mod64(disc, 4) == 1) return Form{1, 1, (1 - disc) / 4};
    return Form{1, 0, -disc / 4};
}

Form transform_to(const Form& f, i64 x, i64 y) {
    i64 s, t;
    if (ext_gcd(x, y, s, t) != 1) throw QuadError("transform_to: vector not primitive");
    i64 u = -t, v = s;  // x v - y u = 1
    i128 A = f.eval(x, y);
    i128 B = 2 * static_cast<i128>(f.a) * x * u + static_cast<i128>(f.b) * (static_cast<i128>(x) * v + static_cast<i128>(y) * u) +
             2 * static_cast<i128>(f.c) * y * v;
    i128 C = f.eval(u, v);
    return Form{checked_narrow(A), checked_narrow(B), checked_narrow(C)};
}

Form form_with_leading_coprime(const Form& f, i64 m) {
    if (gcd64(f.a, m) == 1) return f;
    for (i64 r = 1; r < 1000; ++r) {
        for (i64 x = -r; x <= r; ++x) {
            for (i64 y : {-r, r}) {
                for (int swap = 0; swap < 2; ++swap) {
                    i64 xx = swap ? y : x, yy = swap ? x : y;
                    if (gcd64(xx, yy) != 1) continue;
                    if (gcd64(f.eval(xx, yy), m) == 1) return transform_to(f, xx, yy);
                }
            }
        }
    }
    throw QuadError("no represented value prime to modulus");
}

std::vector<Form> reduced_forms(i64 disc) {
    if (disc >= 0 || mod64(disc, 4) > 1) throw QuadError("reduced_forms: bad discriminant");
    std::vector<Form> out;
    i64 amax = isqrt(-disc / 3);
    for (i64 a = 1; a <= amax; ++a) {
        for (i64 b = -a + 1; b <= a; ++b) {
            if (mod64(b - disc, 2) != 0) continue;
            i128 num = static_cast<i128>(b) * b - disc;
            if (num % (4 * a) != 0) continue;
            i64 c = checked_narrow(num / (4 * a));
            if (c < a) continue;
            if (c == a && b < 0) continue;
            Form f{a, b, c};
            if (f.is_primitive()) out.push_back(f);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- K elements

KElem KElem::from_sqrt(const Rational& u, const Rational& v) {
    // u + v sqrt D = (u - v) + 2v omega
    return KElem{u - v, v * Rational(2)};
}

Rational KElem::u() const { return x + y * Rational(1, 2); }
Rational KElem::v() const { return y * Rational(1, 2); }

KElem kmul(const KElem& a, const KElem& b, i64 D) {
    Rational k((1 - D) / 4);
    return KElem{a.x * b.x - k * a.y * b.y, a.x * b.y + a.y * b.x + a.y * b.y};
}

KElem kconj(const KElem& a) { return KElem{a.x + a.y, -a.y}; }

Rational knorm(const KElem& a, i64 D) {
    Rational k((1 - D) / 4);
    return a.x * a.x + a.x * a.y + k * a.y * a.y;
}

Rational ktrace(const KElem& a) { return a.x * Rational(2) + a.y; }

KElem kinv(const KElem& a, i64 D) {
    Rational n = knorm(a, D);
    if (n.is_zero()) throw QuadError("inverse of zero");
    KElem c = kconj(a);
    return KElem{c.x / n, c.y / n};
}

// ---- lattices

namespace {

struct IntLattice {
    i128 a = 0, b = 0, c = 0;
};

IntLattice hnf(const std::vector<std::pair<i128, i128>>& gens) {
    i128 a = 0, vx = 0, vy = 0;
    bool have = false;
    for (auto [x, y] : gens) {
        if (y == 0) {
            a = gcd128(a, x);
        } else if (!have) {
            vx = x;
            vy = y;
            have = true;
        } else {
            i64 s, t;
            i64 g = ext_gcd(checked_narrow(vy), checked_narrow(y), s, t);
            i128 zx = (y / g) * vx - (vy / g) * x;
            i128 nx = static_cast<i128>(s) * vx + static_cast<i128>(t) * x;
            a = gcd128(a, zx);
            vx = nx;
            vy = g;
        }
        if (a != 0) vx = mod128(vx, a);
    }
    if (!have || a == 0) throw QuadError("generators do not span a lattice of rank 2");
    if (vy < 0) {
        vy = -vy;
        vx = mod128(-vx, a);
    }
    return IntLattice{a, vx, vy};
}

}  // namespace

FracIdeal FracIdeal::from_generators(i64 D, const std::vector<KElem>& gens) {
    i64 den = 1;
    for (auto& g : gens) den = lcm64(den, lcm64(g.x.den(), g.y.den()));
    std::vector<std::pair<i128, i128>> ig;
    ig.reserve(gens.size());
    for (auto& g : gens) {
        Rational x = g.x * Rational(den), y = g.y * Rational(den);
        ig.emplace_back(x.num(), y.num());
    }
    IntLattice h = hnf(ig);
    i128 g = gcd128(gcd128(gcd128(h.a, h.b), h.c), den);
    FracIdeal L;
    L.D_ = D;
    L.den_ = checked_narrow(den / g);
    L.a_ = checked_narrow(h.a / g);
    L.b_ = checked_narrow(h.b / g);
    L.c_ = checked_narrow(h.c / g);
    return L;
}

FracIdeal FracIdeal::order(i64 D, i64 conductor) {
    return from_generators(D, {KElem{1, 0}, KElem{0, conductor}});
}

FracIdeal FracIdeal::from_form(i64 D, const Form& f) {
    i64 disc = f.disc();
    if (disc % D != 0) throw QuadError("form discriminant not of the form f^2 D");
    auto cf = exact_sqrt(disc / D);
    if (!cf) throw QuadError("form discriminant not of the form f^2 D");
    i64 c = *cf;
    return from_generators(D, {KElem{f.a, 0}, KElem{Rational((-f.b - c) / 2), Rational(c)}});
}

KElem FracIdeal::basis0() const { return KElem{Rational(a_, den_), 0}; }
KElem FracIdeal::basis1() const { return KElem{Rational(b_, den_), Rational(c_, den_)}; }

FracIdeal FracIdeal::operator*(const FracIdeal& o) const {
    std::vector<KElem> g;
    for (auto& x : {basis0(), basis1()})
        for (auto& y : {o.basis0(), o.basis1()}) g.push_back(kmul(x, y, D_));
    return from_generators(D_, g);
}

FracIdeal FracIdeal::operator+(const FracIdeal& o) const {
    return from_generators(D_, {basis0(), basis1(), o.basis0(), o.basis1()});
}

FracIdeal FracIdeal::scaled(const KElem& alpha) const {
    return from_generators(D_, {kmul(alpha, basis0(), D_), kmul(alpha, basis1(), D_)});
}

FracIdeal FracIdeal::conj() const { return from_generators(D_, {kconj(basis0()), kconj(basis1())}); }

FracIdeal FracIdeal::dual() const {
    // dual for the coordinate dot product: (den/(ac)) <(c, -b), (0, a)>
    i64 ac = checked_narrow(static_cast<i128>(a_) * c_);
    return from_generators(D_, {KElem{Rational(checked_narrow(static_cast<i128>(den_) * c_), ac),
                                      Rational(checked_narrow(-static_cast<i128>(den_) * b_), ac)},
                                KElem{0, Rational(checked_narrow(static_cast<i128>(den_) * a_), ac)}});
}

FracIdeal FracIdeal::intersect(const FracIdeal& o) const {
    // bring both to the common denominator, then intersect the integer HNFs
    i64 den = lcm64(den_, o.den_);
    i128 s1 = den / den_, s2 = den / o.den_;
    i128 a1 = a_ * s1, b1 = b_ * s1, c1 = c_ * s1;
    i128 a2 = o.a_ * s2, b2 = o.b_ * s2, c2 = o.c_ * s2;
    i128 g = gcd128(a1, a2);
    i128 A = a1 / g * a2;
    i128 Lc = c1 / gcd128(c1, c2) * c2;
    // rows with y = t*Lc exist in both iff t*u = 0 mod g
    i128 u = mod128((Lc / c1) * b1 - (Lc / c2) * b2, g);
    i128 t0 = g / gcd128(u, g);
    i128 Y = t0 * Lc;
    i128 r1 = mod128((Y / c1) * b1, a1), r2 = mod128((Y / c2) * b2, a2);
    // x = r1 (a1), x = r2 (a2)
    i128 m2 = a2 / g;
    i128 k = 0;
    if (m2 > 1) {
        i128 diff = r2 - r1;
        if (diff % g != 0) throw QuadError("intersect: inconsistent congruences");
        i64 inv = invmod(checked_narrow(mod128(a1 / g, m2)), checked_narrow(m2));
        k = mod128(mod128(diff / g, m2) * inv, m2);
    }
    i128 x = mod128(r1 + a1 * k, A);
    i128 gg = gcd128(gcd128(gcd128(A, x), Y), den);
    FracIdeal L;
    L.D_ = D_;
    L.den_ = checked_narrow(den / gg);
    L.a_ = checked_narrow(A / gg);
    L.b_ = checked_narrow(x / gg);
    L.c_ = checked_narrow(Y / gg);
    return L;
}

bool FracIdeal::contains(const KElem& e) const {
    Rational x = e.x * Rational(den_), y = e.y * Rational(den_);
    if (!x.is_integer() || !y.is_integer()) return false;
    if (y.num() % c_ != 0) return false;
    i128 rest = static_cast<i128>(x.num()) - static_cast<i128>(y.num() / c_) * b_;
    return rest % a_ == 0;
}

bool FracIdeal::contains(const FracIdeal& o) const { return contains(o.basis0()) && contains(o.basis1()); }

Rational FracIdeal::index_in_OK() const {
    return Rational(a_) * Rational(c_) / (Rational(den_) * Rational(den_));
}

i64 FracIdeal::conductor() const { return classify_lattice(*this).first; }

Rational FracIdeal::norm() const { return index_in_OK() / Rational(conductor()); }

FracIdeal FracIdeal::inverse() const {
    Rational n = norm();
    return conj().scaled(KElem{Rational(1) / n, 0});
}

bool FracIdeal::is_integral_for(i64 conductor) const { return order(D_, conductor).contains(*this); }

std::string FracIdeal::str() const {
    std::ostringstream os;
    os << "<" << a_ << ", " << b_ << "+" << c_ << "w>";
    if (den_ != 1) os << "/" << den_;
    return os.str();
}

std::pair<i64, Form> classify_lattice(const FracIdeal& L) {
    // tau = (b + c w)/a; a^2 z^2 - a(2b + c) z + (b^2 + bc + k c^2) = 0
    i128 a = L.ha(), b = L.hb(), c = L.hc();
    i128 k = (1 - L.D()) / 4;
    i128 A = a * a, B = -a * (2 * b + c), C = b * b + b * c + k * c * c;
    i128 g = gcd128(gcd128(A, B), C);
    A /= g;
    B /= g;
    C /= g;
    Form f{checked_narrow(A), checked_narrow(B), checked_narrow(C)};
    i64 disc = f.disc();
    auto cf = exact_sqrt(disc / L.D());
    if (disc % L.D() != 0 || !cf) throw QuadError("classify_lattice: discriminant mismatch");
    return {*cf, reduce(f)};
}

// ---- Pic groups

PicGroup::PicGroup(const QuadOrder& order) : order_(order), elems_(reduced_forms(order.disc())) { finish(); }

PicGroup::PicGroup(const QuadOrder& order, std::vector<Form> elems, std::vector<std::vector<int>> table)
    : order_(order), elems_(std::move(elems)), table_(std::move(table)) {
    finish();
}

void PicGroup::finish() {
    index_.clear();
    for (int i = 0; i < size(); ++i) index_[elems_[i]] = i;
    id_ = index_of(principal_form(order_.disc()));
    if (table_.empty() && size() <= kTableLimit) {
        table_.assign(size(), std::vector<int>(size()));
        for (int i = 0; i < size(); ++i)
            for (int j = i; j < size(); ++j) table_[i][j] = table_[j][i] = index_of(compose(elems_[i], elems_[j]));
    }
    inv_.resize(size());
    for (int i = 0; i < size(); ++i) inv_[i] = index_of(form_inverse(elems_[i]));
    is_square_.assign(size(), false);
    for (int i = 0; i < size(); ++i) is_square_[mul(i, i)] = true;
}

int PicGroup::index_of(const Form& f) const {
    auto it = index_.find(reduce(f));
    if (it == index_.end()) throw QuadError("form " + f.str() + " not in class group");
    return it->second;
}

int PicGroup::mul(int i, int j) const {
    if (!table_.empty()) return table_[i][j];
    return index_of(compose(elems_.at(i), elems_.at(j)));
}

int PicGroup::pow(int i, i64 e) const {
    if (e < 0) return pow(inv(i), -e);
    int r = id_, b = i;
    while (e) {
        if (e & 1) r = mul(r, b);
        b = mul(b, b);
        e >>= 1;
    }
    return r;
}

int PicGroup::element_order(int i) const {
    int k = 1, x = i;
    while (x != id_) {
        x = mul(x, i);
        ++k;
    }
    return k;
}

int PicGroup::squares_index() const {
    int sq = static_cast<int>(std::count(is_square_.begin(), is_square_.end(), true));
    return size() / sq;
}

bool PicGroup::is_cyclic() const {
    for (int i = 0; i < size(); ++i)
        if (element_order(i) == size()) return true;
    return false;
}

namespace {

std::shared_mutex g_cache_mutex;
std::map<std::tuple<i64, i64, i64, int>, std::shared_ptr<const PicGroup>> g_cache;
std::string g_cache_dir;

}  // namespace

void set_pic_cache_dir(const std::string& dir) {
    std::unique_lock lock(g_cache_mutex);
    g_cache_dir = dir;
}

std::string pic_cache_path(const std::string& dir, const QuadOrder& order) {
    return dir + "/pic_D" + std::to_string(order.setting.D) + "_p" + std::to_string(order.setting.p) + "_s" +
           std::to_string(order.s) + ".json";
}

void save_pic_group(const PicGroup& g, const std::string& path) {
    nlohmann::json j;
    j["D"] = g.order().setting.D;
    j["p"] = g.order().setting.p;
    j["s"] = g.order().s;
    j["forms"] = nlohmann::json::array();
    for (auto& f : g.forms()) j["forms"].push_back({f.a, f.b, f.c});
    j["table"] = g.table();
    std::filesystem::path fp(path);
    if (fp.has_parent_path()) std::filesystem::create_directories(fp.parent_path());
    std::ofstream out(path);
    out << j.dump() << "\n";
}

std::shared_ptr<PicGroup> load_pic_group(const std::string& path, const QuadOrder& order) {
    std::ifstream in(path);
    if (!in) return nullptr;
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("D").get<i64>() != order.setting.D || j.at("p").get<i64>() != order.setting.p ||
        j.at("s").get<int>() != order.s)
        throw QuadError("cache file " + path + " describes a different order");
    std::vector<Form> forms;
    for (auto& f : j.at("forms")) forms.push_back(Form{f[0].get<i64>(), f[1].get<i64>(), f[2].get<i64>()});
    auto table = j.at("table").get<std::vector<std::vector<int>>>();
    return std::make_shared<PicGroup>(order, std::move(forms), std::move(table));
}

std::shared_ptr<const PicGroup> pic_group(const QuadOrder& order) {
    auto key = std::make_tuple(order.setting.D, order.setting.p, order.setting.N, order.s);
    std::string dir;
    {
        std::shared_lock lock(g_cache_mutex);
        auto it = g_cache.find(key);
        if (it != g_cache.end()) return it->second;
        dir = g_cache_dir;
    }
    std::unique_lock lock(g_cache_mutex);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
    std::shared_ptr<const PicGroup> g;
    if (!dir.empty()) {
        std::string path = pic_cache_path(dir, order);
        if (auto loaded = load_pic_group(path, order)) {
            g = loaded;
        } else {
            auto built = std::make_shared<PicGroup>(order);
            save_pic_group(*built, path);
            g = built;
        }
    } else {
        g = std::make_shared<PicGroup>(order);
    }
    g_cache[key] = g;
    return g;
}

i64 class_number_analytic(i64 D) {
    if (D >= -4) throw QuadError("class_number_analytic: needs D < -4");
    i64 s = 0;
    for (i64 a = 1; a < -D; ++a) s += kronecker_symbol(D, a) * a;
    if (s % D != 0) throw QuadError("class_number_analytic: non-integral value");
    return s / D;
}

i64 class_number_formula(const QuadOrder& order) {
    i64 h = class_number_analytic(order.setting.D);
    if (order.s == 0) return h;
    i64 p = order.setting.p;
    return h * ipow(p, order.s - 1) * (p - order.setting.eps(p));
}

i64 genus_count(const QuadOrder& order) {
    i64 disc = order.disc();
    int mu = 0;
    for (i64 q : factorize(-disc).primes())
        if (q != 2) ++mu;
    return ipow(2, mu - 1);
}

IdealClass ideal_to_class(const FracIdeal& I, const QuadOrder& order) {
    auto [f, form] = classify_lattice(I);
    if (f != order.conductor()) throw QuadError("ideal not proper for order");
    return IdealClass{order, form};
}

FracIdeal class_ideal(const IdealClass& c) { return FracIdeal::from_form(c.order.setting.D, c.form); }

FracIdeal ds_ideal(const QuadOrder& order) {
    i64 D = order.setting.D;
    KElem sqrtD = KElem::from_sqrt(0, 1);
    FracIdeal sOK = FracIdeal::order(D, 1).scaled(sqrtD);
    return sOK.intersect(FracIdeal::order(D, order.conductor()));
}

IdealClass ds_class(const QuadOrder& order) { return ideal_to_class(ds_ideal(order), order); }

i64 r_count(const IdealClass& a, i64 n) {
    if (n <= 0) return 0;
    if (a.order.disc() >= -4) throw QuadError("r_count: unit group larger than {+-1}");
    Form f = form_inverse(a.form);
    auto reps = form_representations(f.a, f.b, f.c, n);
    // automorphs of a reduced form of discriminant < -4 are +-1
    return static_cast<i64>(reps.size()) / 2;
}

i64 R_count(const IdealClass& a, i64 n) {
    auto g = pic_group(a.order);
    int ia = g->index_of(a);
    i64 total = 0;
    for (int b = 0; b < g->size(); ++b)
        if (g->is_square(g->mul(ia, g->inv(b)))) total += r_count(g->element(b), n);
    return total;
}

i64 delta_of(i64 k, i64 D) {
    if (k < 1) throw QuadError("delta_of: k must be positive");
    i64 g = gcd64(k, D);
    if (g == 1) return 1;
    return ipow(2, static_cast<unsigned>(factorize(g).factors.size()));
}

namespace {

i64 smallest_coprime_value(const Form& f, i64 m, i64 bound) {
    for (i64 n = 1; n <= bound; ++n) {
        if (gcd64(n, m) != 1) continue;
        if (!form_representations(f.a, f.b, f.c, n).empty()) return n;
    }
    return 0;
}

}  // namespace

int genus_character(i64 D1, i64 D2, const IdealClass& a) {
    i64 D = a.order.setting.D;
    if (D1 * D2 != D || !is_fundamental(D1) || !is_fundamental(D2))
        throw QuadError("genus_character: D1, D2 must be fundamental with D1 D2 = D");
    i64 bound = std::max<i64>(4 * D * D, 4 * -a.order.disc());
    i64 n = smallest_coprime_value(a.form, D * a.order.conductor(), bound);
    if (n == 0) throw QuadError("representative search exhausted");
    return kronecker_symbol(D1, n);
}

namespace {

FracIdeal extend_lattice(const FracIdeal& L, i64 to_conductor) {
    return L * FracIdeal::order(L.D(), to_conductor);
}

}  // namespace

std::vector<IdealClass> projection_kernel(const QuadOrder& from, const QuadOrder& to) {
    if (!(from.setting == to.setting) || from.s < to.s) throw QuadError("projection_kernel: incompatible orders");
    auto g = pic_group(from);
    std::vector<IdealClass> out;
    Form id = principal_form(to.disc());
    for (int i = 0; i < g->size(); ++i) {
        FracIdeal L = extend_lattice(class_ideal(g->element(i)), to.conductor());
        auto [f, form] = classify_lattice(L);
        if (f != to.conductor()) throw QuadError("projection_kernel: extension has wrong conductor");
        if (form == id) out.push_back(g->element(i));
    }
    return out;
}

std::vector<Form> ideal_classes_of_norm(i64 D, i64 f, i64 n) {
    std::vector<Form> out;
    if (n <= 0) return out;
    i64 disc = checked_narrow(static_cast<i128>(f) * f * D);
    for (i64 k = 1; k * k <= n; ++k) {
        if (n % (k * k)) continue;
        i64 a = n / (k * k);
        for (i64 B = 0; B < 2 * a; ++B) {
            if (mod64(B - disc, 2)) continue;
            i128 num = static_cast<i128>(B) * B - disc;
            if (num % (4 * a)) continue;
            Form form{a, B, checked_narrow(num / (4 * a))};
            if (!form.is_primitive()) continue;
            out.push_back(reduce(form));
        }
    }
    return out;
}

std::vector<FracIdeal> proper_ideals_of_norm(i64 D, i64 f, i64 n) {
    std::vector<FracIdeal> out;
    if (n <= 0) return out;
    i64 disc = checked_narrow(static_cast<i128>(f) * f * D);
    for (i64 k = 1; k * k <= n; ++k) {
        if (n % (k * k)) continue;
        i64 a = n / (k * k);
        for (i64 B = 0; B < 2 * a; ++B) {
            if (mod64(B - disc, 2)) continue;
            i128 num = static_cast<i128>(B) * B - disc;
            if (num % (4 * a)) continue;
            Form form{a, B, checked_narrow(num / (4 * a))};
            if (!form.is_primitive()) continue;
            out.push_back(FracIdeal::from_form(D, form).scaled(KElem{k, 0}));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- fast counting

IdealCounter::IdealCounter(std::shared_ptr<const PicGroup> g) : g_(std::move(g)) {}

int IdealCounter::prime_class(i64 ell) const {
    const QuadOrder& o = g_->order();
    i64 disc = o.disc();
    if (o.conductor() % ell == 0) throw QuadError("prime_class: prime divides the conductor");
    int e = kronecker_symbol(disc, ell);
    if (e == -1) throw QuadError("prime_class: inert prime");
    i64 B;
    if (ell == 2) {
        B = 1;
    } else if (e == 0) {
        B = ell;
    } else {
        B = *hensel_sqrt(disc, ell, 1);
        if (B % 2 == 0) B += ell;
    }
    i128 num = static_cast<i128>(B) * B - disc;
    return g_->index_of(Form{ell, B, checked_narrow(num / (4 * ell))});
}

std::map<int, i64> IdealCounter::classes_of_norm(i64 n) const {
    std::map<int, i64> cur;
    if (n <= 0) return cur;
    const PicGroup& g = *g_;
    i64 disc = g.order().disc();
    cur[g.identity()] = 1;
    if (n == 1) return cur;
    for (auto [ell, e] : factorize(n).factors) {
        int eps = kronecker_symbol(disc, ell);
        if (eps == -1) {
            if (e % 2) return {};
            continue;
        }
        int c = prime_class(ell);
        std::map<int, i64> next;
        if (eps == 0) {
            int ce = g.pow(c, e);
            for (auto [k, v] : cur) next[g.mul(k, ce)] += v;
        } else {
            for (int i = 0; i <= e; ++i) {
                int ce = g.pow(c, 2 * i - e);
                for (auto [k, v] : cur) next[g.mul(k, ce)] += v;
            }
        }
        cur.swap(next);
    }
    return cur;
}

i64 IdealCounter::r(int cls, i64 n) const {
    auto m = classes_of_norm(n);
    auto it = m.find(cls);
    return it == m.end() ? 0 : it->second;
}

i64 IdealCounter::R(int cls, i64 n) const {
    i64 total = 0;
    for (auto [b, v] : classes_of_norm(n))
        if (g_->is_square(g_->mul(cls, g_->inv(b)))) total += v;
    return total;
}

std::pair<i64, FracIdeal> find_ideal_in_class(const IdealClass& cls, i64 bound,
                                              const std::function<bool(i64)>& pred, int skip) {
    const Form& f = cls.form;
    i64 D = cls.order.setting.D;
    i64 disc = f.disc();
    // vectors with value <= bound: 4a*bound >= |disc| y^2
    i64 ymax = isqrt(checked_narrow(static_cast<i128>(4) * f.a * bound / -disc));
    std::vector<std::tuple<i64, i64, i64>> cand;
    for (i64 y = 0; y <= ymax; ++y) {
        // a x^2 + b y x + c y^2 <= bound
        i128 rest = static_cast<i128>(4) * f.a * bound + static_cast<i128>(disc) * y * y;
        if (rest < 0) continue;
        i64 sq = isqrt(checked_narrow(rest));
        i64 lo = (-f.b * y - sq) / (2 * f.a) - 1, hi = (-f.b * y + sq) / (2 * f.a) + 1;
        for (i64 x = lo; x <= hi; ++x) {
            if (y == 0 && x <= 0) continue;
            i64 v = f.eval(x, y);
            if (v <= 0 || v > bound || !pred(v)) continue;
            cand.emplace_back(v, x, y);
        }
    }
    std::sort(cand.begin(), cand.end());
    i64 last = -1;
    int seen = -1;
    for (auto [v, x, y] : cand) {
        if (v == last) continue;
        last = v;
        if (++seen < skip) continue;
        i64 g = gcd64(x, y);
        Form t = transform_to(f, x / g, y / g);
        FracIdeal I = FracIdeal::from_form(D, t).scaled(KElem{g, 0});
        return {v, I};
    }
    throw QuadError("auxiliary ideal not found");
}

int w_class(const PicGroup& g, i64 w) {
    const QuadSetting& st = g.order().setting;
    i64 disc = g.order().disc();
    auto ram = [&](i64 r) {
        i128 num = static_cast<i128>(r) * r - disc;
        return g.index_of(Form{r, r, checked_narrow(num / (4 * r))});
    };
    int cls = g.identity();
    for (i64 r : factorize(w).primes()) {
        if (st.D % r == 0) {
            cls = g.mul(cls, ram(r));
        } else if (r == st.p) {
            // (sqrt D)_p is the inverse of the product of the ramified primes
            for (i64 q : st.d_primes()) cls = g.mul(cls, g.inv(ram(q)));
        } else {
            throw QuadError("w_class: w must be supported on primes dividing Dp");
        }
    }
    return cls;
}

}  // namespace gz
