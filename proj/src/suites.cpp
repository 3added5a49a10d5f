#include "gz/suites.hpp"

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace gz {

using nlohmann::json;

namespace {

std::string lattice_str(const LatticeClass& c) { return "f=" + std::to_string(c.conductor) + " " + c.form.str(); }

// reduced primitive forms of discriminant d < 0 counted directly
std::pair<i64, i64> count_reduced_forms(i64 d) {
    i64 total = 0, ambiguous = 0;
    for (i64 a = 1; 3 * a * a <= -d; ++a)
        for (i64 b = -a + 1; b <= a; ++b) {
            if (((b - d) & 1) != 0) continue;
            i64 num = b * b - d;
            if (num % (4 * a)) continue;
            i64 c = num / (4 * a);
            if (c < a || (c == a && b < 0)) continue;
            if (gcd64(gcd64(a, b < 0 ? -b : b), c) != 1) continue;
            ++total;
            if (b == 0 || b == a || a == c) ++ambiguous;
        }
    return {total, ambiguous};
}

}  // namespace

json SuiteResult::to_json() const {
    json j;
    j["name"] = name;
    j["ok"] = ok();
    j["checked"] = checked;
    j["skipped"] = skipped;
    j["failures"] = failures;
    j["detail"] = detail;
    return j;
}

json to_json(const FormalLogSum& x) {
    json j = json::object();
    for (auto& [q, c] : x.coeffs()) j[std::to_string(q)] = c.str();
    return j;
}

json to_json(const FormalDivisor& d) {
    json j = json::array();
    for (auto& [c, m] : d.terms())
        j.push_back({{"conductor", c.conductor}, {"form", {c.form.a, c.form.b, c.form.c}}, {"mult", m}});
    return j;
}

json to_json(const GzReport& r) {
    return {{"ok", r.ok},
            {"lhs", to_json(r.lhs)},
            {"rhs", to_json(r.rhs)},
            {"rhs_definition", to_json(r.rhs_definition)},
            {"ells", r.ells},
            {"audited", r.audited.size()},
            {"problems", r.problems}};
}

SuiteResult hecke_suite(const QuadSetting& st, i64 m_max, int t_max, int jobs) {
    SuiteResult res{"hecke-vs-oracle"};
    std::vector<LatticeClass> cls;
    for (int t = 0; t <= t_max; ++t) {
        auto g = pic_group(QuadOrder{st, t});
        for (auto& f : g->forms()) cls.push_back(LatticeClass{ipow(st.p, t), f});
    }
    std::vector<std::vector<std::string>> bad(cls.size());
    parallel_for(cls.size(), jobs, [&](size_t i) {
        FracIdeal L = lattice_of(st.D, cls[i]);
        for (i64 m = 1; m <= m_max; ++m) {
            FormalDivisor d = hecke_apply(st.D, m, FormalDivisor(cls[i]));
            if (!(d == hecke_oracle(m, L)) || d.degree() != sigma1(m))
                bad[i].push_back("T_" + std::to_string(m) + " on " + lattice_str(cls[i]));
        }
    });
    for (auto& b : bad)
        for (auto& s : b) res.fail(s);
    res.checked = static_cast<i64>(cls.size()) * m_max;
    res.detail = {{"classes", cls.size()}, {"m_max", m_max}, {"t_max", t_max}};
    return res;
}

SuiteResult euler_suite(const QuadSetting& st, int s_max, int r_max, int jobs) {
    SuiteResult res{"euler-relations"};
    json grid = json::array();
    auto run = [&](int s, int r) {
        auto g = pic_group(QuadOrder{st, s + r});
        std::vector<std::string> bad(g->size());
        parallel_for(g->size(), jobs, [&](size_t i) {
            LatticeClass top{ipow(st.p, s + r), g->form(static_cast<int>(i))};
            auto rep = s == 0 ? euler_relation_check_s0(st, top) : euler_relation_check(st, s, r, top);
            if (!rep.ok) bad[i] = rep.what + " at " + lattice_str(top);
        });
        i64 nbad = 0;
        for (auto& b : bad)
            if (!b.empty()) {
                res.fail(b);
                ++nbad;
            }
        res.checked += g->size();
        grid.push_back({{"s", s}, {"r", r}, {"tops", g->size()}, {"failed", nbad}});
    };
    run(0, 1);
    for (int s = 1; s <= s_max; ++s)
        for (int r = 1; r <= r_max; ++r) run(s, r);
    res.detail = {{"grid", grid}};
    return res;
}

SuiteResult sigma_suite(const QuadSetting& st, int s, i64 n_max, int jobs) {
    SuiteResult res{"sigma-closed-form"};
    auto g = pic_group(QuadOrder{st, s});
    struct Row {
        i64 held = 0;
        std::vector<std::string> bad;
        json witnesses = json::array();
    };
    std::vector<Row> rows(g->size());
    SigmaContext base(st, s, 0);
    parallel_for(g->size(), jobs, [&](size_t a) {
        SigmaContext ctx = base.with_class(static_cast<int>(a));
        for (i64 n = 1; n <= n_max; ++n) {
            if (n % st.p == 0) continue;
            auto c = sigma_prime_closed(ctx, n);
            if (!c.hypothesis) {
                rows[a].witnesses.push_back({{"n", n}, {"witness", c.witness}});
                continue;
            }
            ++rows[a].held;
            if (!(c.value == sigma_prime(ctx, n)))
                rows[a].bad.push_back("class " + g->form(static_cast<int>(a)).str() + " n=" + std::to_string(n));
        }
    });
    json per_class = json::array();
    for (size_t a = 0; a < rows.size(); ++a) {
        res.checked += rows[a].held;
        res.skipped += static_cast<i64>(rows[a].witnesses.size());
        for (auto& b : rows[a].bad) res.fail(b);
        per_class.push_back({{"class", g->form(static_cast<int>(a)).str()},
                             {"held", rows[a].held},
                             {"hypothesis_failures", rows[a].witnesses}});
    }
    res.detail = {{"s", s}, {"n_max", n_max}, {"classes", per_class}};
    return res;
}

namespace {

// per class a: g_index -> number of admissible (c+, c-) with N(c+) + c N(c-) = T
std::vector<std::map<int, i64>> expected_pairs(const QuadSetting& st, int s, i64 ell, i64 m,
                                               const std::vector<EichlerContext>& fam, const IdealCounter& counter) {
    QuadOrder o{st, s};
    const PicGroup& g = counter.group();
    const auto& base = fam.at(0);
    i64 f = o.conductor(), T = m * f * f * -st.D;
    i64 c = base.alg.kase == -1 ? ell * st.N : st.N;
    std::vector<std::pair<int, int>> gy;  // (g_index, class of nbar q gbar^2)
    for (auto& ctx : fam) {
        if (ctx.w != 1) continue;
        FracIdeal gb = ctx.g_ideal.conj();
        gy.emplace_back(ctx.g_index, g.index_of(ideal_to_class(ctx.n_ideal.conj() * ctx.q_ideal * gb * gb, o)));
    }
    std::vector<std::map<int, i64>> out(g.size());
    for (i64 nm = 1; c * nm < T; ++nm) {
        if (nm % st.p == 0 || (base.alg.kase == 0 && nm % ell)) continue;
        auto plus = counter.classes_of_norm(T - c * nm);
        if (plus.empty()) continue;
        auto minus = counter.classes_of_norm(nm);
        if (minus.empty()) continue;
        for (auto [cp, np] : plus) {
            int a = g.inv(cp);
            for (auto [gi, y] : gy) {
                auto it = minus.find(g.mul(a, y));
                if (it != minus.end()) out[a][gi] += np * it->second;
            }
        }
    }
    return out;
}

// two-to-one and 2 delta' facts for the D-set of one (s, ell, a, m); returns failures
std::vector<std::string> pair_image_facts(const QuadSetting& st, int s, int a, i64 ell, i64 m,
                                          const std::vector<PairImage>& images, const EichlerContext& base,
                                          const PicGroup& g, const std::map<int, i64>& expected) {
    std::vector<std::string> bad;
    auto tag = [&](const std::string& what) {
        return what + " (s=" + std::to_string(s) + " ell=" + std::to_string(ell) + " class " + g.form(a).str() +
               " m=" + std::to_string(m) + ")";
    };
    QuadOrder o{st, s};
    i64 f = o.conductor(), T = m * f * f * -st.D;
    i64 c = base.alg.kase == -1 ? ell * st.N : st.N;
    std::map<std::tuple<int, FracIdeal, FracIdeal>, std::map<i64, int>> tally;
    bool ill = false;
    for (auto& pi : images) {
        i64 np = pi.c_plus.norm().num(), nm = pi.c_minus.norm().num();
        if (!ill && (!pi.c_plus.is_integral_for(f) || !pi.c_minus.is_integral_for(f) || pi.c_plus.conductor() != f ||
                     pi.c_minus.conductor() != f || np + c * nm != T || np % st.p == 0 ||
                     g.index_of(ideal_to_class(pi.c_plus, o)) != g.inv(a))) {
            bad.push_back(tag("ill-formed pair image"));
            ill = true;
        }
        tally[{pi.g_index, pi.c_plus, pi.c_minus}][pi.w]++;
    }
    std::map<int, i64> distinct;
    bool wrong_w = false, wrong_two = false;
    for (auto& [key, ws] : tally) {
        i64 nm = std::get<2>(key).norm().num();
        size_t dprime = 1;
        for (auto& [r, mod] : base.moduli)
            if (nm % r == 0) dprime *= 2;
        if (ws.size() != 2 * dprime) wrong_w = true;
        for (auto& [w, k] : ws)
            if (k != 2) wrong_two = true;
        distinct[std::get<0>(key)]++;
    }
    if (wrong_w) bad.push_back(tag("w-choices != 2 delta'"));
    if (wrong_two) bad.push_back(tag("not two-to-one"));
    if (distinct != expected) bad.push_back(tag("pair images do not exhaust the admissible pairs"));
    return bad;
}

}  // namespace

SuiteResult delta_suite(const QuadSetting& st, const std::vector<int>& s_list, const std::vector<i64>& ells, i64 m_max,
                        int jobs) {
    SuiteResult res{"delta-three-way"};
    std::vector<i64> ms;
    for (i64 m = 1; m <= m_max; ++m) ms.push_back(m);
    json grid = json::array();
    for (int s : s_list) {
        auto g = pic_group(QuadOrder{st, s});
        IdealCounter counter(g);
        for (i64 ell : ells) {
            std::vector<std::vector<FormalLogSum>> closed(ms.size()), pairs(ms.size());
            parallel_for(ms.size(), jobs, [&](size_t i) {
                closed[i] = delta_closed_all(st, s, ell, ms[i]);
                pairs[i] = ideal_pair_count_all(st, s, ell, ms[i]);
            });
            auto fam0 = eichler_family(st, s, g->identity(), ell);
            std::vector<std::vector<std::map<int, i64>>> expected(ms.size());
            parallel_for(ms.size(), jobs,
                         [&](size_t i) { expected[i] = expected_pairs(st, s, ell, ms[i], fam0, counter); });
            std::vector<std::vector<std::string>> bad(g->size());
            std::vector<i64> nonzero(g->size(), 0);
            parallel_for(g->size(), jobs, [&](size_t ai) {
                int a = static_cast<int>(ai);
                auto tot = delta_total_multi(st, s, a, ell, ms);
                auto images = dset_pair_images_multi(st, s, a, ell, ms);
                for (size_t i = 0; i < ms.size(); ++i) {
                    std::string at = " (s=" + std::to_string(s) + " ell=" + std::to_string(ell) + " class " +
                                     g->form(a).str() + " m=" + std::to_string(ms[i]) + ")";
                    if (!(tot[i] == closed[i][a])) bad[a].push_back("delta_total != delta_closed" + at);
                    if (!(pairs[i][a] == closed[i][a])) bad[a].push_back("ideal_pair_count != delta_closed" + at);
                    if (!tot[i].is_integral()) bad[a].push_back("delta_total not integral" + at);
                    if (!tot[i].is_zero()) ++nonzero[a];
                    for (auto& b : pair_image_facts(st, s, a, ell, ms[i], images[i], fam0[0], *g, expected[i][a]))
                        bad[a].push_back(b);
                }
            });
            i64 nz = 0, nbad = 0;
            for (int a = 0; a < g->size(); ++a) {
                for (auto& b : bad[a]) res.fail(b);
                nbad += static_cast<i64>(bad[a].size());
                nz += nonzero[a];
            }
            res.checked += static_cast<i64>(g->size()) * m_max;
            json vals = json::object();
            for (size_t i = 0; i < ms.size(); ++i) vals[std::to_string(ms[i])] = to_json(closed[i][g->identity()]);
            grid.push_back({{"s", s},
                            {"ell", ell},
                            {"classes", g->size()},
                            {"nonzero", nz},
                            {"failed", nbad},
                            {"identity_class_values", vals}});
        }
    }
    res.detail = {{"m_max", m_max}, {"grid", grid}};
    return res;
}

SuiteResult gz_suite(const QuadSetting& st, int s, const std::vector<i64>& ms, const std::vector<int>& classes,
                     i64 audit_limit, int jobs) {
    SuiteResult res{"grand-identity"};
    std::vector<std::pair<int, i64>> items;
    for (int a : classes)
        for (i64 m : ms) items.emplace_back(a, m);
    std::vector<GzReport> reps(items.size());
    parallel_for(items.size(), jobs,
                 [&](size_t i) { reps[i] = gz_identity_check(st, s, items[i].first, items[i].second, audit_limit); });
    auto g = pic_group(QuadOrder{st, s});
    json rows = json::array();
    for (size_t i = 0; i < items.size(); ++i) {
        auto [a, m] = items[i];
        std::string at = "class " + g->form(a).str() + " m=" + std::to_string(m);
        if (!reps[i].ok) {
            std::string why;
            for (auto& pr : reps[i].problems) why += "; " + pr;
            res.fail(at + why);
        }
        ++res.checked;
        json r = to_json(reps[i]);
        r["class"] = g->form(a).str();
        r["m"] = m;
        rows.push_back(r);
    }
    res.detail = {{"s", s}, {"audit_limit", audit_limit}, {"reports", rows}};
    return res;
}

SuiteResult lf_suite(const NewformData& f, i64 p, int M, i64 T, std::uint64_t seed, int samples) {
    SuiteResult res{"lf-properties"};
    OldSpan span(f, p, M);
    auto st = stabilize(f, p, M, T);
    PadicTrunc one = span.lift(1), a = span.alpha();
    auto check = [&](bool cond, const std::string& what) {
        ++res.checked;
        if (!cond) res.fail(what);
    };
    check((a * a - span.ap() * a + span.lift(p)).residue() == 0 && a.valuation() == 0, "alpha is not the unit root");
    // value at f and at the non-unit stabilization
    check(span.lf(span.f()) == one - one / (a * a), "L_f(f) != 1 - 1/alpha^2");
    check(span.lf(span.f1()).residue() == 0, "L_f(f1) != 0");
    check(span.fit(st.f0) == span.f0() && span.fit(st.f1) == span.f1(), "stabilizations do not fit the span");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<i64> coord(0, span.lift(0).modulus() - 1);
    for (int i = 0; i < samples; ++i) {
        SpanElem g{span.lift(coord(rng)), span.lift(coord(rng))};
        std::string at = " (sample " + std::to_string(i) + ")";
        // equivariance for U and the prime-to-N Hecke operators
        check(span.lf(span.u(g)) == a * span.lf(g), "L_f(U g) != alpha L_f(g)" + at);
        for (i64 m = 1; m <= 20; ++m) {
            if (gcd64(m, f.level()) != 1) continue;
            check(span.lf(span.t_tilde(g, m)) == st.f0.coeff(m) * span.lf(g),
                  "L_f(T_m g) != a_m(f0) L_f(g), m=" + std::to_string(m) + at);
        }
        // invariance under the ordinary projector
        auto [lim, k] = span.eord(g, 64);
        check(span.lf(lim) == span.lf(g), "L_f(e^ord g) != L_f(g)" + at);
        check(span.eigen(lim).second.residue() == 0, "e^ord leaves an f1 component" + at);
        // U on coordinates against U on the expansion
        check(span.fit(u_op(span.to_qexp(g, T), p)) == span.u(g), "U on coordinates disagrees with U on q-expansions" + at);
    }
    // vanishing at every m prime to N forces g = 0, exhaustively over the span mod p^2
    OldSpan small(f, p, 2);
    i64 mod2 = p * p, vanishing = 0;
    for (i64 c = 0; c < mod2; ++c)
        for (i64 cv = 0; cv < mod2; ++cv) {
            SpanElem g{small.lift(c), small.lift(cv)};
            auto e = small.to_qexp(g, T);
            bool all_zero = true;
            for (i64 m = 1; m <= T && all_zero; ++m)
                if (gcd64(m, f.level()) == 1 && e.a(m)) all_zero = false;
            if (all_zero) {
                ++vanishing;
                check(c == 0 && cv == 0 && small.lf(g).residue() == 0, "nonzero span element vanishing prime to N");
            }
        }
    check(vanishing == 1, "zero span element not detected");
    // negative test: f0 - f1 vanishes prime to Np, yet L_f is nonzero
    QExp d = st.f0 - st.f1;
    bool vanishes = true;
    for (i64 m = 1; m <= T; ++m)
        if (gcd64(m, f.level() * p) == 1 && d.a(m)) vanishes = false;
    PadicTrunc lfd = span.lf(span.fit(d));
    check(vanishes && lfd.residue() != 0, "f0 - f1 negative test");
    res.detail = {{"p", p},
                  {"M", M},
                  {"T", T},
                  {"seed", seed},
                  {"samples", samples},
                  {"alpha", a.residue()},
                  {"lf_f", span.lf(span.f()).residue()},
                  {"lf_f0_minus_f1", lfd.residue()}};
    return res;
}

SuiteResult classnum_suite(const QuadSetting& st, int s_max) {
    SuiteResult res{"class-numbers"};
    json rows = json::array();
    for (int s = 0; s <= s_max; ++s) {
        QuadOrder o{st, s};
        auto g = pic_group(o);
        i64 squares = 0;
        for (int i = 0; i < g->size(); ++i)
            if (g->is_square(i)) ++squares;
        auto [forms, ambiguous] = count_reduced_forms(o.disc());
        i64 formula = class_number_formula(o), genera = genus_count(o);
        std::string at = " (s=" + std::to_string(s) + ")";
        ++res.checked;
        if (g->size() != formula) res.fail("|Pic| != class number formula" + at);
        if (g->size() != forms) res.fail("|Pic| != reduced form count" + at);
        if (g->size() / squares != genera) res.fail("|Pic/Pic^2| != genus count" + at);
        if (ambiguous != genera) res.fail("2-torsion != genus count" + at);
        rows.push_back({{"s", s},
                        {"disc", o.disc()},
                        {"pic", g->size()},
                        {"formula", formula},
                        {"reduced_forms", forms},
                        {"genera", genera},
                        {"pic_mod_squares", g->size() / squares},
                        {"cyclic", g->is_cyclic()}});
    }
    res.detail = {{"orders", rows}};
    return res;
}

}  // namespace gz
