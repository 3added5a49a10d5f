#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "gz/qexp.hpp"

using namespace gz;

namespace {

constexpr i64 kP = 3;
constexpr int kM = 10;

// q prod (1-q^n)^2 (1-q^{11n})^2 by repeated multiplication by binomials
std::vector<i64> eta_naive(i64 T) {
    std::vector<i64> s(T + 1, 0);
    s[1] = 1;
    auto times = [&](i64 k) {
        for (i64 i = T; i >= k; --i) s[i] -= s[i - k];
    };
    for (i64 n = 1; n < T; ++n) {
        times(n);
        times(n);
        if (11 * n < T) {
            times(11 * n);
            times(11 * n);
        }
    }
    return s;
}

}  // namespace

TEST_CASE("eta newform of level 11") {
    auto f = eta_newform_11(400);
    auto naive = eta_naive(400);
    for (i64 n = 1; n <= 400; ++n) REQUIRE(f.a(n) == naive[n]);
    CHECK(f.a(1) == 1);
    CHECK(f.a(2) == -2);
    CHECK(f.a(3) == -1);
    CHECK(f.a(5) == 1);
    CHECK(f.a(7) == -2);
    CHECK(f.a(11) == 1);
    CHECK(f.consistency_failure().empty());
    // Hasse bound
    for (i64 l : {2LL, 3LL, 5LL, 7LL, 13LL, 17LL, 19LL, 23LL}) CHECK(f.a(l) * f.a(l) <= 4 * l);
    CHECK_THROWS_AS(eta_newform_11(100001), QExpError);
}

TEST_CASE("U and V") {
    auto g = QExp::integer({0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2});
    std::vector<i64> big(122, 0);
    big[1] = 1;
    big[11] = 2;
    big[121] = 3;
    auto ug = u_op(QExp::integer(big), 11);
    CHECK(ug.trunc() == 11);
    CHECK(ug.a(1) == 2);
    CHECK(ug.a(11) == 3);
    CHECK(ug.a(0) == 0);
    auto vq = v_op(QExp::integer({0, 1}), 3);
    CHECK(vq.trunc() == 3);
    CHECK(vq.coeffs() == std::vector<i64>{0, 0, 0, 1});
    CHECK(u_op(v_op(g, 3), 3) == g);
    CHECK(v_op(g, 3, 20).trunc() == 20);
    CHECK_THROWS_AS(g.a(12), QExpError);
    CHECK_THROWS_AS(g.to_padic(3, 4) + g, QExpError);
}

TEST_CASE("unit root") {
    auto f = eta_newform_11(30);
    REQUIRE(f.a(3) == -1);
    auto a = alpha_root(f.a(3), kP, kM);
    // brute force: the unique root of X^2 + X + 3 mod 3^10 that is a unit
    i64 mod = ipow(3, 10), found = -1;
    for (i64 x = 0; x < mod; ++x)
        if (x % 3 && (x * x + x + 3) % mod == 0) found = x;
    CHECK(a.residue() == found);
    CHECK(a.residue() % 9 == 2);
    PadicTrunc b = PadicTrunc(kP, kM, kP) / a;
    CHECK(a * b == PadicTrunc(kP, kM, 3));
    CHECK(a + b == PadicTrunc(kP, kM, -1));
    CHECK(alpha_root(-1, 3, 1).residue() == 2);
    CHECK_THROWS_WITH(alpha_root(3, 3, 5), "not ordinary");
}

TEST_CASE("p-stabilizations") {
    auto f = eta_newform_11(200);
    auto st = stabilize(f, kP, kM, 200);
    for (i64 l = 2; l <= 200; ++l) {
        if (!is_prime(l) || l == kP) continue;
        CHECK(st.f0.coeff(l) == PadicTrunc(kP, kM, f.a(l)));
        CHECK(st.f1.coeff(l) == PadicTrunc(kP, kM, f.a(l)));
    }
    CHECK(st.f0.coeff(3) == st.alpha);
    CHECK(st.f1.coeff(3) == st.beta);
    auto uf0 = u_op(st.f0, kP), uf1 = u_op(st.f1, kP);
    CHECK(uf0 == st.f0.truncated(uf0.trunc()).scaled(st.alpha));
    CHECK(uf1 == st.f1.truncated(uf1.trunc()).scaled(st.beta));
}

TEST_CASE("L_f properties on the old span") {
    auto f = eta_newform_11(200);
    OldSpan span(f, kP, kM);
    auto st = stabilize(f, kP, kM, 200);
    PadicTrunc one = span.lift(1), a = span.alpha();
    CHECK(span.lf(span.f()) == one - one / (a * a));
    CHECK(span.lf(span.f1()).residue() == 0);
    CHECK(span.lf(span.f0()) == (one - span.lift(3) / (a * a)) * (one - one / (a * a)));
    // the q-expansion route agrees with coordinates
    CHECK(span.fit(st.f0) == span.f0());
    CHECK(span.fit(st.f1) == span.f1());
    CHECK(lf_functional(span, f.qexp().truncated(200).to_padic(kP, kM)) == span.lf(span.f()));

    std::mt19937_64 rng(20261016);
    std::uniform_int_distribution<i64> coord(0, ipow(3, 10) - 1);
    for (int i = 0; i < 20; ++i) {
        SpanElem g{span.lift(coord(rng)), span.lift(coord(rng))};
        INFO("sample " << i);
        // U equivariance
        CHECK(span.lf(span.u(g)) == a * span.lf(g));
        // U on coordinates matches U on expansions
        auto e = span.to_qexp(g, 200);
        CHECK(span.fit(u_op(e, kP).truncated(60)) == span.u(g));
        // invariance under e^ord
        auto [lim, k] = span.eord(g, 40);
        CHECK(span.lf(lim) == span.lf(g));
        CHECK(span.eigen(lim).second.residue() == 0);
        CHECK(span.u(lim) == span.scale(lim, a));
        // equivariance for T~_m
        for (i64 m = 1; m <= 20; ++m) {
            if (m % 11 == 0) continue;
            CHECK(span.lf(span.t_tilde(g, m)) == st.f0.coeff(m) * span.lf(g));
        }
    }
}

TEST_CASE("ordinary projector") {
    auto f = eta_newform_11(200);
    OldSpan span(f, kP, kM);
    auto [z, k1] = span.eord(span.f1(), 40);
    CHECK(z.c.residue() == 0);
    CHECK(z.cv.residue() == 0);
    auto [zero, k0] = span.eord(SpanElem{span.lift(0), span.lift(0)}, 40);
    CHECK(zero.c.residue() == 0);
    CHECK(zero.cv.residue() == 0);
    CHECK(k0 == 1);
    // the f0 direction is kept, scaled by a unit
    auto [g0, kf] = span.eord(span.f0(), 40);
    CHECK(span.eigen(g0).second.residue() == 0);
    CHECK(span.eigen(g0).first.valuation() == 0);
    CHECK(kf >= 1);
    auto res = eord_truncate(span, span.to_qexp(span.f1(), 100), 40);
    CHECK(res.g == QExp::zero_padic(kP, kM, 100));
    CHECK_THROWS_AS(span.eord(span.f1(), 2), QExpError);
}

TEST_CASE("restricted vanishing and the f0 - f1 counterexample") {
    // all span elements mod 3^2: vanishing at every m prime to N forces g = 0
    auto f = eta_newform_11(60);
    OldSpan small(f, kP, 2);
    int vanishing = 0;
    for (i64 c = 0; c < 9; ++c)
        for (i64 cv = 0; cv < 9; ++cv) {
            SpanElem g{small.lift(c), small.lift(cv)};
            auto e = small.to_qexp(g, 60);
            bool all_zero = true;
            for (i64 m = 1; m <= 60; ++m)
                if (m % 11 && e.a(m)) all_zero = false;
            if (all_zero) {
                ++vanishing;
                CHECK(c == 0);
                CHECK(cv == 0);
                CHECK(small.lf(g).residue() == 0);
            }
        }
    CHECK(vanishing == 1);
    // f0 - f1 vanishes at every m prime to Np but has nonzero L_f
    OldSpan span(f, kP, kM);
    auto st = stabilize(f, kP, kM, 60);
    auto d = st.f0 - st.f1;
    for (i64 m = 1; m <= 60; ++m)
        if (m % 3 && m % 11) CHECK(d.a(m) == 0);
    CHECK(span.lf(span.fit(d)).residue() != 0);
}

TEST_CASE("fit rejects expansions outside the span") {
    auto f = eta_newform_11(60);
    OldSpan span(f, kP, kM);
    auto e = span.to_qexp(span.f(), 60);
    auto bad = e + QExp::padic(kP, kM, [] {
                   std::vector<i64> v(61, 0);
                   v[59] = 1;
                   return v;
               }());
    CHECK_THROWS_WITH(span.fit(bad), "not in f-old span");
    CHECK_THROWS_AS(OldSpan(f, 11, 4), QExpError);
}

TEST_CASE("newform file round trip") {
    auto f = eta_newform_11(50);
    std::string path = "gz_newform_test.txt";
    {
        std::ofstream out(path);
        out << "level 11 weight 2\n";
        for (i64 n = 1; n <= 50; ++n) out << n << " " << f.a(n) << "\n";
    }
    auto g = NewformData::from_file(path);
    CHECK(g.level() == 11);
    CHECK(g.trunc() == 50);
    for (i64 n = 1; n <= 50; ++n) CHECK(g.a(n) == f.a(n));
    {
        std::ofstream out(path);
        out << "level 11 weight 2\n1 1\n2 -2\n3 -1\n4 3\n";
    }
    CHECK_THROWS_AS(NewformData::from_file(path), QExpError);  // a_4 should be 2
    {
        std::ofstream out(path);
        out << "level 11 weight 4\n1 1\n";
    }
    CHECK_THROWS_AS(NewformData::from_file(path), QExpError);
    std::remove(path.c_str());
}
