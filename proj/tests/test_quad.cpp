#include <doctest.h>

#include <filesystem>
#include <set>

#include "gz/quad.hpp"

using namespace gz;

namespace {

QuadSetting ref() { return QuadSetting::make(-7, 11, 2); }

// naive count of reduced primitive forms by a triple loop
int count_reduced_brute(i64 disc) {
    int n = 0;
    for (i64 a = 1; a * a <= -disc; ++a)
        for (i64 b = -a; b <= a; ++b)
            for (i64 c = a; 4 * a * c <= b * b - disc + 4 * a; ++c) {
                if (b * b - 4 * a * c != disc) continue;
                Form f{a, b, c};
                if (f.is_reduced() && f.is_primitive()) ++n;
            }
    return n;
}

// all index-n sublattices of O_f that are proper O_f-ideals, grouped by class
std::map<Form, i64> hnf_ideal_oracle(i64 D, i64 f, i64 n) {
    std::map<Form, i64> out;
    KElem fw{0, f};
    for (i64 a = 1; a <= n; ++a) {
        if (n % a) continue;
        i64 d = n / a;
        for (i64 b = 0; b < d; ++b) {
            auto L = FracIdeal::from_generators(D, {KElem{a, b * f}, KElem{0, d * f}});
            if (!L.contains(L.scaled(fw))) continue;
            auto [cond, form] = classify_lattice(L);
            if (cond != f) continue;
            out[form]++;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("setting validation") {
    CHECK_NOTHROW(ref());
    CHECK_THROWS(QuadSetting::make(-8, 11, 2));
    CHECK_THROWS(QuadSetting::make(-3, 7, 1));
    CHECK_THROWS(QuadSetting::make(-7, 3, 2));   // 3 inert
    CHECK_THROWS(QuadSetting::make(-7, 11, 3));  // 3 does not split
}

TEST_CASE("form reduction and composition") {
    CHECK(reduce(Form{2, 3, 2}) == Form{1, 1, 2});
    CHECK(reduce(Form{7, 7, 32}).is_reduced());
    for (i64 disc : {-7LL, -847LL, -15LL, -7 * 121 * 121LL}) {
        auto forms = reduced_forms(disc);
        REQUIRE(static_cast<int>(forms.size()) == count_reduced_brute(disc));
        Form id = principal_form(disc);
        for (auto& f : forms) {
            REQUIRE(compose(id, f) == f);
            REQUIRE(compose(f, form_inverse(f)) == id);
        }
    }
}

TEST_CASE("pic_group sizes") {
    QuadSetting st = ref();
    CHECK(pic_group(QuadOrder{st, 0})->size() == 1);
    CHECK(pic_group(QuadOrder{st, 1})->size() == 10);
    CHECK(pic_group(QuadOrder{st, 1})->size() == count_reduced_brute(-847));
    CHECK(pic_group(QuadOrder{st, 2})->size() == 110);
    CHECK(pic_group(QuadOrder{st, 1})->is_cyclic());
    QuadSetting st15 = QuadSetting::make(-15, 17, 1);
    auto g15 = pic_group(QuadOrder{st15, 0});
    CHECK(g15->size() == 2);
    CHECK(g15->forms() == std::vector<Form>{{1, 1, 4}, {2, 1, 2}});
    for (int s = 0; s <= 2; ++s) {
        QuadOrder o{st, s};
        CHECK(pic_group(o)->size() == class_number_formula(o));
        CHECK(pic_group(o)->squares_index() == genus_count(o));
    }
}

TEST_CASE("Gauss composition agrees with lattice multiplication") {
    QuadOrder o{ref(), 1};
    auto g = pic_group(o);
    for (int i = 0; i < g->size(); ++i)
        for (int j = 0; j < g->size(); ++j) {
            FracIdeal L = class_ideal(g->element(i)) * class_ideal(g->element(j));
            REQUIRE(ideal_to_class(L, o).form == g->form(g->mul(i, j)));
        }
    for (int i = 0; i < g->size(); ++i)
        for (int j = 0; j < g->size(); ++j)
            for (int k = 0; k < g->size(); ++k) REQUIRE(g->mul(g->mul(i, j), k) == g->mul(i, g->mul(j, k)));
}

TEST_CASE("ideal_to_class") {
    QuadSetting st = ref();
    for (int s = 0; s <= 2; ++s) {
        QuadOrder o{st, s};
        CHECK(ideal_to_class(FracIdeal::order(-7, o.conductor()), o).form == principal_form(o.disc()));
    }
    QuadOrder ok{st, 0};
    auto p2 = FracIdeal::from_form(-7, Form{2, 1, 1});
    CHECK(ideal_to_class(p2, ok).form == principal_form(-7));
    QuadOrder o15{QuadSetting::make(-15, 17, 1), 0};
    // sqrt(-15) O_K is principal; the ramified prime above 3 is not
    auto d0 = FracIdeal::order(-15, 1).scaled(KElem::from_sqrt(0, 1));
    CHECK(ideal_to_class(d0, o15).form == principal_form(-15));
    auto p3 = FracIdeal::from_form(-15, Form{3, 3, 2});
    auto c = ideal_to_class(p3, o15);
    CHECK(c.form == Form{2, 1, 2});
    CHECK(ideal_to_class(p3 * p3, o15).form == principal_form(-15));
    // O_1 is not proper for O_K
    CHECK_THROWS_WITH(ideal_to_class(FracIdeal::order(-7, 11), ok), "ideal not proper for order");
}

TEST_CASE("ds_class has order at most two") {
    QuadSetting st = ref();
    for (int s = 0; s <= 3; ++s) {
        QuadOrder o{st, s};
        auto g = pic_group(o);
        int d = g->index_of(ds_class(o));
        CHECK(g->mul(d, d) == g->identity());
    }
    // s = 0: the ramified prime above 7
    QuadOrder ok{st, 0};
    CHECK(ds_class(ok).form == reduce(Form{7, 7, 2}));
    CHECK(ds_ideal(ok).norm() == Rational(7));
    QuadOrder o1{st, 1};
    CHECK(ds_ideal(o1).norm() == Rational(7));
}

TEST_CASE("r_count examples and oracle") {
    QuadSetting st = ref();
    QuadOrder ok{st, 0};
    IdealClass id{ok, principal_form(-7)};
    CHECK(r_count(id, 1) == 1);
    CHECK(r_count(id, 2) == 2);
    CHECK(r_count(id, 3) == 0);
    CHECK(r_count(id, 0) == 0);
    CHECK(r_count(id, -5) == 0);
    for (int s = 0; s <= 2; ++s) {
        QuadOrder o{st, s};
        auto g = pic_group(o);
        IdealCounter counter(g);
        i64 f = o.conductor();
        for (i64 n = 1; n <= (s == 2 ? 60 : 150); ++n) {
            auto oracle = hnf_ideal_oracle(-7, f, n);
            auto listed = ideal_classes_of_norm(-7, f, n);
            std::map<Form, i64> from_list;
            for (auto& x : listed) from_list[x]++;
            REQUIRE(from_list == oracle);
            std::map<int, i64> fast;
            if (n % st.p) fast = counter.classes_of_norm(n);
            for (int i = 0; i < g->size(); ++i) {
                i64 r = r_count(g->element(i), n);
                auto it = oracle.find(g->form(i));
                REQUIRE(r == (it == oracle.end() ? 0 : it->second));
                REQUIRE(r == r_count(g->element(g->inv(i)), n));
                if (n % st.p) REQUIRE(r == (fast.count(i) ? fast[i] : 0));
            }
        }
    }
}

TEST_CASE("R_count and genus structure") {
    QuadOrder o{ref(), 1};
    auto g = pic_group(o);
    CHECK(g->squares_index() == 2);
    IdealCounter counter(g);
    for (int i = 0; i < g->size(); ++i) {
        CHECK(R_count(g->element(i), 1) == (g->is_square(i) ? 1 : 0));
        for (i64 n : {2, 9, 14, 23, 29, 36}) {
            CHECK(R_count(g->element(i), n) >= r_count(g->element(i), n));
            CHECK(R_count(g->element(i), n) == counter.R(i, n));
        }
    }
}

TEST_CASE("delta_of") {
    CHECK(delta_of(1, -7) == 1);
    CHECK(delta_of(7, -7) == 2);
    CHECK(delta_of(22, -7) == 1);
    CHECK(delta_of(15, -15) == 4);
}

TEST_CASE("genus characters at D = -15") {
    QuadOrder o{QuadSetting::make(-15, 17, 1), 0};
    auto g = pic_group(o);
    IdealClass c2{o, Form{2, 1, 2}};
    CHECK(genus_character(5, -3, c2) == kronecker_symbol(5, 2));
    CHECK(genus_character(5, -3, c2) == -1);
    for (int i = 0; i < g->size(); ++i) {
        CHECK(genus_character(1, -15, g->element(i)) == 1);
        for (int j = 0; j < g->size(); ++j) {
            int ij = g->mul(i, j);
            CHECK(genus_character(5, -3, g->element(ij)) ==
                  genus_character(5, -3, g->element(i)) * genus_character(5, -3, g->element(j)));
            CHECK(genus_character(5, -3, g->element(g->mul(i, g->mul(j, j)))) == genus_character(5, -3, g->element(i)));
        }
        CHECK((genus_character(5, -3, g->element(i)) == 1) == g->is_square(i));
    }
}

TEST_CASE("projection kernel") {
    QuadSetting st = ref();
    QuadOrder o1{st, 1}, o2{st, 2};
    auto k0 = projection_kernel(o1, o1);
    REQUIRE(k0.size() == 1);
    CHECK(k0[0].form == principal_form(o1.disc()));
    auto k = projection_kernel(o2, o1);
    CHECK(k.size() == 11);
    auto g = pic_group(o2);
    std::set<int> ks;
    for (auto& c : k) ks.insert(g->index_of(c));
    for (int a : ks)
        for (int b : ks) CHECK(ks.count(g->mul(a, b)));
    CHECK(projection_kernel(o1, QuadOrder{st, 0}).size() == 10);
}

TEST_CASE("w classes cover Pic[2]") {
    QuadSetting st = ref();
    for (int s = 1; s <= 2; ++s) {
        auto g = pic_group(QuadOrder{st, s});
        std::set<int> two_torsion, image;
        for (int i = 0; i < g->size(); ++i)
            if (g->mul(i, i) == g->identity()) two_torsion.insert(i);
        for (i64 w : {1LL, 7LL, 11LL, 77LL}) {
            int c = w_class(*g, w);
            CHECK(g->mul(c, c) == g->identity());
            image.insert(c);
        }
        CHECK(image == two_torsion);
    }
}

TEST_CASE("lattice operations") {
    i64 D = -7;
    auto O1 = FracIdeal::order(D, 11);
    auto OK = FracIdeal::order(D, 1);
    CHECK(OK.contains(O1));
    CHECK(O1.intersect(OK) == O1);
    CHECK(O1 + OK == OK);
    auto I = FracIdeal::from_form(D, Form{2, 1, 1});
    CHECK(I * I.inverse() == OK);
    CHECK(I.norm() == Rational(2));
    CHECK(I.conj() * I == OK.scaled(KElem{2, 0}));
}

TEST_CASE("pic cache round trip") {
    auto dir = std::filesystem::temp_directory_path() / "gz_pic_cache_test";
    std::filesystem::remove_all(dir);
    QuadOrder o{ref(), 1};
    auto g = pic_group(o);
    std::string path = pic_cache_path(dir.string(), o);
    save_pic_group(*g, path);
    auto back = load_pic_group(path, o);
    REQUIRE(back);
    CHECK(back->forms() == g->forms());
    CHECK(back->table() == g->table());
    std::filesystem::remove_all(dir);
}
