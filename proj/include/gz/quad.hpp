#pragma once

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gz/arith.hpp"

namespace gz {

struct QuadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadSetting {
    i64 D = -7;
    i64 p = 11;
    i64 N = 2;

    // validates the Heegner-type hypotheses; throws QuadError
    static QuadSetting make(i64 D, i64 p, i64 N);

    int eps(i64 ell) const { return kronecker_symbol(D, ell); }
    // (1 - D)/4, so that omega^2 = omega - k
    i64 k() const { return (1 - D) / 4; }
    std::vector<i64> d_primes() const;

    friend bool operator==(const QuadSetting&, const QuadSetting&) = default;
};

struct QuadOrder {
    QuadSetting setting;
    int s = 0;

    i64 conductor() const { return ipow(setting.p, static_cast<unsigned>(s)); }
    i64 disc() const;
    friend bool operator==(const QuadOrder&, const QuadOrder&) = default;
};

// Binary quadratic form a x^2 + b xy + c y^2.
struct Form {
    i64 a = 1, b = 1, c = 2;

    i64 disc() const;
    bool is_reduced() const;
    bool is_primitive() const { return gcd64(gcd64(a, b), c) == 1; }
    i64 eval(i64 x, i64 y) const;
    std::string str() const;
    friend auto operator<=>(const Form&, const Form&) = default;
};

Form reduce(Form f);
Form compose(const Form& f, const Form& g);
Form form_inverse(const Form& f);
Form principal_form(i64 disc);
// equivalent form f(xX+uY, yX+vY) for gcd(x,y)=1
Form transform_to(const Form& f, i64 x, i64 y);
// equivalent form whose leading coefficient is prime to m
Form form_with_leading_coprime(const Form& f, i64 m);
std::vector<Form> reduced_forms(i64 disc);

// Element x + y*omega of K, omega = (1+sqrt D)/2, with rational coordinates.
struct KElem {
    Rational x, y;

    // from/to the u + v*sqrt(D) coordinates
    static KElem from_sqrt(const Rational& u, const Rational& v);
    Rational u() const;
    Rational v() const;
    bool is_zero() const { return x.is_zero() && y.is_zero(); }
    friend bool operator==(const KElem&, const KElem&) = default;
};

KElem kmul(const KElem& a, const KElem& b, i64 D);
KElem kconj(const KElem& a);
Rational knorm(const KElem& a, i64 D);
Rational ktrace(const KElem& a);
KElem kinv(const KElem& a, i64 D);

// Z-lattice of rank 2 in K, stored as (1/den) * <a, b + c*omega> (Hermite normal form).
class FracIdeal {
public:
    FracIdeal() = default;
    static FracIdeal from_generators(i64 D, const std::vector<KElem>& gens);
    static FracIdeal order(i64 D, i64 conductor);
    // primitive ideal [a, (-b + sqrt disc)/2] attached to a form of discriminant f^2 D
    static FracIdeal from_form(i64 D, const Form& f);

    i64 D() const { return D_; }
    i64 den() const { return den_; }
    i64 ha() const { return a_; }
    i64 hb() const { return b_; }
    i64 hc() const { return c_; }
    KElem basis0() const;
    KElem basis1() const;

    FracIdeal operator*(const FracIdeal& o) const;
    FracIdeal operator+(const FracIdeal& o) const;
    FracIdeal scaled(const KElem& alpha) const;
    FracIdeal conj() const;
    FracIdeal dual() const;
    FracIdeal intersect(const FracIdeal& o) const;
    bool contains(const KElem& e) const;
    bool contains(const FracIdeal& o) const;
    // covolume relative to O_K
    Rational index_in_OK() const;
    // conductor of the multiplier ring
    i64 conductor() const;
    // norm relative to the multiplier ring
    Rational norm() const;
    // inverse, valid for proper ideals: conj / norm
    FracIdeal inverse() const;
    bool is_integral_for(i64 conductor) const;

    friend bool operator==(const FracIdeal&, const FracIdeal&) = default;
    friend auto operator<=>(const FracIdeal&, const FracIdeal&) = default;
    std::string str() const;

private:
    i64 D_ = -7;
    i64 den_ = 1;
    i64 a_ = 1, b_ = 0, c_ = 1;
};

// class of a lattice with arbitrary multiplier ring: (conductor, reduced form)
std::pair<i64, Form> classify_lattice(const FracIdeal& L);

struct IdealClass {
    QuadOrder order;
    Form form;

    friend bool operator==(const IdealClass&, const IdealClass&) = default;
};

class PicGroup {
public:
    static constexpr int kTableLimit = 4000;

    explicit PicGroup(const QuadOrder& order);
    PicGroup(const QuadOrder& order, std::vector<Form> elems, std::vector<std::vector<int>> table);

    const QuadOrder& order() const { return order_; }
    int size() const { return static_cast<int>(elems_.size()); }
    const Form& form(int i) const { return elems_.at(i); }
    IdealClass element(int i) const { return {order_, elems_.at(i)}; }
    const std::vector<Form>& forms() const { return elems_; }
    int index_of(const Form& f) const;
    int index_of(const IdealClass& c) const { return index_of(c.form); }
    int identity() const { return id_; }
    int mul(int i, int j) const;
    int inv(int i) const { return inv_.at(i); }
    int pow(int i, i64 e) const;
    int element_order(int i) const;
    bool is_square(int i) const { return is_square_.at(i); }
    int squares_index() const;
    bool is_cyclic() const;
    bool has_table() const { return !table_.empty(); }
    const std::vector<std::vector<int>>& table() const { return table_; }

private:
    void finish();
    QuadOrder order_;
    std::vector<Form> elems_;
    std::map<Form, int> index_;
    std::vector<std::vector<int>> table_;
    std::vector<int> inv_;
    std::vector<bool> is_square_;
    int id_ = 0;
};

// process-wide cache; optional JSON persistence under cache_dir
std::shared_ptr<const PicGroup> pic_group(const QuadOrder& order);
void set_pic_cache_dir(const std::string& dir);
std::string pic_cache_path(const std::string& dir, const QuadOrder& order);
void save_pic_group(const PicGroup& g, const std::string& path);
std::shared_ptr<PicGroup> load_pic_group(const std::string& path, const QuadOrder& order);

// Dirichlet's class number formula for h(O_K), D < -4
i64 class_number_analytic(i64 D);
// h_K * p^s * (1 - eps(p)/p) for s >= 1
i64 class_number_formula(const QuadOrder& order);
// 2^(mu - 1), mu = number of odd primes dividing the discriminant
i64 genus_count(const QuadOrder& order);

IdealClass ideal_to_class(const FracIdeal& I, const QuadOrder& order);
FracIdeal class_ideal(const IdealClass& c);
IdealClass ds_class(const QuadOrder& order);
FracIdeal ds_ideal(const QuadOrder& order);

i64 r_count(const IdealClass& a, i64 n);
i64 R_count(const IdealClass& a, i64 n);
i64 delta_of(i64 k, i64 D);
int genus_character(i64 D1, i64 D2, const IdealClass& a);
std::vector<IdealClass> projection_kernel(const QuadOrder& from, const QuadOrder& to);

// Multiset of classes of proper integral ideals of a given norm in the order of
// conductor f (arbitrary), by enumeration of primitive ideals [a, (-b+sqrt disc)/2].
std::vector<Form> ideal_classes_of_norm(i64 D, i64 f, i64 n);
// Same for all ideals of the norm, with explicit lattices.
std::vector<FracIdeal> proper_ideals_of_norm(i64 D, i64 f, i64 n);

// Fast r-counts in Pic(O_s) for norms prime to p via prime factorization.
class IdealCounter {
public:
    explicit IdealCounter(std::shared_ptr<const PicGroup> g);

    // class index -> number of proper integral ideals of norm n in it
    std::map<int, i64> classes_of_norm(i64 n) const;
    i64 r(int cls, i64 n) const;
    // sum over the genus of cls
    i64 R(int cls, i64 n) const;
    const PicGroup& group() const { return *g_; }
    // class of a prime ideal above ell (one of the two when split)
    int prime_class(i64 ell) const;

private:
    std::shared_ptr<const PicGroup> g_;
};

// smallest norm of a proper integral ideal in class cls satisfying pred; returns the
// ideal as a lattice. Scans norms 1..bound.
// skip > 0 returns the (skip+1)-th smallest candidate instead.
std::pair<i64, FracIdeal> find_ideal_in_class(const IdealClass& cls, i64 bound,
                                              const std::function<bool(i64)>& pred, int skip = 0);

// value of (sqrt D)_w as a class for w a product of primes dividing Dp
int w_class(const PicGroup& g, i64 w);

}  // namespace gz
