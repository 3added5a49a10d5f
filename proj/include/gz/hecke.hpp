#pragma once

#include <map>
#include <string>
#include <vector>

#include "gz/quad.hpp"

namespace gz {

// Homothety class of a lattice in K: conductor of its multiplier ring plus the
// reduced form of discriminant conductor^2 * D.
struct LatticeClass {
    i64 conductor = 1;
    Form form;

    // p-exponent of the conductor
    int t(i64 p) const;
    friend auto operator<=>(const LatticeClass&, const LatticeClass&) = default;
    friend bool operator==(const LatticeClass&, const LatticeClass&) = default;
};

LatticeClass lattice_class(const FracIdeal& L);
LatticeClass lattice_class(const IdealClass& c);
FracIdeal lattice_of(i64 D, const LatticeClass& c);

class FormalDivisor {
public:
    FormalDivisor() = default;
    explicit FormalDivisor(const LatticeClass& c, i64 mult = 1) { add(c, mult); }

    void add(const LatticeClass& c, i64 mult);
    const std::map<LatticeClass, i64>& terms() const { return terms_; }
    i64 degree() const;
    bool empty() const { return terms_.empty(); }
    // every term has this conductor
    bool homogeneous(i64 conductor) const;

    FormalDivisor& operator+=(const FormalDivisor& o);
    FormalDivisor& operator-=(const FormalDivisor& o);
    FormalDivisor operator+(const FormalDivisor& o) const;
    FormalDivisor operator-(const FormalDivisor& o) const;
    friend bool operator==(const FormalDivisor&, const FormalDivisor&) = default;

private:
    std::map<LatticeClass, i64> terms_;
};

// T_m computed from lattice-counting multiplicities,
// one prime power at a time.
FormalDivisor hecke_apply(i64 D, i64 m, const FormalDivisor& d);
// independent oracle: classify all index-m sublattices
FormalDivisor hecke_oracle(i64 m, const FracIdeal& L);

// image of a class under L -> L O', O' of conductor dividing c.conductor
LatticeClass extend_class(i64 D, const LatticeClass& c, i64 to_conductor);
// classes of conductor d*f that become trivial at conductor d (f a prime power)
std::vector<Form> ring_class_kernel(i64 D, i64 d, i64 f);
// some class of conductor d*f extending to X (conductor d)
Form lift_class(const Form& X, i64 f);

FormalDivisor norm_push(const QuadSetting& st, int s, int r, const FormalDivisor& d);

// h_t = top class extended to conductor p^t, t = 0..top_t
std::vector<LatticeClass> tower(const QuadSetting& st, const LatticeClass& top);

struct RelationReport {
    bool ok = false;
    std::string what;
    FormalDivisor lhs, rhs;
};

// T_{p^r}[h_s] = norm_push[h_{s+r}] + T_{p^{r-1}}[h_{s-1}], tower from top (conductor p^{s+r})
RelationReport euler_relation_check(const QuadSetting& st, int s, int r, const LatticeClass& top);
// s = 0: T_p[h_0] = norm_push[h_1] + [p h_0] + [pbar h_0], top at conductor p
RelationReport euler_relation_check_s0(const QuadSetting& st, const LatticeClass& top);

std::map<int, i64> conductor_support(const QuadSetting& st, i64 m0, const FormalDivisor& d);

// T_{m0}(T_{p^{r+2}}[h_s] - T_{p^{r+1}}[h_{s-1}]) = T_{m0}(norm_push_{s,r+2}[h_{s+r+2}]), and the
// companion with r+1; top at conductor p^{s+r+2}
std::vector<RelationReport> fexp_divisor_identity(const QuadSetting& st, i64 m0, int r, int s, const LatticeClass& top);

}  // namespace gz
