#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gz/lfun.hpp"
#include "gz/quad.hpp"

namespace gz {

// Definite algebra K + Kj, j^2 = -j_norm, j x = conj(x) j, ramified at ell.
struct QuatAlg {
    i64 ell = 0;
    int kase = -1;  // eps(ell): -1 inert, 0 ramified
    i64 q = 0;
    i64 j_norm = 0;  // ell*q (inert) or q (ramified)
};

QuatAlg choose_q(const QuadSetting& st, i64 ell);

struct QuatElem {
    KElem alpha, beta;  // alpha + beta j
    friend bool operator==(const QuatElem&, const QuatElem&) = default;
};

QuatElem quat_mul(const QuatElem& a, const QuatElem& b, i64 D, i64 j_norm);
QuatElem quat_conj(const QuatElem& a);
Rational quat_norm(const QuatElem& a, i64 D, i64 j_norm);
Rational quat_trace(const QuatElem& a);

// rho_r(alpha') = x * rho_r(beta') mod modulus, rho_r(u + v omega) = u + v/2
struct Congruence {
    i64 r = 0;
    i64 modulus = 0;
    i64 x = 0;
};

// One twisted lattice R^{wg} a. Elements are written b = alpha + beta j and
// handled through alpha' = p^s sqrt(D) alpha, beta' = p^s sqrt(D) beta.
struct EichlerContext {
    QuadSetting setting;
    int s = 1;
    QuatAlg alg;
    FracIdeal n_ideal, q_ideal, l_ideal;  // l_ideal = O_s unless ell ramifies
    FracIdeal a_ideal;
    std::map<i64, i64> x_roots;  // r -> X_r, r in W_0
    std::map<i64, i64> moduli;   // r -> r^{e_r}
    i64 w = 1;
    FracIdeal g_ideal;
    int g_index = 0;  // position in the G list
};

struct EichlerLattice {
    FracIdeal alpha, beta;  // alpha' in alpha, beta' in beta
    std::vector<Congruence> cong;
};

struct TwistData {
    std::vector<i64> w0;             // primes of W_0
    std::vector<i64> ws;             // all products of subsets of w0
    std::vector<int> g_classes;      // one class per square class
    std::vector<FracIdeal> g_ideals;  // integral representatives
};

TwistData twist_data(const QuadSetting& st, int s, i64 ell, i64 coprime_to);

// all contexts R^{wg} a for the class a of Pic(O_s); a_rank picks another representative of a
std::vector<EichlerContext> eichler_family(const QuadSetting& st, int s, int a_cls, i64 ell, int a_rank = 0);
EichlerContext eichler_context(const QuadSetting& st, int s, int a_cls, i64 ell, i64 w, int g_index, int a_rank = 0);

EichlerLattice eichler_lattice(const EichlerContext& ctx);
std::array<QuatElem, 4> eichler_basis(const EichlerContext& ctx);
bool eichler_contains(const EichlerContext& ctx, const QuatElem& b);
// det of the trace form trd(x conj(y)) on a Z-basis
Rational gram_determinant(const std::array<QuatElem, 4>& basis, i64 D, i64 j_norm);

QuatElem from_scaled(const EichlerContext& ctx, const KElem& alpha_s, const KElem& beta_s);
// scaled coordinates (alpha', beta')
std::pair<KElem, KElem> to_scaled(const EichlerContext& ctx, const QuatElem& b);

// D-set of R^{wg} a at m; val_offset shifts the required p-valuations (0 is the real condition)
std::vector<QuatElem> enumerate_Dset(const EichlerContext& ctx, i64 m, int val_offset = 0);
Rational dset_weight(const EichlerContext& ctx, const QuatElem& b);
FormalLogSum delta_S(const EichlerContext& ctx, i64 m, int val_offset = 0);

// 1/2 sum over w, g of delta_S, for several m at once
std::vector<FormalLogSum> delta_total_multi(const QuadSetting& st, int s, int a_cls, i64 ell,
                                            const std::vector<i64>& ms, int val_offset = 0, int a_rank = 0);
FormalLogSum delta_total(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m, int val_offset = 0);

// (c+, c-) = (alpha' a^{-1}, beta' L_beta^{-1}) for every D-set element of every twist
struct PairImage {
    i64 w = 1;
    int g_index = 0;
    FracIdeal c_plus, c_minus;
};
std::vector<PairImage> dset_pair_images(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m);
std::vector<std::vector<PairImage>> dset_pair_images_multi(const QuadSetting& st, int s, int a_cls, i64 ell,
                                                          const std::vector<i64>& ms);

// multiplicity-weighted count of ideal pairs, by norm scans; one value per class
std::vector<FormalLogSum> ideal_pair_count_all(const QuadSetting& st, int s, i64 ell, i64 m);
FormalLogSum ideal_pair_count(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m);
// closed form; one value per class
std::vector<FormalLogSum> delta_closed_all(const QuadSetting& st, int s, i64 ell, i64 m);
FormalLogSum delta_closed(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m);

// log(ell) * (Delta(m p^2) - Delta(m)) from the closed form
FormalLogSum nonsplit_height_part(const QuadSetting& st, int s, int a_cls, i64 ell, i64 m);

struct GzReport {
    bool ok = false;
    FormalLogSum lhs, rhs, rhs_definition;
    std::vector<i64> ells;         // primes with a nonzero local term
    std::vector<i64> audited;      // primes also checked by D-set enumeration
    std::vector<std::string> problems;
};

// sum over nonsplit ell of the height parts against the twisted coefficients
// at m p^{2s} and m p^{2s+2}; primes ell <= audit_limit are audited by enumeration
GzReport gz_identity_check(const QuadSetting& st, int s, int a_cls, i64 m, i64 audit_limit);

// nonsplit primes ell != p that can contribute at level m (all primes <= m p^{2s} |D| / N)
std::vector<i64> nonsplit_support(const QuadSetting& st, int s, i64 m);

}  // namespace gz
