#pragma once

#include <string>
#include <vector>

#include "gz/arith.hpp"

namespace gz {

struct QExpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CoeffRing { Integer, Padic };

// Truncated q-expansion a_0 + a_1 q + ... + a_T q^T; p-adic coefficients are residues mod p^M.
class QExp {
public:
    static QExp integer(std::vector<i64> coeffs);
    static QExp padic(i64 p, int M, std::vector<i64> coeffs);
    static QExp zero_padic(i64 p, int M, i64 T);

    CoeffRing ring() const { return ring_; }
    i64 p() const { return p_; }
    int precision() const { return M_; }
    i64 modulus() const { return mod_; }
    i64 trunc() const { return static_cast<i64>(a_.size()) - 1; }
    i64 a(i64 n) const;
    const std::vector<i64>& coeffs() const { return a_; }
    PadicTrunc coeff(i64 n) const;

    QExp to_padic(i64 p, int M) const;
    QExp truncated(i64 T) const;
    QExp operator+(const QExp& o) const;
    QExp operator-(const QExp& o) const;
    QExp scaled(const PadicTrunc& c) const;
    bool operator==(const QExp& o) const;

private:
    void check_same_ring(const QExp& o) const;
    CoeffRing ring_ = CoeffRing::Integer;
    i64 p_ = 0;
    int M_ = 0;
    i64 mod_ = 0;
    std::vector<i64> a_;
};

// a_m <- a_{mp}; T <- floor(T/p)
QExp u_op(const QExp& g, i64 p);
// a_{mp} <- a_m, zero elsewhere; T <- min(T p, cap) (cap < 0: no cap)
QExp v_op(const QExp& g, i64 p, i64 cap = -1);

class NewformData {
public:
    NewformData(i64 level, std::vector<i64> coeffs);  // coeffs[n] = a_n, coeffs[0] = 0
    static NewformData from_file(const std::string& path);

    i64 level() const { return level_; }
    i64 trunc() const { return static_cast<i64>(a_.size()) - 1; }
    i64 a(i64 n) const;
    QExp qexp() const { return QExp::integer(a_); }
    // first failure of a_1 = 1, multiplicativity or the Hecke recursion, empty if none
    std::string consistency_failure() const;

private:
    i64 level_;
    std::vector<i64> a_;
};

// q prod (1 - q^n)^2 (1 - q^{11n})^2 up to q^T
NewformData eta_newform_11(i64 T);

PadicTrunc alpha_root(i64 ap, i64 p, int M);

struct Stabilization {
    PadicTrunc alpha, beta;  // beta = p / alpha
    QExp f0, f1;
};
Stabilization stabilize(const NewformData& f, i64 p, int M, i64 T);

// g = c f + c' V f, coordinates mod p^M
struct SpanElem {
    PadicTrunc c, cv;
};

class OldSpan {
public:
    OldSpan(const NewformData& f, i64 p, int M);

    const PadicTrunc& alpha() const { return alpha_; }
    PadicTrunc beta() const { return beta_; }
    i64 p() const { return p_; }
    int precision() const { return M_; }
    PadicTrunc ap() const { return lift(f_.a(p_)); }
    PadicTrunc lift(i64 v) const { return PadicTrunc(p_, M_, v); }

    SpanElem f() const { return {lift(1), lift(0)}; }
    SpanElem vf() const { return {lift(0), lift(1)}; }
    SpanElem f0() const { return {lift(1), -beta_}; }
    SpanElem f1() const { return {lift(1), -alpha_}; }

    SpanElem add(const SpanElem& x, const SpanElem& y) const;
    SpanElem scale(const SpanElem& x, const PadicTrunc& k) const;
    SpanElem u(const SpanElem& x) const;
    // Hecke operator at m prime to N: U^k T_{m'} for m = p^k m'
    SpanElem t_tilde(const SpanElem& x, i64 m) const;
    // eigen-coordinates g = c0 f0 + c1 f1
    std::pair<PadicTrunc, PadicTrunc> eigen(const SpanElem& x) const;

    QExp to_qexp(const SpanElem& x, i64 T) const;
    // solve on a_1, a_p, then verify every coefficient up to the truncation
    SpanElem fit(const QExp& g) const;

    // U^{k!} until stable; returns the limit and the k at which it stabilized
    std::pair<SpanElem, int> eord(const SpanElem& x, int k_max) const;
    PadicTrunc lf(const SpanElem& x) const;

private:
    NewformData f_;
    i64 p_;
    int M_;
    PadicTrunc alpha_, beta_;
};

struct EordResult {
    QExp g;
    int k = 0;
};
EordResult eord_truncate(const OldSpan& span, const QExp& g, int k_max);
PadicTrunc lf_functional(const OldSpan& span, const QExp& g);

bool operator==(const SpanElem& a, const SpanElem& b);

}  // namespace gz
