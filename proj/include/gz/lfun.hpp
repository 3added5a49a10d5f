#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "gz/quad.hpp"

namespace gz {

// Data attached to a class a of Pic(O_s), s >= 1.
class SigmaContext {
public:
    SigmaContext(const QuadSetting& st, int s, int a_index, int aux_rank = 0);
    static SigmaContext for_class(const QuadSetting& st, int s, const Form& a, int aux_rank = 0);

    const QuadSetting& setting() const { return st_; }
    int s() const { return s_; }
    int a() const { return a_; }
    const PicGroup& pic() const { return *pic_; }
    std::shared_ptr<const PicGroup> pic_ptr() const { return pic_; }
    const IdealCounter& counter() const { return counter_; }
    IdealClass a_class() const { return pic_->element(a_); }
    int ds() const { return ds_; }
    i64 Dp() const { return -st_.D * st_.p; }

    // chi_{D1,D2}(a O_K)
    int genus_char(i64 D1) const { return kronecker_symbol(D1, a_norm_); }
    // class of an integral ideal of norm N
    int n_class() const { return n_cls_; }
    // class of a proper integral ideal with norm = -ell mod Dp (cached)
    int c_class(i64 ell) const;
    // same context for another class
    SigmaContext with_class(int a_index) const;

private:
    QuadSetting st_;
    int s_;
    int a_;
    int aux_rank_;
    std::shared_ptr<const PicGroup> pic_;
    IdealCounter counter_;
    int ds_;
    i64 a_norm_;
    int n_cls_;
    std::shared_ptr<std::mutex> mu_;
    std::shared_ptr<std::map<i64, int>> c_cache_;
    // (class, residue) -> first norm found, 0 when none
    std::shared_ptr<std::map<std::pair<int, i64>, i64>> hyp_cache_;

    friend bool genus_hypothesis(const SigmaContext&, i64, std::string*);
};

// class index of the smallest-norm proper integral ideal (over all classes) with norm = target mod modulus
int aux_class(const PicGroup& g, i64 target, i64 modulus, int rank = 0);

int epsilon_factor(const SigmaContext& ctx, i64 n, i64 d);
FormalLogSum sigma_prime(const SigmaContext& ctx, i64 n);

struct ClosedForm {
    bool hypothesis = false;
    FormalLogSum value;
    std::string witness;
};

ClosedForm sigma_prime_closed(const SigmaContext& ctx, i64 n);
// whether some proper integral ideal in the class of a has norm = -nN mod Dp
bool genus_hypothesis(const SigmaContext& ctx, i64 n, std::string* witness = nullptr);

FormalLogSum g_coeff(const SigmaContext& ctx, i64 m);
FormalLogSum g_coeff_twisted_closed(const SigmaContext& ctx, i64 m);

}  // namespace gz
