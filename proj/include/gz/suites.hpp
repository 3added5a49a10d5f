#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gz/hecke.hpp"
#include "gz/lfun.hpp"
#include "gz/qexp.hpp"
#include "gz/quat.hpp"

namespace gz {

// Runs f(0..n-1) on at most `jobs` threads; callers write results by index so output order is fixed.
template <class F>
void parallel_for(size_t n, int jobs, F f) {
    if (jobs <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < jobs && static_cast<size_t>(t) < n; ++t)
        pool.emplace_back([&] {
            for (size_t i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct SuiteResult {
    explicit SuiteResult(std::string n = {}) : name(std::move(n)) {}

    std::string name;
    i64 checked = 0;
    i64 skipped = 0;
    std::vector<std::string> failures;
    nlohmann::json detail = nlohmann::json::object();

    bool ok() const { return failures.empty() && checked > 0; }
    void fail(std::string what) { failures.push_back(std::move(what)); }
    nlohmann::json to_json() const;
};

nlohmann::json to_json(const FormalLogSum& x);
nlohmann::json to_json(const FormalDivisor& d);
nlohmann::json to_json(const GzReport& r);

// T_m against sublattice enumeration, m <= m_max, every class of conductor p^t, t <= t_max
SuiteResult hecke_suite(const QuadSetting& st, i64 m_max, int t_max, int jobs);
// Euler relations for 1 <= s <= s_max, 1 <= r <= r_max on every top class, plus the s = 0 branch
SuiteResult euler_suite(const QuadSetting& st, int s_max, int r_max, int jobs);
// sigma' against its closed form for n <= n_max prime to p, all classes; hypothesis failures are skipped with a witness
SuiteResult sigma_suite(const QuadSetting& st, int s, i64 n_max, int jobs);
// delta_total = ideal_pair_count = delta_closed, integrality, and pair-image multiplicities
SuiteResult delta_suite(const QuadSetting& st, const std::vector<int>& s_list, const std::vector<i64>& ells, i64 m_max,
                        int jobs);
// the identity over classes and m; audit_limit as in gz_identity_check
SuiteResult gz_suite(const QuadSetting& st, int s, const std::vector<i64>& ms, const std::vector<int>& classes,
                     i64 audit_limit, int jobs);
// L_f properties on the f-old span of f at the ordinary prime p
SuiteResult lf_suite(const NewformData& f, i64 p, int M, i64 T, std::uint64_t seed, int samples);
// |Pic| against the class number formula and a reduced-form count, |Pic/Pic^2| against genus theory
SuiteResult classnum_suite(const QuadSetting& st, int s_max);

}  // namespace gz
