#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gz/quad.hpp"

namespace gz {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    i64 D = -7, p = 11, N = 2;
    int s = 1;
    std::string cls = "all";  // "all", a class index, or a form "a,b,c"
    std::string m;            // "1-20", "1,3,5"; empty: command default
    std::string ell = "auto";
    int precision = 10;
    i64 trunc = -1;  // -1: command default (qp^3, suite qp^5)
    i64 qp = 3;      // prime for the q-expansion commands
    std::string newform;
    std::string span = "1,0";
    std::string cache_dir, out;
    int jobs = 1;
    std::uint64_t seed = 20261016;
    i64 audit = -1;  // -1: audit every prime
    bool quick = false;
    bool inject_fault = false;

    // flat "key = value" lines; '#' starts a comment
    void apply(const std::map<std::string, std::string>& kv);
    QuadSetting setting() const { return QuadSetting::make(D, p, N); }
};

std::map<std::string, std::string> read_config_file(const std::string& path);
// "1-5,8,10-12" -> sorted distinct values
std::vector<i64> parse_int_list(const std::string& spec);
// class indices of Pic(O_s) for a selector
std::vector<int> select_classes(const PicGroup& g, const std::string& sel);

// Entry point shared by the executable and the tests; returns the exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gz
