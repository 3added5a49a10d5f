#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gz/cli.hpp"
#include "gz/lfun.hpp"

using namespace gz;
using nlohmann::json;

namespace {

struct Run {
    int status;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int st = run_cli(args, out, err);
    return {st, out.str(), err.str()};
}

}  // namespace

TEST_CASE("integer lists and class selectors") {
    CHECK(parse_int_list("1-3,7, 5") == std::vector<i64>{1, 2, 3, 5, 7});
    CHECK(parse_int_list("4,4") == std::vector<i64>{4});
    CHECK(parse_int_list("-3") == std::vector<i64>{-3});
    CHECK_THROWS_AS(parse_int_list("5-1"), ConfigError);
    CHECK_THROWS_AS(parse_int_list("x"), ConfigError);
    auto g = pic_group(QuadOrder{QuadSetting::make(-7, 11, 2), 1});
    CHECK(select_classes(*g, "all").size() == 10);
    CHECK(select_classes(*g, "3") == std::vector<int>{3});
    CHECK(select_classes(*g, "1,1,212") == std::vector<int>{g->identity()});
    CHECK_THROWS_AS(select_classes(*g, "1,1,2"), ConfigError);
    CHECK_THROWS_AS(select_classes(*g, "10"), ConfigError);
}

TEST_CASE("config file, flags win") {
    std::string path = "gz_cli_test.cfg";
    std::ofstream(path) << "# reference\ns = 2\nm = 1-3  # three values\nclass = 0\n";
    auto r = run({"hecke-table", "--config", path, "--s", "1"});
    REQUIRE(r.status == 0);
    auto j = json::parse(r.out);
    CHECK(j["s"] == 1);
    CHECK(j["classes"].size() == 1);
    CHECK(j["classes"][0]["table"].size() == 3);
    r = run({"hecke-table", "--config", path});
    CHECK(json::parse(r.out)["s"] == 2);
    std::ofstream(path) << "colour = blue\n";
    r = run({"classgroup", "--config", path});
    CHECK(r.status == 2);
    CHECK(r.err.find("unknown key") != std::string::npos);
    std::remove(path.c_str());
    CHECK(run({"classgroup", "--config", "no/such/file"}).status == 2);
    CHECK(run({}).status == 2);
    CHECK(run({"frobnicate"}).status == 2);
}

TEST_CASE("classgroup") {
    auto j = json::parse(run({"classgroup", "--s", "1"}).out);
    CHECK(j["size"] == 10);
    CHECK(j["cyclic"] == true);
    CHECK(j["genera"] == 2);
    CHECK(j["squares"] == 5);
    j = json::parse(run({"classgroup", "--s", "0"}).out);
    CHECK(j["size"] == 1);
    auto r = run({"classgroup", "--D", "-8"});
    CHECK(r.status == 2);
    CHECK(r.err.find("D must be odd") != std::string::npos);
}

TEST_CASE("verify-gz: exit status, fault injection, preconditions, determinism") {
    std::vector<std::string> base{"verify-gz", "--m", "1,3", "--class", "4", "--audit", "30"};
    auto a = run(base);
    CHECK(a.status == 0);
    auto j = json::parse(a.out);
    CHECK(j["ok"] == true);
    CHECK(j["reports"].size() == 2);
    CHECK(j["reports"][1]["m"] == 3);
    auto b = run(base);
    CHECK(a.out == b.out);
    auto jobs = base;
    jobs.insert(jobs.end(), {"--jobs", "3"});
    CHECK(run(jobs).out == a.out);
    auto f = base;
    f.push_back("--inject-fault");
    auto bad = run(f);
    CHECK(bad.status == 1);
    CHECK(json::parse(bad.out)["ok"] == false);
    auto r = run({"verify-gz", "--m", "2"});
    CHECK(r.status == 2);
    CHECK(r.err.find("shares a factor with N") != std::string::npos);
}

TEST_CASE("gcoeff CSV matches the library") {
    auto r = run({"gcoeff", "--m", "11,33", "--class", "3"});
    REQUIRE(r.status == 0);
    QuadSetting st = QuadSetting::make(-7, 11, 2);
    SigmaContext ctx(st, 1, 3);
    std::ostringstream expect;
    expect << "m,prime,coefficient\n";
    for (i64 m : {11, 33}) {
        auto v = g_coeff(ctx, m);
        for (auto& [q, c] : v.coeffs()) expect << m << "," << q << "," << c.str() << "\n";
    }
    CHECK(r.out == expect.str());
    CHECK(run({"gcoeff", "--m", "5"}).status == 2);
}

TEST_CASE("qexp commands") {
    auto j = json::parse(run({"qexp", "lf"}).out);
    i64 mod = 59049, alpha = -1;
    for (i64 x = 1; x < mod; ++x)
        if (x % 3 && (x * x + x + 3) % mod == 0) alpha = x;
    // L_f(f) = 1 - 1/alpha^2
    i64 a2 = alpha * alpha % mod;
    CHECK(mod64((1 - j["lf"].get<i64>()) * a2, mod) == 1);
    auto s = json::parse(run({"qexp", "stabilize", "--precision", "4", "--trunc", "12"}).out);
    CHECK(s["alpha"] == alpha % 81);
    CHECK(s["f0"].size() == 13);
    CHECK(s["f0"][3] == s["alpha"]);
    auto e = json::parse(run({"qexp", "eord", "--span", "1,0"}).out);
    CHECK(e["coeffs"].size() == 28);
    CHECK(run({"qexp", "bogus"}).status == 2);
}
