#include "gz/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "gz/suites.hpp"

namespace gz {

using nlohmann::json;

std::vector<i64> parse_int_list_raw(const std::string& spec);

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

i64 to_i64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        i64 x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects an integer, got \"" + v + "\"");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config: " + key + " expects a boolean, got \"" + v + "\"");
}

Form parse_form(const std::string& s) {
    auto raw = parse_int_list_raw(s);
    if (raw.size() != 3) throw ConfigError("class: expected \"all\", an index, or a form a,b,c");
    return Form{raw[0], raw[1], raw[2]};
}

json setting_json(const QuadSetting& st) { return {{"D", st.D}, {"p", st.p}, {"N", st.N}}; }

json form_json(const Form& f) { return json::array({f.a, f.b, f.c}); }

// first value of the form prime to d
i64 coprime_value(const Form& f, i64 d) {
    for (i64 r = 1; r < 1000; ++r)
        for (i64 x = -r; x <= r; ++x)
            for (i64 y : {-r, r}) {
                i64 v = f.eval(x, y);
                if (v > 0 && gcd64(v, d) == 1) return v;
                v = f.eval(y, x);
                if (v > 0 && gcd64(v, d) == 1) return v;
            }
    throw QuadError("no value prime to the discriminant found");
}

class Emitter {
public:
    Emitter(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}
    // JSON to --out when given, else to the stream
    void json_doc(const json& j) const { text(j.dump(2) + "\n"); }
    void text(const std::string& s) const {
        if (cfg_.out.empty()) {
            out_ << s;
            return;
        }
        std::ofstream f(cfg_.out, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + cfg_.out);
        f << s;
    }

private:
    const RunConfig& cfg_;
    std::ostream& out_;
};

std::vector<i64> m_values(const RunConfig& cfg, const std::string& fallback) {
    auto ms = parse_int_list(cfg.m.empty() ? fallback : cfg.m);
    if (ms.empty()) throw ConfigError("empty m range");
    for (i64 m : ms)
        if (m < 1) throw ConfigError("m must be positive");
    return ms;
}

void require_prime_to_N(const QuadSetting& st, const std::vector<i64>& ms) {
    for (i64 m : ms)
        if (gcd64(m, st.N) != 1)
            throw ConfigError("m = " + std::to_string(m) + " shares a factor with N = " + std::to_string(st.N));
}

int cmd_classgroup(const RunConfig& cfg, const Emitter& em) {
    QuadSetting st = cfg.setting();
    if (cfg.s < 0) throw ConfigError("s must be >= 0");
    QuadOrder o{st, cfg.s};
    auto g = pic_group(o);
    i64 disc = o.disc();
    std::vector<i64> odd;
    for (i64 r : factorize(-disc).primes())
        if (r != 2) odd.push_back(r);
    json elems = json::array();
    for (int i = 0; i < g->size(); ++i) {
        const Form& f = g->form(i);
        json chars = json::object();
        if (odd.size() > 1) {
            i64 n = coprime_value(f, disc);
            for (i64 r : odd) chars[std::to_string(r)] = kronecker_symbol(n, r);
        }
        elems.push_back({{"index", i},
                         {"form", form_json(f)},
                         {"order", g->element_order(i)},
                         {"square", g->is_square(i)},
                         {"genus", chars}});
    }
    i64 squares = 0;
    for (int i = 0; i < g->size(); ++i) squares += g->is_square(i);
    json doc = {{"setting", setting_json(st)},
                {"s", cfg.s},
                {"disc", disc},
                {"size", g->size()},
                {"class_number_formula", class_number_formula(o)},
                {"cyclic", g->is_cyclic()},
                {"squares", squares},
                {"genera", genus_count(o)},
                {"elements", elems}};
    if (cfg.s >= 1) doc["ds_class"] = form_json(ds_class(o).form);
    em.json_doc(doc);
    return 0;
}

int cmd_hecke_table(const RunConfig& cfg, const Emitter& em) {
    QuadSetting st = cfg.setting();
    auto g = pic_group(QuadOrder{st, cfg.s});
    auto classes = select_classes(*g, cfg.cls);
    auto ms = m_values(cfg, "1-12");
    std::vector<json> rows(classes.size());
    std::vector<int> good(classes.size(), 1);
    parallel_for(classes.size(), cfg.jobs, [&](size_t i) {
        LatticeClass c{ipow(st.p, cfg.s), g->form(classes[i])};
        json r = json::array();
        for (i64 m : ms) {
            FormalDivisor d = hecke_apply(st.D, m, FormalDivisor(c));
            bool agree = d == hecke_oracle(m, lattice_of(st.D, c));
            if (!agree) good[i] = 0;
            r.push_back({{"m", m}, {"image", to_json(d)}, {"oracle_agrees", agree}});
        }
        rows[i] = {{"class", form_json(c.form)}, {"table", r}};
    });
    bool ok = std::all_of(good.begin(), good.end(), [](int x) { return x; });
    em.json_doc({{"setting", setting_json(st)}, {"s", cfg.s}, {"ok", ok}, {"classes", rows}});
    return ok ? 0 : 1;
}

int report_suite(const SuiteResult& r, const Emitter& em, const QuadSetting& st) {
    json doc = r.to_json();
    doc["setting"] = setting_json(st);
    em.json_doc(doc);
    return r.ok() ? 0 : 1;
}

int cmd_euler(const RunConfig& cfg, const Emitter& em) {
    QuadSetting st = cfg.setting();
    if (cfg.s < 1) throw ConfigError("euler-check needs s >= 1");
    return report_suite(euler_suite(st, cfg.s, cfg.s, cfg.jobs), em, st);
}

int cmd_gcoeff(const RunConfig& cfg, const Emitter& em) {
    QuadSetting st = cfg.setting();
    if (cfg.s < 1) throw ConfigError("gcoeff needs s >= 1");
    auto g = pic_group(QuadOrder{st, cfg.s});
    auto classes = select_classes(*g, cfg.cls == "all" ? std::to_string(g->identity()) : cfg.cls);
    if (classes.size() != 1) throw ConfigError("gcoeff needs a single class");
    std::string fallback;
    for (i64 k = 1; k <= 10; ++k)
        if (gcd64(k, st.N) == 1) fallback += (fallback.empty() ? "" : ",") + std::to_string(k * st.p);
    auto ms = m_values(cfg, fallback);
    require_prime_to_N(st, ms);
    for (i64 m : ms)
        if (m % st.p) throw ConfigError("gcoeff: m = " + std::to_string(m) + " is not a multiple of p");
    SigmaContext ctx(st, cfg.s, classes[0]);
    std::vector<FormalLogSum> vals(ms.size());
    parallel_for(ms.size(), cfg.jobs, [&](size_t i) { vals[i] = g_coeff(ctx, ms[i]); });
    std::ostringstream os;
    os << "m,prime,coefficient\n";
    for (size_t i = 0; i < ms.size(); ++i)
        for (auto& [q, c] : vals[i].coeffs()) os << ms[i] << "," << q << "," << c.str() << "\n";
    em.text(os.str());
    return 0;
}

std::vector<i64> ell_values(const RunConfig& cfg, const QuadSetting& st, i64 m_max) {
    if (cfg.ell != "auto") {
        auto ells = parse_int_list(cfg.ell);
        for (i64 l : ells)
            if (!is_prime(l) || st.eps(l) == 1 || l == st.p)
                throw ConfigError("ell = " + std::to_string(l) + " is not a nonsplit prime different from p");
        return ells;
    }
    return nonsplit_support(st, cfg.s, m_max);
}

int cmd_delta(const RunConfig& cfg, const Emitter& em) {
    QuadSetting st = cfg.setting();
    if (cfg.s < 1) throw ConfigError("delta needs s >= 1");
    auto g = pic_group(QuadOrder{st, cfg.s});
    auto classes = select_classes(*g, cfg.cls);
    auto ms = m_values(cfg, "1-5");
    auto ells = ell_values(cfg, st, ms.back());
    json rows = json::array();
    bool ok = true;
    for (i64 ell : ells) {
        std::vector<std::vector<FormalLogSum>> closed(ms.size()), pairs(ms.size());
        parallel_for(ms.size(), cfg.jobs, [&](size_t i) {
            closed[i] = delta_closed_all(st, cfg.s, ell, ms[i]);
            pairs[i] = ideal_pair_count_all(st, cfg.s, ell, ms[i]);
        });
        std::vector<std::vector<FormalLogSum>> tot(classes.size());
        parallel_for(classes.size(), cfg.jobs,
                     [&](size_t k) { tot[k] = delta_total_multi(st, cfg.s, classes[k], ell, ms); });
        for (size_t k = 0; k < classes.size(); ++k)
            for (size_t i = 0; i < ms.size(); ++i) {
                int a = classes[k];
                bool agree = tot[k][i] == closed[i][a] && pairs[i][a] == closed[i][a];
                ok = ok && agree;
                rows.push_back({{"ell", ell},
                                {"class", form_json(g->form(a))},
                                {"m", ms[i]},
                                {"delta_total", to_json(tot[k][i])},
                                {"ideal_pair_count", to_json(pairs[i][a])},
                                {"delta_closed", to_json(closed[i][a])},
                                {"agree", agree}});
            }
    }
    em.json_doc({{"setting", setting_json(st)}, {"s", cfg.s}, {"ok", ok}, {"rows", rows}});
    return ok ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, const Emitter& em) {
    QuadSetting st = cfg.setting();
    if (cfg.s < 1) throw ConfigError("verify-gz needs s >= 1");
    auto g = pic_group(QuadOrder{st, cfg.s});
    auto classes = select_classes(*g, cfg.cls);
    auto ms = m_values(cfg, "1,3");
    require_prime_to_N(st, ms);
    i64 audit = cfg.audit < 0 ? std::numeric_limits<i64>::max() : cfg.audit;
    SuiteResult r = gz_suite(st, cfg.s, ms, classes, audit, cfg.jobs);
    if (cfg.inject_fault && !r.detail["reports"].empty()) {
        // corrupt the first stored right-hand side; the comparison must notice
        json& rep = r.detail["reports"][0];
        FormalLogSum rhs;
        for (auto& [q, c] : rep["rhs"].items()) {
            auto v = c.get<std::string>();
            auto slash = v.find('/');
            Rational x = slash == std::string::npos
                             ? Rational(std::stoll(v))
                             : Rational(std::stoll(v.substr(0, slash)), std::stoll(v.substr(slash + 1)));
            rhs.add(std::stoll(q), x);
        }
        rhs.add(2, Rational(1));
        rep["rhs"] = to_json(rhs);
        rep["ok"] = false;
        rep["problems"].push_back("injected fault: rhs perturbed by log(2)");
        r.fail("class " + rep["class"].get<std::string>() + " m=" + std::to_string(rep["m"].get<i64>()) +
               "; injected fault");
    }
    json doc = {{"setting", setting_json(st)},
                {"s", cfg.s},
                {"ok", r.ok()},
                {"failures", r.failures},
                {"audit_limit", cfg.audit},
                {"reports", r.detail["reports"]}};
    em.json_doc(doc);
    return r.ok() ? 0 : 1;
}

NewformData load_newform(const RunConfig& cfg, i64 T) {
    if (!cfg.newform.empty()) return NewformData::from_file(cfg.newform);
    return eta_newform_11(T);
}

json residues(const QExp& g) { return g.coeffs(); }

int cmd_qexp(const RunConfig& cfg, const std::string& action, const Emitter& em) {
    i64 T = cfg.trunc < 0 ? ipow(cfg.qp, 3) : cfg.trunc;
    NewformData f = load_newform(cfg, T);
    if (T > f.trunc()) throw ConfigError("trunc exceeds the newform data");
    int M = cfg.precision;
    json doc = {{"p", cfg.qp}, {"M", M}, {"T", T}, {"level", f.level()}};
    if (action == "stabilize") {
        auto st = stabilize(f, cfg.qp, M, T);
        doc["alpha"] = st.alpha.residue();
        doc["beta"] = st.beta.residue();
        doc["f0"] = residues(st.f0);
        doc["f1"] = residues(st.f1);
    } else {
        OldSpan span(f, cfg.qp, M);
        auto cs = parse_int_list_raw(cfg.span);
        if (cs.size() != 2) throw ConfigError("span expects two coordinates c,c'");
        SpanElem x{span.lift(cs[0]), span.lift(cs[1])};
        doc["span"] = {x.c.residue(), x.cv.residue()};
        if (action == "lf") {
            auto [c0, c1] = span.eigen(x);
            doc["eigen"] = {c0.residue(), c1.residue()};
            doc["lf"] = span.lf(x).residue();
        } else if (action == "eord") {
            auto [lim, k] = span.eord(x, 64);
            doc["k"] = k;
            doc["limit"] = {lim.c.residue(), lim.cv.residue()};
            doc["coeffs"] = residues(span.to_qexp(lim, T));
        } else {
            throw ConfigError("qexp action must be stabilize, lf or eord");
        }
    }
    em.json_doc(doc);
    return 0;
}

int cmd_suite(const RunConfig& cfg, const Emitter& em, std::ostream& out) {
    QuadSetting st = cfg.setting();
    bool q = cfg.quick;
    i64 audit = cfg.audit < 0 ? (q ? 50 : std::numeric_limits<i64>::max()) : cfg.audit;
    auto g1 = pic_group(QuadOrder{st, 1});
    std::vector<int> all;
    for (int a = 0; a < g1->size(); ++a) all.push_back(a);
    std::vector<i64> gz_ms = q ? std::vector<i64>{1, 3} : std::vector<i64>{1, 3, 5};
    i64 T = cfg.trunc < 0 ? ipow(cfg.qp, 5) : cfg.trunc;
    std::vector<SuiteResult> rs;
    rs.push_back(hecke_suite(st, q ? 5 : 60, 2, cfg.jobs));
    rs.push_back(euler_suite(st, 2, 2, cfg.jobs));
    rs.push_back(sigma_suite(st, 1, q ? 50 : 200, cfg.jobs));
    rs.push_back(delta_suite(st, q ? std::vector<int>{1} : std::vector<int>{1, 2}, {3, 7}, q ? 5 : 20, cfg.jobs));
    rs.push_back(gz_suite(st, 1, gz_ms, all, audit, cfg.jobs));
    rs.push_back(lf_suite(load_newform(cfg, T), cfg.qp, cfg.precision, T, cfg.seed, 20));
    rs.push_back(classnum_suite(st, q ? 2 : 4));
    json doc = {{"setting", setting_json(st)}, {"quick", q}, {"seed", cfg.seed}, {"suites", json::array()}};
    bool ok = true;
    out << std::left << std::setw(20) << "suite" << std::setw(8) << "status" << std::setw(10) << "checked"
        << "skipped\n";
    for (auto& r : rs) {
        ok = ok && r.ok();
        out << std::setw(20) << r.name << std::setw(8) << (r.ok() ? "pass" : "FAIL") << std::setw(10) << r.checked
            << r.skipped << "\n";
        for (size_t i = 0; i < r.failures.size() && i < 5; ++i) out << "  " << r.failures[i] << "\n";
        doc["suites"].push_back(r.to_json());
    }
    doc["ok"] = ok;
    if (!cfg.out.empty()) em.json_doc(doc);
    return ok ? 0 : 1;
}

}  // namespace

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
    for (auto& [k, v] : kv) {
        if (k == "D") D = to_i64(k, v);
        else if (k == "p") p = to_i64(k, v);
        else if (k == "N") N = to_i64(k, v);
        else if (k == "s") s = static_cast<int>(to_i64(k, v));
        else if (k == "class") cls = v;
        else if (k == "m") m = v;
        else if (k == "ell") ell = v;
        else if (k == "precision") precision = static_cast<int>(to_i64(k, v));
        else if (k == "trunc") trunc = to_i64(k, v);
        else if (k == "qp") qp = to_i64(k, v);
        else if (k == "newform") newform = v;
        else if (k == "span") span = v;
        else if (k == "cache-dir") cache_dir = v;
        else if (k == "out") out = v;
        else if (k == "jobs") jobs = static_cast<int>(to_i64(k, v));
        else if (k == "seed") seed = static_cast<std::uint64_t>(to_i64(k, v));
        else if (k == "audit") audit = to_i64(k, v);
        else if (k == "quick") quick = to_bool(k, v);
        else if (k == "inject-fault") inject_fault = to_bool(k, v);
        else throw ConfigError("config: unknown key \"" + k + "\"");
    }
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (precision < 1 || precision > 30) throw ConfigError("precision must be in 1..30");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(ln) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::vector<i64> parse_int_list_raw(const std::string& spec) {
    std::vector<i64> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_i64("list", trim(tok)));
    return out;
}

std::vector<i64> parse_int_list(const std::string& spec) {
    std::set<i64> vals;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        auto dash = tok.find('-', 1);
        if (dash == std::string::npos) {
            vals.insert(to_i64("list", tok));
            continue;
        }
        i64 lo = to_i64("list", trim(tok.substr(0, dash))), hi = to_i64("list", trim(tok.substr(dash + 1)));
        if (hi < lo || hi - lo > 100000) throw ConfigError("bad range \"" + tok + "\"");
        for (i64 x = lo; x <= hi; ++x) vals.insert(x);
    }
    return {vals.begin(), vals.end()};
}

std::vector<int> select_classes(const PicGroup& g, const std::string& sel) {
    std::vector<int> out;
    if (sel == "all") {
        for (int i = 0; i < g.size(); ++i) out.push_back(i);
        return out;
    }
    if (sel.find(',') == std::string::npos) {
        i64 i = to_i64("class", trim(sel));
        if (i < 0 || i >= g.size()) throw ConfigError("class index out of range");
        return {static_cast<int>(i)};
    }
    Form f = parse_form(sel);
    if (f.disc() != g.order().disc()) throw ConfigError("class form has the wrong discriminant");
    return {g.index_of(reduce(f))};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact verification of the height identity and its ingredients"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, qexp_action;
    std::map<std::string, std::string> flags;
    auto opt = [&](const std::string& name, const std::string& help) {
        app.add_option_function<std::string>("--" + name, [&flags, name](const std::string& v) { flags[name] = v; },
                                             help);
    };
    app.add_option("--config", config_path, "flat key = value file; flags override it");
    opt("D", "fundamental discriminant");
    opt("p", "split prime");
    opt("N", "level");
    opt("s", "conductor exponent");
    opt("m", "m values, e.g. 1-20 or 1,3,5");
    opt("class", "all, a class index, or a form a,b,c");
    opt("ell", "auto or a list of nonsplit primes");
    opt("precision", "p-adic precision M");
    opt("trunc", "q-expansion truncation T");
    opt("qp", "prime for the q-expansion commands");
    opt("newform", "newform coefficient file (default: level 11 eta product)");
    opt("span", "span coordinates c,c' of g = c f + c' V f");
    opt("cache-dir", "directory for persisted class groups");
    opt("out", "output file");
    opt("jobs", "worker threads");
    opt("seed", "seed for randomized properties");
    opt("audit", "audit primes up to this bound by enumeration (-1: all)");
    app.add_flag_function("--quick", [&flags](std::int64_t) { flags["quick"] = "1"; }, "reduced ranges");
    app.add_flag_function("--inject-fault", [&flags](std::int64_t) { flags["inject-fault"] = "1"; },
                          "corrupt one stored result to exercise failure reporting");

    std::vector<std::pair<std::string, CLI::App*>> cmds;
    for (auto [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"classgroup", "Pic(O_s), orders, squares, genus characters"},
             {"hecke-table", "T_m on classes, checked against sublattice enumeration"},
             {"euler-check", "Euler system relations up to s"},
             {"gcoeff", "linear-term coefficients as CSV (m, prime, coefficient)"},
             {"delta", "quaternionic counts by three routes"},
             {"verify-gz", "height identity over m and classes"},
             {"qexp", "stabilize, lf or eord on the f-old span"},
             {"suite", "full property battery"}})
        cmds.emplace_back(name, app.add_subcommand(name, help));
    for (auto& [name, sc] : cmds) sc->fallthrough();
    app.get_subcommand("qexp")->add_option("action", qexp_action, "stabilize | lf | eord")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg.apply(read_config_file(config_path));
        cfg.apply(flags);
        if (!cfg.cache_dir.empty()) set_pic_cache_dir(cfg.cache_dir);
        Emitter em(cfg, out);
        std::string cmd;
        for (auto& [name, sc] : cmds)
            if (sc->parsed()) cmd = name;
        if (cmd == "classgroup") return cmd_classgroup(cfg, em);
        if (cmd == "hecke-table") return cmd_hecke_table(cfg, em);
        if (cmd == "euler-check") return cmd_euler(cfg, em);
        if (cmd == "gcoeff") return cmd_gcoeff(cfg, em);
        if (cmd == "delta") return cmd_delta(cfg, em);
        if (cmd == "verify-gz") return cmd_verify(cfg, em);
        if (cmd == "qexp") return cmd_qexp(cfg, qexp_action, em);
        return cmd_suite(cfg, em, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace gz
