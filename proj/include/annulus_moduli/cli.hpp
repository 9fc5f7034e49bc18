#pragma once

// Command-line front end:
//   eval <fn> [--params]
//   density <law> [--params] [--grid min,max,count]
//   sample <law> --n N --seed S [--params]
//   mc <experiment> [--params]
//   verify --suite {specfun,partition,laws,mc,all} [--json report.json]
// Exit status: 0 success, 1 check failure or numerical failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmc_mc.hpp"
#include "laws.hpp"
#include "partition.hpp"
#include "samplers.hpp"
#include "specfun.hpp"
#include "stats.hpp"
#include "verify.hpp"

namespace annulus_moduli::cli {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Named numeric parameters collected from --name value options.
class Params {
public:
    std::map<std::string, std::string> raw;

    bool has(const std::string& k) const { return raw.count(k) && !raw.at(k).empty(); }

    double num(const std::string& k) const {
        if (!has(k)) throw UsageError("missing --" + k);
        try {
            std::size_t pos = 0;
            const double v = std::stod(raw.at(k), &pos);
            if (pos != raw.at(k).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::logic_error&) {
            throw UsageError("--" + k + " expects a number, got '" + raw.at(k) + "'");
        }
    }
    double num(const std::string& k, double def) const { return has(k) ? num(k) : def; }
    long integer(const std::string& k, long def) const {
        const double v = num(k, static_cast<double>(def));
        if (v != std::floor(v)) throw UsageError("--" + k + " expects an integer");
        return static_cast<long>(v);
    }
    std::vector<double> list(const std::string& k) const {
        if (!has(k)) throw UsageError("missing --" + k);
        std::vector<double> out;
        std::stringstream ss(raw.at(k));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::logic_error&) {
                throw UsageError("--" + k + " expects a comma-separated list of numbers");
            }
        }
        return out;
    }
};

// A table of named columns with a metadata header.
struct Table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string csv() const {
        std::string s = "#";
        for (const auto& [k, v] : meta) s += " " + k + "=" + v;
        s += "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
        s += "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + fmt17(r[i]);
            s += "\n";
        }
        return s;
    }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json j;
        nlohmann::ordered_json m = nlohmann::ordered_json::object();
        for (const auto& [k, v] : meta) m[k] = v;
        j["meta"] = m;
        j["columns"] = columns;
        j["rows"] = rows;
        return j;
    }
};

// Writes to a temporary sibling and renames, so readers never see a partial file.
inline void write_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw UsageError("cannot write " + path);
        f << text;
    }
    std::filesystem::rename(tmp, path);
}

inline void emit(const std::string& text, const std::string& out, std::ostream& os) {
    if (out.empty())
        os << text;
    else
        write_atomic(out, text);
}

inline void emit_table(const Table& t, const std::string& format, const std::string& out, std::ostream& os) {
    emit(format == "json" ? t.json().dump(2) + "\n" : t.csv(), out, os);
}

inline std::vector<std::pair<std::string, std::string>> resolved(const std::string& head, const std::string& target, const Params& p) {
    std::vector<std::pair<std::string, std::string>> m{{head, target}};
    for (const auto& [k, v] : p.raw)
        if (!v.empty()) m.emplace_back(k, v);
    return m;
}

// ---------------------------------------------------------------------------

using Outputs = std::vector<std::pair<std::string, double>>;
using EvalFn = std::function<Outputs(const Params&)>;

inline const std::map<std::string, EvalFn>& eval_table() {
    static const std::map<std::string, EvalFn> t = {
        {"eta", [](const Params& p) { return Outputs{{"value", dedekind_eta(p.num("tau"))}}; }},
        {"theta1", [](const Params& p) { return Outputs{{"value", jacobi_theta1(p.num("x"), p.num("tau"))}}; }},
        {"gamma1pix",
         [](const Params& p) {
             const auto g = gamma_one_plus_ix(p.num("x"));
             return Outputs{{"re", g.real()}, {"im", g.imag()}};
         }},
        {"cle-params",
         [](const Params& p) {
             const auto c = cle_params(p.num("kappa"));
             return Outputs{{"g", c.g}, {"chi", c.chi}, {"n", c.n}, {"c", c.c}};
         }},
        {"z-open",
         [](const Params& p) {
             return Outputs{{"value", z_open(p.num("tau"), cle_params(p.num("kappa")), winding_weight(p.num("chi-prime")))}};
         }},
        {"z-closed",
         [](const Params& p) {
             return Outputs{{"value", z_closed(p.num("tau"), cle_params(p.num("kappa")), winding_weight(p.num("chi-prime")))}};
         }},
        {"z-eta",
         [](const Params& p) {
             return Outputs{{"value", z_eta_product(p.num("tau"), cle_params(p.num("kappa")), winding_weight(p.num("chi-prime")))}};
         }},
        {"z-eta-laplace",
         [](const Params& p) {
             return Outputs{{"value", z_eta_laplace_closed(p.num("t"), cle_params(p.num("kappa")), winding_weight(p.num("chi-prime")))}};
         }},
        {"nesting-ratio",
         [](const Params& p) {
             return Outputs{{"value", nesting_ratio(p.num("tau"), cle_params(p.num("kappa")), winding_weight(p.num("chi-prime")))}};
         }},
        {"z-cardy", [](const Params& p) { return Outputs{{"value", z_cardy(p.num("tau"))}}; }},
        {"cle-mgf",
         [](const Params& p) {
             return Outputs{{"value", cle_mod_mgf(p.num("lambda"), cle_params(p.num("kappa")), static_cast<int>(p.integer("j", 1)))}};
         }},
        {"cr-moment",
         [](const Params& p) {
             return Outputs{{"value", cr_moment(p.num("lambda"), cle_params(p.num("kappa")), static_cast<int>(p.integer("j", 1)))}};
         }},
        {"mod-cr-factor", [](const Params& p) { return Outputs{{"value", mod_cr_factor(p.num("lambda"), cle_params(p.num("kappa")))}}; }},
        {"hitting-mgf", [](const Params& p) { return Outputs{{"value", hitting_time_mgf(p.num("lambda"), cle_params(p.num("kappa")))}}; }},
        {"gmc-cf", [](const Params& p) { return Outputs{{"value", gmc_ratio_cf(p.num("x"), lqg_params(p.num("gamma")), p.num("tau"))}}; }},
        {"lateral-cf", [](const Params& p) { return Outputs{{"value", lateral_cf(p.num("x"), lqg_params(p.num("gamma")).gamma)}}; }},
        {"ba-weight", [](const Params& p) { return Outputs{{"value", ba_weight(p.num("tau"))}}; }},
        {"qa-weight", [](const Params& p) { return Outputs{{"value", qa_weight(p.num("tau"), lqg_params(p.num("gamma")))}}; }},
        {"lf-boundary-moment",
         [](const Params& p) {
             const auto v = lf_boundary_moment(p.num("x"), lqg_params(p.num("gamma")), p.num("tau"));
             return Outputs{{"re", v.real()}, {"im", v.imag()}};
         }},
        {"bootstrap",
         [](const Params& p) {
             const auto l = lqg_params(p.num("gamma"));
             const auto b = bootstrap_rhs(p.num("tau"), l, p.num("mu0"));
             return Outputs{{"raw", b.raw}, {"simplified", b.simplified}, {"lhs", bootstrap_lhs(p.num("tau"), l, p.num("mu0"))}};
         }},
        {"lf-disk-mass", [](const Params& p) { return Outputs{{"value", lf_disk_mass(p.num("alpha"), lqg_params(p.num("gamma")), p.num("ell"))}}; }},
        {"nested",
         [](const Params& p) {
             const auto c = cle_params(p.num("kappa"));
             const auto w = winding_weight(p.num("chi-prime", c.chi));
             const auto l = nested_expectation(p.num("t"), c, w, static_cast<int>(p.integer("jmax", 40)));
             const auto r = nesting_rhs(p.num("t"), c, w);
             return Outputs{{"lhs", l.value}, {"tail_bound", l.tail_bound}, {"rhs_quadrature", r.quadrature}, {"rhs_closed", r.closed}};
         }},
    };
    return t;
}

inline const std::vector<std::string>& param_names() {
    static const std::vector<std::string> n = {"tau", "x",  "kappa", "chi-prime", "lambda", "j",   "gamma",   "mu0",
                                               "alpha", "ell", "t",    "jmax",      "a",      "b",   "theta",   "dt",
                                               "n",   "seed", "samples", "n-boundary", "m-cut", "grid"};
    return n;
}

inline std::optional<Grid> parse_grid(const Params& p, bool log_spaced) {
    if (!p.has("grid")) return std::nullopt;
    const auto v = p.list("grid");
    if (v.size() != 3 || v[2] != std::floor(v[2])) throw UsageError("--grid expects min,max,count");
    const auto n = static_cast<std::size_t>(v[2]);
    return log_spaced ? Grid::log_spaced(v[0], v[1], n) : Grid::uniform(v[0], v[1], n);
}

inline Table table_from_density(const DensityTable& d, std::vector<std::pair<std::string, std::string>> meta) {
    Table t;
    t.meta = std::move(meta);
    t.meta.emplace_back("mass", fmt17(d.mass));
    t.meta.emplace_back("tail_bound", fmt17(d.tail_bound));
    t.columns = {"x", "density"};
    for (std::size_t i = 0; i < d.size(); ++i) t.rows.push_back({d.grid[i], d.values[i]});
    return t;
}

inline Table run_density(const std::string& law, const Params& p) {
    const auto meta = resolved("density", law, p);
    if (law == "rho") {
        const auto g = parse_grid(p, true);
        return table_from_density(g ? rho_tau_density(p.num("tau"), *g) : rho_tau_density(p.num("tau")), meta);
    }
    if (law == "ba") {
        const auto g = parse_grid(p, false);
        return table_from_density(g ? ba_modulus_density(p.num("a"), p.num("b"), *g) : ba_modulus_density(p.num("a"), p.num("b")), meta);
    }
    if (law == "cle") {
        const auto c = cle_params(p.num("kappa"));
        const int j = static_cast<int>(p.integer("j", 1));
        const auto g = parse_grid(p, false);
        return table_from_density(g ? cle_mod_density(c, j, *g) : cle_mod_density(c, j), meta);
    }
    if (law == "y0") {
        const Grid g = parse_grid(p, false).value_or(Grid::uniform(1e-3, 10.0, 2000));
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) v[i] = y0_density(g[i]);
        return table_from_density(DensityTable(g.points(), std::move(v), y0_survival(g.max())), meta);
    }
    throw UsageError("unknown density law '" + law + "' (rho, ba, cle, y0)");
}

inline Table run_sample(const std::string& law, const Params& p) {
    const long n = p.integer("n", -1);
    if (n < 1) throw UsageError("sample requires --n N >= 1");
    if (!p.has("seed")) throw UsageError("sample requires --seed S");
    const auto seed = static_cast<std::uint64_t>(p.integer("seed", 0));
    Table t;
    t.meta = resolved("sample", law, p);
    RngStream rng(seed, 0);
    PathConfig cfg;
    cfg.dt = p.num("dt", cfg.dt);
    const auto un = static_cast<std::size_t>(n);
    const auto from_table = [&](const TableSampler& s) {
        t.columns = {"value"};
        for (double v : s.draw(un, rng)) t.rows.push_back({v});
    };
    if (law == "ba") {
        from_table(ba_modulus_sampler(p.num("a"), p.num("b")));
    } else if (law == "cle") {
        from_table(cle_modulus_sampler(cle_params(p.num("kappa")), static_cast<int>(p.integer("j", 1))));
    } else if (law == "rho") {
        from_table(TableSampler(rho_tau_density(p.num("tau"))));
    } else if (law == "bm-exit" || law == "last-zero") {
        const double a = law == "bm-exit" ? p.num("a", 0.0) : 0.0;
        const PathBatch b = simulate_paths(a, un, cfg, seed);
        t.meta.emplace_back("censored", std::to_string(b.censored));
        t.columns = {"exit_time", "last_zero"};
        for (const auto& s : b.samples) t.rows.push_back({s.exit_time, s.last_zero});
    } else if (law == "cle-paths") {
        const auto c = cle_params(p.num("kappa"));
        t.columns = {"value"};
        for (std::size_t i = 0; i < un; ++i) t.rows.push_back({sample_cle_modulus_paths(c, cfg, rng).value});
    } else {
        throw UsageError("unknown sample law '" + law + "' (ba, cle, rho, bm-exit, last-zero, cle-paths)");
    }
    return t;
}

inline nlohmann::ordered_json mc_run_json(const McRun& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["n_samples"] = r.n_samples;
    j["gamma"] = r.gamma;
    j["spec"] = {{"tau", r.spec.tau}, {"n_boundary", r.spec.n_boundary}, {"m_cut", r.spec.modes()}, {"k_cut", r.spec.k_cut}};
    const LqgParams l = lqg_params(r.gamma);
    nlohmann::ordered_json est = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.x.size(); ++i)
        est.push_back({{"x", r.x[i]},
                       {"re", r.re[i]},
                       {"im", r.im[i]},
                       {"se_re", r.se_re[i]},
                       {"se_im", r.se_im[i]},
                       {"gmc_ratio_cf", gmc_ratio_cf(r.x[i], l, r.spec.tau)}});
    j["estimates"] = est;
    return j;
}

inline std::string run_mc(const std::string& exp, const Params& p, const std::string& format) {
    const auto seed = static_cast<std::uint64_t>(p.integer("seed", 1));
    if (exp == "gmc-ratio" || exp == "lateral") {
        CylinderSpec s;
        s.tau = p.num("tau", 1.0);
        s.n_boundary = static_cast<int>(p.integer("n-boundary", 1024));
        s.m_cut = static_cast<int>(p.integer("m-cut", 0));
        const double g = p.num("gamma");
        const auto n = static_cast<std::size_t>(p.integer("samples", 16384));
        if (exp == "gmc-ratio") {
            const McRun r = estimate_log_ratio_cf(s, g, p.has("x") ? p.list("x") : std::vector<double>{0.5, 1.0, 2.0}, n, seed);
            if (format == "csv") {
                Table t;
                t.meta = resolved("mc", exp, p);
                t.columns = {"x", "re", "im", "se_re", "se_im", "gmc_ratio_cf"};
                for (std::size_t i = 0; i < r.x.size(); ++i)
                    t.rows.push_back({r.x[i], r.re[i], r.im[i], r.se_re[i], r.se_im[i], gmc_ratio_cf(r.x[i], lqg_params(g), s.tau)});
                return t.csv();
            }
            return mc_run_json(r).dump(2) + "\n";
        }
        Table t;
        t.meta = resolved("mc", exp, p);
        t.columns = {"ratio"};
        for (double v : lateral_ratio_samples(s, g, n, seed)) t.rows.push_back({v});
        return format == "json" ? t.json().dump(2) + "\n" : t.csv();
    }
    if (exp == "paths") {
        PathConfig cfg;
        cfg.dt = p.num("dt", cfg.dt);
        const double a = p.num("a", 0.0), th = p.num("theta", 1.0);
        const PathBatch b = simulate_paths(a, static_cast<std::size_t>(p.integer("samples", 10000)), cfg, seed);
        std::vector<double> y, z;
        for (const auto& s : b.samples) {
            y.push_back(s.exit_time);
            z.push_back(s.last_zero);
        }
        const auto f = [&](double t) { return std::exp(-th * th * t / 2.0); };
        const auto my = sample_mean(y, f);
        Table t;
        t.meta = resolved("mc", exp, p);
        t.meta.emplace_back("censored", std::to_string(b.censored));
        t.columns = {"quantity", "estimate", "std_error", "closed_form"};
        t.rows.push_back({0.0, my.mean, my.std_error, std::cosh(a * th) / std::cosh(th)});
        if (a == 0.0) {
            const auto mz = sample_mean(z, f);
            t.rows.push_back({1.0, mz.mean, mz.std_error, std::tanh(th) / th});
        }
        t.meta.emplace_back("quantity", "0=E[exp(-theta^2 Y_a/2)];1=E[exp(-theta^2 T_0/2)]");
        return format == "json" ? t.json().dump(2) + "\n" : t.csv();
    }
    throw UsageError("unknown mc experiment '" + exp + "' (gmc-ratio, lateral, paths)");
}

inline nlohmann::ordered_json report_json(const std::vector<CheckResult>& rs, bool timing) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    int passed = 0;
    for (const auto& r : rs) {
        nlohmann::ordered_json c;
        c["name"] = r.name;
        c["suite"] = r.suite;
        c["anchor"] = r.anchor;
        c["computed"] = r.computed;
        c["reference"] = r.reference;
        c["tolerance"] = r.tolerance;
        c["pass"] = r.pass;
        c["note"] = r.note;
        if (timing) c["seconds"] = r.seconds;
        checks.push_back(c);
        passed += r.pass ? 1 : 0;
    }
    j["checks"] = checks;
    j["summary"] = {{"total", rs.size()}, {"passed", passed}, {"failed", static_cast<int>(rs.size()) - passed}};
    return j;
}

inline int run_verify(const std::string& suite, const std::vector<std::string>& tol_flags, const std::string& json_out, bool timing,
                      std::ostream& os) {
    static const std::vector<std::string> suites = {"specfun", "partition", "laws", "mc", "all"};
    if (std::find(suites.begin(), suites.end(), suite) == suites.end()) throw UsageError("unknown suite '" + suite + "'");
    ToleranceMap tol;
    for (const auto& f : tol_flags) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) throw UsageError("--tol expects name=value");
        try {
            tol[f.substr(0, eq)] = std::stod(f.substr(eq + 1));
        } catch (const std::logic_error&) {
            throw UsageError("--tol expects name=value");
        }
    }
    auto checks = acceptance_checks();
    std::sort(checks.begin(), checks.end(), [](const CheckSpec& a, const CheckSpec& b) { return a.name < b.name; });
    std::vector<CheckResult> results;
    for (const auto& c : checks) {
        if (suite != "all" && c.suite != suite) continue;
        results.push_back(run_check(c, tol));
        const auto& r = results.back();
        os << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.note << "\n";
    }
    if (!json_out.empty()) write_atomic(json_out, report_json(results, timing).dump(2) + "\n");
    const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
    return ok ? 0 : 1;
}

inline int run(int argc, const char* const* argv, std::ostream& os = std::cout, std::ostream& es = std::cerr) {
    CLI::App app{"Annulus moduli: closed-form laws, samplers and verification"};
    app.require_subcommand(1);
    std::string target, format = "csv", out, suite = "all", json_out;
    std::vector<std::string> tol_flags;
    bool no_timing = false;
    Params params;

    const auto add_params = [&](CLI::App* sub) {
        for (const auto& n : param_names()) sub->add_option("--" + n, params.raw[n]);
        sub->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", out, "output file (stdout if omitted)");
    };
    auto* eval = app.add_subcommand("eval", "evaluate a formula");
    eval->add_option("fn", target)->required();
    add_params(eval);
    auto* density = app.add_subcommand("density", "tabulate a density (rho, ba, cle, y0)");
    density->add_option("law", target)->required();
    add_params(density);
    auto* sample = app.add_subcommand("sample", "draw samples (ba, cle, rho, bm-exit, last-zero, cle-paths)");
    sample->add_option("law", target)->required();
    add_params(sample);
    auto* mc = app.add_subcommand("mc", "Monte Carlo experiment (gmc-ratio, lateral, paths)");
    mc->add_option("experiment", target)->required();
    add_params(mc);
    auto* verify = app.add_subcommand("verify", "run the acceptance checks");
    verify->add_option("--suite", suite);
    verify->add_option("--json", json_out, "write the report here");
    verify->add_option("--tol", tol_flags, "override a tolerance: check_name=value");
    verify->add_flag("--no-timing", no_timing, "omit wall-clock times from the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        os << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        es << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (*eval) {
            const auto& t = eval_table();
            const auto it = t.find(target);
            if (it == t.end()) {
                std::string names;
                for (const auto& [k, v] : t) names += " " + k;
                throw UsageError("unknown function '" + target + "'; available:" + names);
            }
            const Outputs o = it->second(params);
            Table tab;
            tab.meta = resolved("eval", target, params);
            for (const auto& [k, v] : o) tab.columns.push_back(k);
            tab.rows.emplace_back();
            for (const auto& [k, v] : o) tab.rows.back().push_back(v);
            emit_table(tab, format, out, os);
            return 0;
        }
        if (*density) {
            emit_table(run_density(target, params), format, out, os);
            return 0;
        }
        if (*sample) {
            emit_table(run_sample(target, params), format, out, os);
            return 0;
        }
        if (*mc) {
            const bool json = format == "json" || !mc->count("--format");
            emit(run_mc(target, params, json && target == "gmc-ratio" ? "json" : format), out, os);
            return 0;
        }
        return run_verify(suite, tol_flags, json_out, !no_timing, os);
    } catch (const UsageError& e) {
        es << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const DomainError& e) {
        es << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        es << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace annulus_moduli::cli
