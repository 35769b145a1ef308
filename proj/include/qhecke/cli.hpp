#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "qhecke/expansion.hpp"
#include "qhecke/ratios.hpp"

namespace qhecke::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";
inline constexpr int schema_version = 1;

enum Exit : int { ok = 0, config_error = 1, numeric_error = 2 };

/// Raised for numbers that fail a pinned tolerance; maps to exit code 2.
class tolerance_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    double X = 2000;
    std::vector<double> X_grid{500, 2000, 8000};
    std::string phi = "fejer:1.5";
    std::string weight = "gaussian";
    double R = 4;
    int threads = 1;
    std::string out = "-";
    std::string format;           ///< json or csv; empty picks csv for compare, json otherwise
    std::string config_file;
    std::string sieve_cache;
    i64 bound = 100'000;          ///< sieve command
    int M = 2;                    ///< expansion order
    i64 d_cutoff = 4'000'000;     ///< prime cutoff for d_m
    i64 euler_cutoff = 100'000;   ///< Euler product cutoff in the ratios integrand
    double x_max = 200;           ///< ratios integration range in tL/2π
    double tol_scale = 1;         ///< multiplies every selftest tolerance
};

// ---------------------------------------------------------------- formatting

/// x rounded to 15 significant digits; the JSON writer then prints the shortest round-trip form.
inline double round15(double x) {
    if (!std::isfinite(x) || x == 0) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::strtod(buf, nullptr);
}

inline json num(double x) { return json(round15(x)); }

inline std::string csv_num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

inline std::string csv_row(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + csv_num(v[k]);
    return s + "\n";
}

/// Writes through a temp file in the target directory and renames over the destination.
inline void write_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp);
        os << content;
        os.close();
        if (!os) throw std::runtime_error("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("rename to " + path + " failed: " + ec.message());
    }
}

// ---------------------------------------------------------------- provenance

inline json config_echo(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["X"] = num(c.X);
    json g = json::array();
    for (double x : c.X_grid) g.push_back(num(x));
    j["X_grid"] = g;
    j["phi"] = c.phi;
    j["weight"] = c.weight;
    j["R"] = num(c.R);
    j["threads"] = c.threads;
    j["format"] = c.format;
    j["config_file"] = c.config_file;
    j["sieve_cache"] = c.sieve_cache;
    j["bound"] = c.bound;
    j["M"] = c.M;
    return j;
}

inline json tolerances(const RunConfig& c) {
    json j;
    j["d_cutoff"] = c.d_cutoff;
    j["euler_cutoff"] = c.euler_cutoff;
    j["x_max"] = num(c.x_max);
    j["tol_scale"] = num(c.tol_scale);
    j["mobius_bound"] = KernelOptions{}.mobius_bound;
    j["zeta_euler_cutoff"] = ZetaKOptions{}.euler_cutoff;
    return j;
}

/// Largest prime norm the command sieves.
inline i64 sieve_bound(const RunConfig& c, const TestFunction& f) {
    auto need = [&](double X) { return i64(std::ceil(std::pow(X, f.sigma()))); };
    if (c.command == "sieve") return c.bound;
    if (c.command == "density" || c.command == "predict") return need(c.X);
    if (c.command == "expand") return c.d_cutoff;
    if (c.command == "compare") {
        i64 b = c.d_cutoff;
        for (double X : c.X_grid) b = std::max(b, need(X));
        return b;
    }
    return ZetaKOptions{}.euler_cutoff;
}

inline json provenance(const RunConfig& c, const TestFunction& f) {
    json j;
    j["tool"] = "qhecke";
    j["version"] = tool_version;
    j["config"] = config_echo(c);
    j["sieve_bound"] = sieve_bound(c, f);
    j["tolerances"] = tolerances(c);
    return j;
}

inline json envelope(const RunConfig& c, const TestFunction& f) {
    json j;
    j["schema_version"] = schema_version;
    j["provenance"] = provenance(c, f);
    return j;
}

// ---------------------------------------------------------------- report serialization

inline json to_json(const DensityReport& r) {
    json j;
    j["X"] = num(r.X);
    j["L"] = num(r.L);
    j["W_X"] = num(r.W_X);
    j["term_log_conductor"] = num(r.term_log_conductor);
    j["term_gamma_const"] = num(r.term_gamma_const);
    j["term_integral"] = num(r.term_integral);
    j["S_even"] = num(r.S_even);
    j["S_odd"] = num(r.S_odd);
    j["D_total"] = num(r.D_total);
    j["counts"] = {{"primes_odd", r.counts.primes_odd},
                   {"primes_even", r.counts.primes_even},
                   {"family", r.counts.family}};
    return j;
}

inline json to_json(const PredictionReport& p) {
    json j;
    j["X"] = num(p.X);
    j["L"] = num(p.L);
    j["D_ratios_integral"] = num(p.D_ratios_integral);
    j["D_ratios_first_order"] = num(p.D_ratios_first_order);
    const auto& t = p.first_order;
    j["first_order"] = {{"leading", num(t.leading)},       {"tail_integral", num(t.tail_integral)},
                        {"conductor", num(t.conductor)},   {"digamma", num(t.digamma)},
                        {"even_prime", num(t.even_prime)}, {"phi1", num(t.phi1)}};
    const auto& i = p.integral;
    j["integral"] = {{"prime", num(i.prime)},
                     {"conductor", num(i.conductor)},
                     {"digamma", num(i.digamma)},
                     {"dual", num(i.dual)}};
    j["points"] = p.points;
    j["max_error"] = num(p.max_error);
    j["norm_groups"] = p.norm_groups;
    return j;
}

inline const std::vector<std::string>& compare_header() {
    static const std::vector<std::string> h{"X",      "L",         "D_emp",    "D_int",     "D_fo",
                                            "D_thm11", "r_emp_int", "r_emp_fo", "rL2_emp_fo"};
    return h;
}

inline std::vector<double> compare_values(const CompareRow& r) {
    return {r.X, r.L, r.D_emp, r.D_int, r.D_fo, r.D_thm11, r.r_emp_int, r.r_emp_fo, r.rL2_emp_fo};
}

inline std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k];
    return s + "\n";
}

// ---------------------------------------------------------------- selftest

struct Check {
    std::string name;
    double value = 0;
    double tolerance = 0;
    bool pass() const { return std::isfinite(value) && value <= tolerance; }
};

/// A quick pass over the module invariants at reduced sizes.
inline std::vector<Check> selftest_checks(double scale) {
    std::vector<Check> out;
    auto add = [&](std::string n, double v, double tol) { out.push_back({std::move(n), v, tol * scale}); };

    auto primes = primary_primes_up_to(1000);
    double mismatch = 0;
    for (const auto& P : primes)
        for (i64 a = -10; a <= 10; ++a)
            for (i64 b = -10; b <= 10; ++b) {
                GInt z{a, b};
                if (z.norm() % 2 == 0 || z.norm() > 100) continue;
                int f = P.kind == PrimeKind::split ? quad_symbol_split(z, P) : quad_symbol_inert(z, P);
                mismatch += quad_symbol_euler(z, P.value) != f;
            }
    out.push_back({"symbol_paths_mismatches", mismatch, 0});

    std::vector<GInt> prim;
    for (i64 a = -10; a <= 10; ++a)
        for (i64 b = -10; b <= 10; ++b) {
            GInt z{a, b};
            if (z.norm() > 1 && z.norm() <= 100 && is_primary(z)) prim.push_back(z);
        }
    double recip = 0;
    for (const auto& m : prim)
        for (const auto& n : prim) {
            bool shared = false;
            for (const auto& pe : factor(m).primes)
                if (divides(pe.first.value, n)) shared = true;
            if (!shared) recip += quad_symbol(m, n) != quad_symbol(n, m);
        }
    out.push_back({"reciprocity_mismatches", recip, 0});

    double gmax = 0;
    for (const auto& P : primary_primes_up_to(100))
        for (const GInt& r : residue_system(P.value)) {
            double expect = quad_symbol(GInt{0, 1} * r, P.value) * std::sqrt(double(P.norm));
            gmax = std::max(gmax, std::abs(gauss_sum(r, P.value) - expect));
        }
    add("gauss_sum_residual", gmax, 1e-9);

    auto W = make_gaussian_weight();
    double pmax = 0;
    for (double X : {1.0, 10.0}) pmax = std::max(pmax, poisson_check_character(W, GInt{-1, -2}, X).residual);
    add("poisson_residual", pmax, 1e-6);

    ZetaKContext ctx;
    add("zetaK0", std::abs(ctx.zetaK0 + 0.25), 1e-8);
    double e = 1e-6;
    add("zetaK_residue", std::abs(e * ctx.zeta_K(1 + e).real() - pi / 4), 1e-5);
    add("digamma_half", std::abs(digamma(0.5) + euler_gamma + 2 * std::log(2.0)), 1e-10);
    add("zetaK0_prime_identity",
        std::abs(-ctx.zetaK0_prime - (-ctx.gammaK / pi + euler_gamma / 2 + std::log(pi) / 2)), 1e-6);
    double adiag = 0;
    for (cplx r : {cplx(0.0), cplx(0.1), cplx(0.1, 0.2)}) adiag = std::max(adiag, std::abs(ctx.A_euler(r, r).value - 1.0));
    add("A_diagonal", adiag, 1e-14);
    add("A_closed_form", std::abs(ctx.A_euler(-0.1, 0.1).value - ctx.A_closed(0.1)), 1e-6);

    auto T = TransformTables::shared(W);
    add("mellin_identity", mellin_identity_check(*T, 0.5).residual, 1e-4);
    add("w_tilde_zero", std::abs(w_tilde(W, 0) - pi / 2 * W.w_hat0), 1e-8);

    DensityConfig wc;
    wc.X = 1e4;
    add("weight_asymptotic_rel", std::abs(total_weight(wc) / wc.X / (pi / (3 * ctx.zetaK2)) - 1), 0.02);

    PrimeTable PT(1'000'000);
    auto d = d_coefficients(1, PT, 1'000'000);
    auto dl = d_coefficients_laurent(1, ctx);
    add("d1_routes", std::abs(d.d[0] - dl[0]) / std::max(d.error[0], 1e-12), 3);

    auto K = ExpansionKernels::shared(W, ctx.zetaK2);
    auto c = c_w_coefficients(1, *K);
    DensityConfig bc;
    bc.X = 2000;
    double jfo = J_first_order_constant(ctx, W);
    add("c_w1_constant", std::abs(c.value[0] - jfo), 1e-6);

    RatiosContext R;
    auto P = ratios_prediction(bc, R, ctx);
    add("prime_bridge", std::abs(P.integral.prime - P.first_order.even_prime), 1e-4);
    return out;
}

// ---------------------------------------------------------------- commands

struct Output {
    std::string body;
    bool csv = false;
    json provenance;
};

inline DensityConfig density_config(const RunConfig& c, const TestFunction& f, const WeightFunction& W) {
    DensityConfig cfg;
    cfg.X = c.X;
    cfg.test = f;
    cfg.weight = W;
    cfg.R = c.R;
    cfg.threads = c.threads;
    if (!c.sieve_cache.empty()) {
        std::ifstream is(c.sieve_cache);
        if (!is) throw domain_error("cannot read sieve cache " + c.sieve_cache);
        cfg.primes = std::make_shared<const PrimeTable>(read_sieve_cache(is));
        prime_table_for(cfg);
    }
    return cfg;
}

inline RatiosOptions ratios_options(const RunConfig& c) {
    RatiosOptions o;
    o.euler_cutoff = c.euler_cutoff;
    o.x_max = c.x_max;
    return o;
}

inline Output execute(const RunConfig& c, const TestFunction& f, const WeightFunction& W, DensityConfig base,
                      std::ostream& err) {
    Output o;
    o.csv = c.format == "csv";
    json j = envelope(c, f);
    o.provenance = j["provenance"];
    if (c.command == "sieve") {
        PrimeTable T(c.bound);
        std::ostringstream os;
        write_sieve_cache(T, os);
        o.body = os.str();
        o.csv = true;
        return o;
    }
    if (c.command == "constants") {
        ZetaKContext ctx;
        std::vector<std::pair<std::string, double>> kv{{"gamma", ctx.gamma},
                                                       {"gamma_K", ctx.gammaK},
                                                       {"zetaK2", ctx.zetaK2},
                                                       {"zetaK_logderiv_2", ctx.zetaK_logderiv_2},
                                                       {"zetaK0", ctx.zetaK0},
                                                       {"zetaK0_prime", ctx.zetaK0_prime},
                                                       {"residue", ctx.residue}};
        if (o.csv) {
            std::vector<std::string> h;
            std::vector<double> v;
            for (auto& [k, x] : kv) h.push_back(k), v.push_back(x);
            o.body = join(h) + csv_row(v);
        } else {
            json k;
            for (auto& [name, x] : kv) k[name] = num(x);
            j["constants"] = k;
        }
    } else if (c.command == "selftest") {
        auto checks = selftest_checks(c.tol_scale);
        json arr = json::array();
        bool all = true;
        for (const auto& k : checks) {
            arr.push_back({{"name", k.name}, {"value", num(k.value)}, {"tolerance", num(k.tolerance)}, {"pass", k.pass()}});
            if (!k.pass()) {
                all = false;
                err << "qhecke:error:numeric: selftest check " << k.name << " = " << csv_num(k.value)
                    << " exceeds " << csv_num(k.tolerance) << "\n";
            }
        }
        j["checks"] = arr;
        j["passed"] = all;
        o.body = j.dump(2) + "\n";
        if (!all) throw tolerance_failure(o.body);
        return o;
    } else if (c.command == "density") {
        auto r = one_level_density(base, LoopOrder::prime_outer);
        if (o.csv)
            o.body = join({"X", "L", "W_X", "term_log_conductor", "term_gamma_const", "term_integral", "S_even", "S_odd",
                           "D_total"}) +
                     csv_row({r.X, r.L, r.W_X, r.term_log_conductor, r.term_gamma_const, r.term_integral, r.S_even,
                              r.S_odd, r.D_total});
        else
            j["density"] = to_json(r);
    } else if (c.command == "predict") {
        ZetaKContext ctx;
        RatiosContext R(ratios_options(c));
        auto p = ratios_prediction(base, R, ctx);
        if (o.csv)
            o.body = join({"X", "L", "D_ratios_integral", "D_ratios_first_order", "max_error"}) +
                     csv_row({p.X, p.L, p.D_ratios_integral, p.D_ratios_first_order, p.max_error});
        else
            j["prediction"] = to_json(p);
    } else if (c.command == "expand") {
        ZetaKContext ctx;
        auto K = ExpansionKernels::shared(W, ctx.zetaK2);
        PrimeTable T(c.d_cutoff);
        auto d = d_coefficients(c.M, T, c.d_cutoff);
        auto cw = c_w_coefficients(c.M, *K);
        auto E = expansion_coefficients(c.M, f, W, d, cw);
        json rows = json::array();
        std::string csv = join({"m", "d_m", "c_wm", "R_wm", "error_m", "dominated_by_truncation"});
        for (int m = 1; m <= c.M; ++m) {
            double R = E.R_w[m - 1], e = E.R_w_error[m - 1];
            bool flag = E.d_error[m - 1] >= 0.1 * std::abs(E.d[m - 1]) ||
                        E.c_w_error[m - 1] >= 0.1 * std::abs(E.c_w[m - 1]);
            if (flag)
                err << "qhecke:warning: order " << m << " is dominated by truncation error (d_m " << csv_num(E.d_error[m - 1])
                    << ", c_wm " << csv_num(E.c_w_error[m - 1]) << "); raise --d-cutoff\n";
            rows.push_back({{"m", m},
                            {"d_m", num(E.d[m - 1])},
                            {"c_wm", num(E.c_w[m - 1])},
                            {"R_wm", num(R)},
                            {"error_m", num(e)},
                            {"dominated_by_truncation", flag}});
            csv += csv_row({double(m), E.d[m - 1], E.c_w[m - 1], R, e, double(flag)});
        }
        if (o.csv) {
            o.body = csv;
        } else {
            j["coefficients"] = rows;
            j["prediction"] = {{"X", num(c.X)},
                               {"L", num(std::log(c.X))},
                               {"leading", num(leading_term(f))},
                               {"D_expansion", num(theorem_prediction(c.X, f, E))}};
        }
    } else if (c.command == "compare") {
        CompareOptions co;
        co.order = c.M;
        co.d_cutoff = c.d_cutoff;
        auto rows = compare(base, c.X_grid, co);
        if (o.csv) {
            o.body = join(compare_header());
            for (const auto& r : rows) o.body += csv_row(compare_values(r));
        } else {
            json arr = json::array();
            for (const auto& r : rows) {
                json row;
                auto v = compare_values(r);
                for (std::size_t k = 0; k < v.size(); ++k) row[compare_header()[k]] = num(v[k]);
                arr.push_back(row);
            }
            j["rows"] = arr;
        }
    }
    if (!o.csv) o.body = j.dump(2) + "\n";
    return o;
}

/// Writes the body; CSV runs carry provenance in a sidecar file, or on stderr when writing to stdout.
inline void emit(const RunConfig& c, const Output& o, std::ostream& out, std::ostream& err) {
    if (c.out == "-") {
        out << o.body;
        if (o.csv) err << "qhecke:provenance: " << o.provenance.dump() << "\n";
        return;
    }
    write_atomic(c.out, o.body);
    if (o.csv) {
        json p{{"schema_version", schema_version}, {"provenance", o.provenance}};
        write_atomic(c.out + ".provenance.json", p.dump(2) + "\n");
    }
}

inline void validate(const RunConfig& c) {
    if (c.format != "json" && c.format != "csv") throw domain_error("--format must be json or csv");
    if (c.command == "selftest" && c.format == "csv") throw domain_error("selftest writes json only");
    if (!(c.X > 1)) throw domain_error("--X must exceed 1");
    if (c.X_grid.empty()) throw domain_error("--X-grid is empty");
    for (double X : c.X_grid)
        if (!(X > std::exp(1.0))) throw domain_error("--X-grid entries must exceed e");
    if (!(c.R >= 1)) throw domain_error("--R must be at least 1");
    if (c.threads < 1) throw domain_error("--threads must be positive");
    if (c.bound < 2) throw domain_error("--bound must be at least 2");
    if (c.M < 1 || c.M > 6) throw domain_error("--M must lie in 1..6");
    if (c.d_cutoff < 1000) throw domain_error("--d-cutoff must be at least 1000");
    if (c.euler_cutoff < 100) throw domain_error("--euler-cutoff must be at least 100");
    if (!(c.x_max > 0)) throw domain_error("--x-max must be positive");
    if (!(c.tol_scale > 0)) throw domain_error("--tol-scale must be positive");
}

/// Parses argv, runs one command and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig c;
    CLI::App app{"qhecke: one-level density of quadratic Hecke L-functions over Q(i)"};
    app.set_version_flag("--version", tool_version);
    app.set_config("--config", "", "flat key=value config file; flags take precedence");
    app.require_subcommand(1, 1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.add_option("--X", c.X, "family size parameter");
    app.add_option("--X-grid", c.X_grid, "comma-separated X values for compare")->delimiter(',');
    app.add_option("--phi", c.phi, "test function, fejer:<sigma> or bump:<sigma>");
    app.add_option("--weight", c.weight, "weight function");
    app.add_option("--R", c.R, "family cutoff N(c) <= R X");
    app.add_option("--threads", c.threads, "worker threads");
    app.add_option("--out", c.out, "output path, - for stdout");
    app.add_option("--format", c.format, "json or csv; compare defaults to csv");
    app.add_option("--sieve-cache", c.sieve_cache, "prime table written by the sieve command");
    app.add_option("--bound", c.bound, "sieve bound for the sieve command");
    app.add_option("--M", c.M, "expansion order");
    app.add_option("--d-cutoff", c.d_cutoff, "prime cutoff for the d_m sums");
    app.add_option("--euler-cutoff", c.euler_cutoff, "Euler product cutoff for the ratios integrand");
    app.add_option("--x-max", c.x_max, "ratios integration range in tL/2pi");
    app.add_option("--tol-scale", c.tol_scale, "multiplier on selftest tolerances");
    for (const char* name : {"sieve", "constants", "selftest", "density", "predict", "expand", "compare"})
        app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "qhecke:error:config: " << e.what() << "\n";
        return config_error;
    }
    c.command = app.get_subcommands().front()->get_name();
    if (c.format.empty()) c.format = c.command == "compare" ? "csv" : "json";
    if (auto* opt = app.get_config_ptr(); opt && opt->count()) c.config_file = opt->as<std::string>();

    TestFunction f = TestFunction::fejer(1.5);
    WeightFunction W;
    DensityConfig base;
    try {
        validate(c);
        f = TestFunction::parse(c.phi);
        W = parse_weight(c.weight);
        base = density_config(c, f, W);
        qhecke::validate(base);
    } catch (const std::exception& e) {
        err << "qhecke:error:config: " << e.what() << "\n";
        return config_error;
    }
    try {
        emit(c, execute(c, f, W, base, err), out, err);
    } catch (const tolerance_failure& e) {
        if (c.out == "-")
            out << e.what();
        else
            write_atomic(c.out, e.what());
        return numeric_error;
    } catch (const std::exception& e) {
        err << "qhecke:error:numeric: " << e.what() << "\n";
        return numeric_error;
    }
    return ok;
}

}  // namespace qhecke::cli
