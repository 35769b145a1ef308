// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "qhecke/expansion.hpp"
#include "qhecke/ratios.hpp"

using namespace qhecke;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ZetaKContext& ctx() {
    static ZetaKContext c;
    return c;
}

DensityConfig config(double X, const TestFunction& f) {
    DensityConfig cfg;
    cfg.X = X;
    cfg.test = f;
    return cfg;
}

std::vector<GInt> odd_elements(i64 max_norm) {
    std::vector<GInt> v;
    i64 r = i64(std::sqrt(double(max_norm))) + 1;
    for (i64 a = -r; a <= r; ++a)
        for (i64 b = -r; b <= r; ++b) {
            GInt z{a, b};
            if (z.norm() % 2 == 1 && z.norm() <= max_norm) v.push_back(z);
        }
    return v;
}

// ---------------------------------------------------------------- criteria

Outcome symbol_oracles() {
    auto t0 = std::chrono::steady_clock::now();
    long mismatches = 0, checked = 0;
    auto as = odd_elements(1000);
    for (const auto& P : primary_primes_up_to(10'000))
        for (const auto& a : as) {
            int e = quad_symbol_euler(a, P.value);
            int f = P.kind == PrimeKind::split ? quad_symbol_split(a, P) : quad_symbol_inert(a, P);
            mismatches += e != f;
            ++checked;
        }
    long brute = 0;
    for (const auto& P : primary_primes_up_to(200)) {
        auto res = residue_system(P.value);
        std::vector<bool> is_sq(res.size(), false);
        for (const GInt& x : res) {
            GInt s = gmod(x * x, P.value);
            if (s.is_zero()) continue;
            for (std::size_t k = 0; k < res.size(); ++k)
                if (divides(P.value, s - res[k])) {
                    is_sq[k] = true;
                    break;
                }
        }
        for (std::size_t k = 0; k < res.size(); ++k) {
            int s = quad_symbol_prime(res[k], P);
            bool ok = divides(P.value, res[k]) ? s == 0 : (s == 1) == is_sq[k];
            brute += !ok;
        }
    }
    double secs = seconds_since(t0);
    return {mismatches == 0 && brute == 0 && secs <= 60,
            "path mismatches " + std::to_string(mismatches) + "/" + std::to_string(checked) + ", square-set mismatches " +
                std::to_string(brute) + ", " + fmt(secs) + " s (limit 60 s)"};
}

Outcome reciprocity() {
    std::vector<GInt> prim;
    for (const auto& z : odd_elements(500))
        if (z.norm() > 1 && is_primary(z)) prim.push_back(z);
    long bad = 0, checked = 0;
    for (const auto& m : prim) {
        auto fm = factor(m);
        for (const auto& n : prim) {
            bool shared = false;
            for (const auto& pe : fm.primes)
                if (divides(pe.first.value, n)) shared = true;
            if (shared) continue;
            bad += quad_symbol(m, n) != quad_symbol(n, m);
            ++checked;
        }
    }
    return {bad == 0 && checked > 0, "mismatches " + std::to_string(bad) + " over " + std::to_string(checked) + " pairs"};
}

Outcome gauss_sums() {
    double worst = 0;
    long count = 0;
    for (const auto& P : primary_primes_up_to(1000))
        for (const GInt& r : residue_system(P.value)) {
            double expect = quad_symbol(GInt{0, 1} * r, P.value) * std::sqrt(double(P.norm));
            worst = std::max(worst, std::abs(gauss_sum(r, P.value) - expect));
            ++count;
        }
    return {worst < 1e-9, "max residual " + fmt(worst) + " over " + std::to_string(count) + " sums (tol 1e-9)"};
}

Outcome poisson() {
    auto W = make_gaussian_weight();
    double worst = 0;
    for (GInt n : {GInt{-1, -2}, GInt{5, 4}, GInt{1, -8}}) {
        if (!is_primary(n)) return {false, "non-primary modulus"};
        for (double X : {1.0, 10.0}) worst = std::max(worst, poisson_check_character(W, n, X).residual);
    }
    return {worst < 1e-6, "max residual " + fmt(worst) + " (tol 1e-6)"};
}

Outcome constants() {
    const auto& c = ctx();
    double e = 1e-6;
    double r0 = std::abs(c.zetaK0 + 0.25);
    double r1 = std::abs(e * zeta_K(1 + e).real() - pi / 4);
    double r2 = std::abs(digamma(0.5) + euler_gamma + 2 * std::log(2.0));
    double r3 = std::abs(-c.zetaK0_prime - (-c.gammaK / pi + euler_gamma / 2 + std::log(pi) / 2));
    return {r0 < 1e-8 && r1 < 1e-5 && r2 < 1e-10 && r3 < 1e-6,
            "zetaK(0) " + fmt(r0) + " (1e-8), residue " + fmt(r1) + " (1e-5), psi(1/2) " + fmt(r2) +
                " (1e-10), zetaK'(0) " + fmt(r3) + " (1e-6)"};
}

Outcome a_factor() {
    const auto& c = ctx();
    double diag = 0;
    for (cplx r : {cplx(0.0), cplx(0.1), cplx(0.1, 0.2)}) diag = std::max(diag, std::abs(c.A_euler(r, r).value - 1.0));
    double off = std::abs(c.A_euler(-0.1, 0.1).value - c.A_closed(0.1));
    bool cutoff = c.options().euler_cutoff == 1'000'000;
    return {diag <= 4 * std::numeric_limits<double>::epsilon() && off < 1e-6 && cutoff,
            "|A(r,r)-1| " + fmt(diag) + " (4 eps), Euler vs closed " + fmt(off) + " (1e-6) at cutoff " +
                std::to_string(c.options().euler_cutoff)};
}

Outcome mellin() {
    auto W = make_gaussian_weight();
    auto T = TransformTables::shared(W);
    double a = mellin_identity_check(*T, 0.5).residual;
    double b = mellin_identity_check(*T, cplx(0.5, 1.0)).residual;
    double w0 = std::abs(w_tilde(W, 0) - pi / 2 * W.w_hat0);
    return {a < 1e-4 && b < 1e-4 && w0 < 1e-8,
            "residuals " + fmt(a) + ", " + fmt(b) + " (1e-4), w~(0) " + fmt(w0) + " (1e-8)"};
}

Outcome weight_asymptotic() {
    auto t0 = std::chrono::steady_clock::now();
    DensityConfig cfg;
    cfg.X = 1e5;
    double ratio = total_weight(cfg) / cfg.X;
    double dev = std::abs(ratio / (pi / (3 * ctx().zetaK2) * cfg.weight.w_hat0) - 1);
    double secs = seconds_since(t0);
    return {dev < 0.01 && secs <= 60, "relative deviation " + fmt(dev) + " (1%), " + fmt(secs) + " s (limit 60 s)"};
}

Outcome s_odd_bridge() {
    auto f = TestFunction::fejer(1.5);
    auto cfg = config(2000, f);
    double s = s_odd(cfg);
    double tail = f.hat_integral(1, f.sigma());
    auto K = ExpansionKernels::shared(cfg.weight, ctx().zetaK2);
    auto J = J_X(2000, f, *K);
    double res = std::abs(s - tail - J.value);
    return {res <= 0.05, "s_odd " + fmt(s) + ", tail " + fmt(tail) + ", J " + fmt(J.value) + ", residual " + fmt(res) +
                             " (tol 0.05)"};
}

Outcome prime_bridge() {
    RatiosContext R;
    auto P = ratios_prediction(config(2000, TestFunction::fejer(1.5)), R, ctx());
    double res = std::abs(P.integral.prime - P.first_order.even_prime);
    return {res < 1e-4, "integral " + fmt(P.integral.prime) + " vs sum " + fmt(P.first_order.even_prime) + ", residual " +
                            fmt(res) + " (tol 1e-4)"};
}

Outcome end_to_end() {
    auto f = TestFunction::fejer(1.5);
    RatiosContext R;
    std::vector<double> scaled;
    double r2000 = 0, t8000 = 0;
    std::string detail;
    for (double X : {500.0, 2000.0, 8000.0}) {
        auto t0 = std::chrono::steady_clock::now();
        auto cfg = config(X, f);
        double emp = one_level_density(cfg, LoopOrder::prime_outer).D_total;
        double fo = ratios_prediction(cfg, R, ctx()).D_ratios_first_order;
        if (X == 8000) t8000 = seconds_since(t0);
        double r = emp - fo, L = std::log(X);
        if (X == 2000) r2000 = std::abs(r);
        scaled.push_back(std::abs(r) * L * L);
        detail += "|r|L^2(" + fmt(X) + ")=" + fmt(scaled.back()) + " ";
    }
    bool bounded = *std::max_element(scaled.begin(), scaled.end()) <= 10;
    bool trend = scaled[1] <= scaled[0] && scaled[2] <= scaled[1];
    bool fast = t8000 <= 600;
    return {r2000 <= 0.1 && bounded && trend && fast,
            "|r(2000)| " + fmt(r2000) + " (0.1), " + detail + "(bound 10, non-increasing: " + (trend ? "yes" : "no") +
                "), X=8000 in " + fmt(t8000) + " s (limit 600 s)"};
}

Outcome small_support() {
    auto f = TestFunction::fejer(0.8);
    std::vector<double> s;
    std::string detail;
    for (double X : {500.0, 2000.0, 8000.0}) {
        s.push_back(std::abs(s_odd(config(X, f))));
        detail += "|s_odd(" + fmt(X) + ")|=" + fmt(s.back()) + " ";
    }
    bool decreasing = s[1] < s[0] && s[2] < s[1];
    PrimeTable T(4'000'000);
    auto d = d_coefficients(1, T, 4'000'000);
    auto K = ExpansionKernels::shared(make_gaussian_weight(), ctx().zetaK2);
    auto c = c_w_coefficients(1, *K);
    auto E = expansion_coefficients(1, f, make_gaussian_weight(), d, c);
    double emp = one_level_density(config(8000, f), LoopOrder::prime_outer).D_total;
    double pred = theorem_prediction(8000, f, E, 1);
    double res = std::abs(emp - pred);
    return {decreasing && res <= 0.05,
            detail + "(decreasing: " + (decreasing ? "yes" : "no") + "), |D_emp - first order| at 8000 " + fmt(res) +
                " (tol 0.05)"};
}

Outcome determinism() {
    fs::path dir = fs::temp_directory_path() / ("qhecke_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto run = [&](const std::string& name) {
        fs::path out = dir / name;
        std::string cmd = std::string(QHECKE_CLI_PATH) +
                          " compare --X-grid 500,2000,8000 --phi fejer:1.5 --weight gaussian --out " + out.string() +
                          " 2>" + (dir / (name + ".err")).string();
        int st = std::system(cmd.c_str());
        std::ifstream is(out, std::ios::binary);
        std::string body(std::istreambuf_iterator<char>(is), {});
        std::ifstream ps(out.string() + ".provenance.json", std::ios::binary);
        body += std::string(std::istreambuf_iterator<char>(ps), {});
        return std::make_pair(WIFEXITED(st) ? WEXITSTATUS(st) : -1, body);
    };
    auto a = run("a.csv"), b = run("b.csv");
    fs::remove_all(dir);
    bool same = a.second == b.second && !a.second.empty();
    return {a.first == 0 && b.first == 0 && same, "exit codes " + std::to_string(a.first) + "," +
                                                       std::to_string(b.first) + ", " + std::to_string(a.second.size()) +
                                                       " bytes, identical: " + (same ? "yes" : "no")};
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"symbol oracle equivalence", symbol_oracles},
        {"quadratic reciprocity", reciprocity},
        {"Gauss sum identity", gauss_sums},
        {"Poisson summation", poisson},
        {"analytic constants", constants},
        {"A(r,r) and A(-r,r) closed form", a_factor},
        {"Mellin identity", mellin},
        {"W(X)/X asymptotic", weight_asymptotic},
        {"s_odd bridge", s_odd_bridge},
        {"prime-sum bridge", prime_bridge},
        {"end-to-end empirical vs first order", end_to_end},
        {"small support", small_support},
        {"compare determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
                  << "): " << o.detail << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
