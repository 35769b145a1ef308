#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <thread>
#include <vector>

#include "sieve.hpp"
#include "specfun.hpp"
#include "transforms.hpp"

namespace qhecke {

struct DensityConfig {
    double X = 1000;
    TestFunction test = TestFunction::fejer(1.5);
    WeightFunction weight = make_gaussian_weight();
    double R = 4;  ///< family cutoff N(c) <= R X
    int threads = 1;
    std::shared_ptr<const PrimeTable> primes;  ///< optional shared sieve

    double L() const { return std::log(X); }
    /// X^σ, the largest prime-power norm that can contribute.
    double prime_cutoff() const { return std::pow(X, test.sigma()); }
    i64 family_bound() const { return i64(std::floor(R * X)); }
};

inline void validate(const DensityConfig& cfg) {
    if (!(cfg.X > 1)) throw domain_error("density: X must exceed 1");
    if (!(cfg.R >= 1)) throw domain_error("density: R must be at least 1");
    if (cfg.threads < 1) throw domain_error("density: thread count must be positive");
}

struct DensityCounts {
    std::size_t primes_odd = 0;   ///< primes with N(ϖ) < X^σ
    std::size_t primes_even = 0;  ///< primes with N(ϖ)² < X^σ
    std::size_t family = 0;       ///< associates counted separately
};

struct DensityReport {
    double X = 0;
    double L = 0;
    double W_X = 0;
    double term_log_conductor = 0;
    double term_gamma_const = 0;
    double term_integral = 0;
    double S_even = 0;
    double S_odd = 0;
    double D_total = 0;
    DensityCounts counts;
    double seconds = 0;
};

enum class LoopOrder { prime_outer, family_outer };

// ---------------------------------------------------------------- family data

/// Primary squarefree c' with N(c') <= R X together with w(N(c')/X).
struct FamilyTable {
    std::vector<SquarefreePrimary> elems;
    std::vector<double> weights;
    double W = 0;        ///< Σ over all four associates
    double log_sum = 0;  ///< Σ w log N(c) over all four associates
};

inline FamilyTable make_family_table(const DensityConfig& cfg) {
    FamilyTable F;
    F.elems = squarefree_primaries(cfg.family_bound());
    F.weights.reserve(F.elems.size());
    CompensatedSum<double> W, Lg;
    for (const auto& e : F.elems) {
        double w = cfg.weight(double(e.norm) / cfg.X);
        F.weights.push_back(w);
        W += w;
        Lg += w * std::log(double(e.norm));
    }
    F.W = 4 * W.value();
    F.log_sum = 4 * Lg.value();
    return F;
}

/// W(X) = Σ over odd squarefree c (each associate) with N(c) <= R X of w(N(c)/X).
inline double total_weight(const DensityConfig& cfg) {
    validate(cfg);
    return make_family_table(cfg).W;
}

/// Estimate of the dropped weight Σ_{N(c) > RX} w(N(c)/X) from the family density π/(3ζ_K(2)).
inline double weight_tail_estimate(const DensityConfig& cfg, double zetaK2 = 1.5067030099229850) {
    double tail = integrate_to_inf([&](double x) { return cfg.weight(x); }, cfg.R, 1e-14).value;
    return pi / (3 * zetaK2) * cfg.X * tail;
}

// ---------------------------------------------------------------- prime data

inline std::shared_ptr<const PrimeTable> prime_table_for(const DensityConfig& cfg) {
    i64 need = i64(std::ceil(cfg.prime_cutoff()));
    if (cfg.primes) {
        cfg.primes->require(need);
        return cfg.primes;
    }
    return std::make_shared<const PrimeTable>(std::max<i64>(need, 5));
}

/// Σ_{ϖ primary, N(ϖ)^j < X^σ} log N(ϖ)/N(ϖ)^{j/2} χ_c(ϖ)^j φ̂(j log N(ϖ)/L).
inline double s_j_sum(const FamilyElement& c, int j, const DensityConfig& cfg, const PrimeTable& T) {
    if (j < 1) throw domain_error("s_j_sum: j must be positive");
    double L = cfg.L(), cut = cfg.prime_cutoff();
    T.require(i64(std::ceil(std::pow(cut, 1.0 / j))));
    GInt a = family_twist * c.c;
    CompensatedSum<double> s;
    for (const auto& P : T.primes()) {
        double lN = std::log(double(P.norm));
        if (j * lN >= std::log(cut)) break;
        int chi = quad_symbol_prime(a, P);
        if (j % 2 == 0) chi = chi * chi;
        if (chi == 0) continue;
        s += chi * lN * std::exp(-0.5 * j * lN) * cfg.test.hat(j * lN / L);
    }
    return s.value();
}

inline double s_j_sum(const FamilyElement& c, int j, const DensityConfig& cfg) {
    auto T = prime_table_for(cfg);
    return s_j_sum(c, j, cfg, *T);
}

namespace detail {

/// Σ over odd (or even) j of log N/N^{j/2} φ̂(j log N/L) for one prime.
inline double prime_power_weight(double lN, double L, double sigma, const TestFunction& f, int parity) {
    double s = 0;
    for (int j = parity == 1 ? 1 : 2; j * lN < sigma * L; j += 2) s += lN * std::exp(-0.5 * j * lN) * f.hat(j * lN / L);
    return s;
}

/// (c'/ϖ) for primary c' through the residue-field image.
inline int residue_symbol(const SquarefreePrimary& c, const PrimaryPrime& P) {
    if (P.kind == PrimeKind::split) {
        i64 r = (c.value.re + c.value.im * P.i_image) % P.p;
        if (r < 0) r += P.p;
        return jacobi(r, P.p);
    }
    return jacobi(c.norm % P.p, P.p);
}

}  // namespace detail

/// Per-prime accumulators of the character sums over the family.
struct PrimeAccumulators {
    std::vector<PrimaryPrime> odd_primes;
    std::vector<double> T1;  ///< Σ_c w χ_c(ϖ)
    std::vector<double> A_odd;
    std::vector<PrimaryPrime> even_primes;
    std::vector<double> T2;  ///< Σ_{c : ϖ ∤ c} w
    std::vector<double> A_even;
};

/// Accumulates T1, T2. Associates fold exactly: Σ_u (u/ϖ) = 2(1 + (i/ϖ)).
inline PrimeAccumulators accumulate(const DensityConfig& cfg, const FamilyTable& F, const PrimeTable& T,
                                    LoopOrder order = LoopOrder::prime_outer, bool with_odd = true) {
    PrimeAccumulators acc;
    double L = cfg.L(), sigma = cfg.test.sigma(), lcut = sigma * L;
    for (const auto& P : T.primes()) {
        double lN = std::log(double(P.norm));
        if (lN >= lcut || (!with_odd && 2 * lN >= lcut)) break;
        acc.odd_primes.push_back(P);
        acc.A_odd.push_back(detail::prime_power_weight(lN, L, sigma, cfg.test, 1));
        if (2 * lN < lcut) {
            acc.even_primes.push_back(P);
            acc.A_even.push_back(detail::prime_power_weight(lN, L, sigma, cfg.test, 0));
        }
    }
    std::size_t np = acc.odd_primes.size(), ne = acc.even_primes.size(), nf = F.elems.size();
    std::vector<double> pref(np, 0.0);
    for (std::size_t k = 0; k < np; ++k) {
        const auto& P = acc.odd_primes[k];
        int unit_sum = 2 * (1 + quad_symbol_prime(GInt{0, 1}, P));
        pref[k] = with_odd ? unit_sum * quad_symbol_prime(family_twist, P) : 0;
    }
    std::vector<CompensatedSum<double>> t1(np), div(ne);

    auto prime_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            if (pref[k] == 0) continue;
            const auto& P = acc.odd_primes[k];
            for (std::size_t c = 0; c < nf; ++c) {
                int s = detail::residue_symbol(F.elems[c], P);
                if (s) t1[k] += s * F.weights[c];
            }
        }
    };
    if (order == LoopOrder::prime_outer) {
        int nt = std::max(1, cfg.threads);
        if (nt == 1 || np < 64) {
            prime_range(0, np);
        } else {
            // fixed contiguous prime blocks; each accumulator is filled by one thread in family order
            std::vector<std::thread> pool;
            for (int t = 0; t < nt; ++t) {
                std::size_t lo = np * t / nt, hi = np * (t + 1) / nt;
                pool.emplace_back(prime_range, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        for (std::size_t k = 0; k < ne; ++k)
            for (std::size_t c = 0; c < nf; ++c)
                if (divides(acc.even_primes[k].value, F.elems[c].value)) div[k] += F.weights[c];
    } else {
        for (std::size_t c = 0; c < nf; ++c) {
            for (std::size_t k = 0; k < np; ++k) {
                if (pref[k] == 0) continue;
                int s = detail::residue_symbol(F.elems[c], acc.odd_primes[k]);
                if (s) t1[k] += s * F.weights[c];
            }
            for (std::size_t k = 0; k < ne; ++k)
                if (divides(acc.even_primes[k].value, F.elems[c].value)) div[k] += F.weights[c];
        }
    }
    acc.T1.resize(np);
    for (std::size_t k = 0; k < np; ++k) acc.T1[k] = pref[k] * t1[k].value();
    acc.T2.resize(ne);
    for (std::size_t k = 0; k < ne; ++k) acc.T2[k] = F.W - 4 * div[k].value();
    return acc;
}

/// -(2/(L W)) Σ_ϖ A_odd(ϖ) T1(ϖ).
inline double s_odd(const DensityConfig& cfg, const FamilyTable& F, const PrimeAccumulators& acc) {
    CompensatedSum<double> s;
    for (std::size_t k = 0; k < acc.T1.size(); ++k) s += acc.A_odd[k] * acc.T1[k];
    return -2 / (cfg.L() * F.W) * s.value();
}

inline double s_even(const DensityConfig& cfg, const FamilyTable& F, const PrimeAccumulators& acc) {
    CompensatedSum<double> s;
    for (std::size_t k = 0; k < acc.T2.size(); ++k) s += acc.A_even[k] * acc.T2[k];
    return -2 / (cfg.L() * F.W) * s.value();
}

inline double s_odd(const DensityConfig& cfg) {
    validate(cfg);
    auto T = prime_table_for(cfg);
    auto F = make_family_table(cfg);
    return s_odd(cfg, F, accumulate(cfg, F, *T));
}

inline double s_even(const DensityConfig& cfg) {
    validate(cfg);
    auto T = prime_table_for(cfg);
    auto F = make_family_table(cfg);
    return s_even(cfg, F, accumulate(cfg, F, *T, LoopOrder::prime_outer, false));
}

/// c-independent form -(2/L) Σ_{ϖ, j} log N/N^j (1 + 1/N)^{-1} φ̂(2j log N/L).
inline double s_even_main_term(const DensityConfig& cfg) {
    validate(cfg);
    auto T = prime_table_for(cfg);
    double L = cfg.L(), lcut = cfg.test.sigma() * L;
    CompensatedSum<double> s;
    for (const auto& P : T->primes()) {
        double N = double(P.norm), lN = std::log(N);
        if (2 * lN >= lcut) break;
        for (int j = 1; 2 * j * lN < lcut; ++j) s += lN * std::exp(-j * lN) / (1 + 1 / N) * cfg.test.hat(2 * j * lN / L);
    }
    return -2 / L * s.value();
}

// ---------------------------------------------------------------- archimedean terms

/// (φ̂(0)/L)(log(32/π²) + 2ψ(1/2)).
inline double gamma_constant_term(const TestFunction& f, double L) {
    return f.hat(0) / L * (std::log(32 / (pi * pi)) + 2 * digamma(0.5));
}

/// (2/L) ∫_0^∞ e^{-t/2}/(1 - e^{-t}) (φ̂(0) - φ̂(t/L)) dt.
inline QuadResult digamma_integral_quad(const TestFunction& f, double L, double tol = 1e-13) {
    if (!(L > 0)) throw domain_error("digamma_integral_term: L must be positive");
    double h0 = f.hat(0), a = f.sigma() * L;
    auto g = [&](double t) {
        if (t == 0) return -f.hat_deriv(1, 0.0) / L;
        return std::exp(-t / 2) / -std::expm1(-t) * (h0 - f.hat(t / L));
    };
    QuadResult q = integrate(g, 0.0, a, tol, 4000);
    double tail = -h0 * std::log(std::tanh(a / 4));  // ∫_a^∞ dt/(2 sinh(t/2))
    return {2 / L * (q.value + tail), 2 / L * q.error, q.evals};
}

inline double digamma_integral_term(const TestFunction& f, double L) { return digamma_integral_quad(f, L).value; }

// ---------------------------------------------------------------- assembly

inline DensityReport assemble(const DensityConfig& cfg, const FamilyTable& F, const PrimeAccumulators& acc) {
    DensityReport r;
    r.X = cfg.X;
    r.L = cfg.L();
    r.W_X = F.W;
    r.term_log_conductor = cfg.test.hat(0) / (r.L * F.W) * F.log_sum;
    r.term_gamma_const = gamma_constant_term(cfg.test, r.L);
    r.term_integral = digamma_integral_term(cfg.test, r.L);
    r.S_even = s_even(cfg, F, acc);
    r.S_odd = s_odd(cfg, F, acc);
    r.D_total = r.term_log_conductor + r.term_gamma_const + r.term_integral + r.S_even + r.S_odd;
    r.counts.primes_odd = acc.T1.size();
    r.counts.primes_even = acc.T2.size();
    r.counts.family = 4 * F.elems.size();
    return r;
}

/// One-level density by the explicit formula over the full family.
inline DensityReport one_level_density(const DensityConfig& cfg, LoopOrder order = LoopOrder::prime_outer) {
    validate(cfg);
    auto t0 = std::chrono::steady_clock::now();
    auto T = prime_table_for(cfg);
    auto F = make_family_table(cfg);
    auto acc = accumulate(cfg, F, *T, order);
    DensityReport r = assemble(cfg, F, acc);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// ---------------------------------------------------------------- checks

struct LogConductorCheck {
    double average = 0;    ///< (1/W) Σ w log N(c)
    double predicted = 0;  ///< log X + (2/ŵ(0)) ∫_0^∞ w log
    double residual = 0;
};

inline LogConductorCheck log_conductor_check(const DensityConfig& cfg) {
    validate(cfg);
    auto F = make_family_table(cfg);
    LogConductorCheck c;
    c.average = F.log_sum / F.W;
    c.predicted = cfg.L() + 2 / cfg.weight.w_hat0 * cfg.weight.log_moment();
    c.residual = c.average - c.predicted;
    return c;
}

struct PrimeSumResidual {
    double chebyshev = 0;  ///< (Σ χ(ϖ) log N - δ B)/(√B log² B)
    double mertens = 0;    ///< Σ log N/N - log B
};

/// Prime sums up to B for the principal character or χ(ϖ) = (ϖ/n).
inline PrimeSumResidual prime_sum_check(i64 B, std::optional<GInt> modulus = std::nullopt,
                                        std::shared_ptr<const PrimeTable> table = nullptr) {
    if (B < 2) throw domain_error("prime_sum_check: B must be at least 2");
    if (!table) table = std::make_shared<const PrimeTable>(B);
    table->require(B);
    std::vector<PrimaryPrime> mod_primes;
    if (modulus) {
        if (!modulus->is_odd() || modulus->is_unit()) throw domain_error("prime_sum_check: modulus must be odd and not a unit");
        for (const auto& pe : factor(*modulus).primes)
            if (pe.second % 2) mod_primes.push_back(pe.first);
    }
    CompensatedSum<double> psi, mer;
    for (const auto& P : table->primes()) {
        if (P.norm > B) break;
        double lN = std::log(double(P.norm));
        int chi = 1;
        if (modulus) chi = quad_symbol(P.value, *modulus);
        psi += chi * lN;
        mer += lN / double(P.norm);
    }
    double b = double(B), lb = std::log(b);
    bool principal = !modulus || mod_primes.empty();
    PrimeSumResidual r;
    r.chebyshev = (psi.value() - (principal ? b : 0.0)) / (std::sqrt(b) * lb * lb);
    r.mertens = mer.value() - lb;
    return r;
}

/// (1/W) Σ_c w(N(c)/X) χ_{i(1+i)^5 c}(n) over the family.
inline double family_character_average(const DensityConfig& cfg, const GInt& n) {
    validate(cfg);
    auto fam = family_stream(cfg.family_bound());
    CompensatedSum<double> s, W;
    for (const auto& e : fam) {
        double w = cfg.weight(double(e.norm) / cfg.X);
        W += w;
        s += chi_family(e.c, n) * w;
    }
    return s.value() / W.value();
}

struct PoissonCheck {
    cplx lhs;
    cplx rhs;
    double residual = 0;
};

/// Σ_m χ(m) w(N(m)/X) against (X/N(n)) Σ_k g(k, n) w̃(√(N(k) X/N(n))), χ = (·/n).
inline PoissonCheck poisson_check_character(const WeightFunction& W, const GInt& n, double X) {
    auto T = TransformTables::shared(W);
    if (!is_primary(n) || n.is_unit()) throw domain_error("poisson_check: n must be primary and not a unit");
    double Nn = double(n.norm());
    i64 rm = i64(std::ceil(std::sqrt(W.x_max * X))) + 1;
    CompensatedSum<cplx> lhs, rhs;
    for (i64 a = -rm; a <= rm; ++a)
        for (i64 b = -rm; b <= rm; ++b) {
            GInt m{a, b};
            double x = double(m.norm()) / X;
            if (x > W.x_max || m.is_zero()) continue;
            int chi = quad_symbol(m, n);
            if (chi) lhs += cplx(chi * W(x));
        }
    double tmax = T->options().t_max;  // w̃ below 1e-13 beyond
    i64 rk = i64(std::ceil(tmax * std::sqrt(Nn / X))) + 1;
    for (i64 a = -rk; a <= rk; ++a)
        for (i64 b = -rk; b <= rk; ++b) {
            GInt k{a, b};
            double t = std::sqrt(double(k.norm()) * X / Nn);
            if (t > tmax) continue;
            rhs += gauss_sum(k, n) * T->w_tilde(t);
        }
    PoissonCheck c{lhs.value(), X / Nn * rhs.value(), 0};
    c.residual = std::abs(c.lhs - c.rhs);
    return c;
}

/// Σ_m w(N(m)/X) against X Σ_k w̃(√(N(k) X)).
inline PoissonCheck poisson_check_trivial(const WeightFunction& W, double X) {
    auto T = TransformTables::shared(W);
    i64 rm = i64(std::ceil(std::sqrt(W.x_max * X))) + 1;
    CompensatedSum<double> lhs, rhs;
    for (i64 a = -rm; a <= rm; ++a)
        for (i64 b = -rm; b <= rm; ++b) {
            double x = double(a * a + b * b) / X;
            if (x <= W.x_max) lhs += W(x);
        }
    double tmax = T->options().t_max;
    i64 rk = i64(std::ceil(tmax / std::sqrt(X))) + 1;
    for (i64 a = -rk; a <= rk; ++a)
        for (i64 b = -rk; b <= rk; ++b) {
            double t = std::sqrt(double(a * a + b * b) * X);
            if (t <= tmax) rhs += T->w_tilde(t);
        }
    PoissonCheck c{lhs.value(), X * rhs.value(), 0};
    c.residual = std::abs(c.lhs - c.rhs);
    return c;
}

}  // namespace qhecke
