#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "empirical.hpp"
#include "expansion.hpp"
#include "specfun.hpp"
#include "transforms.hpp"

namespace qhecke {

struct RatiosOptions {
    i64 euler_cutoff = 100'000;   ///< prime cutoff for A_α on the integration line
    double eps0 = 1e-3;           ///< series branch for |t| < eps0
    double x_max = 200;           ///< quadrature range in x = tL/2π
    double panel = 0.5;           ///< Gauss-Legendre panel width in x
    int order = 16;
};

/// Laurent coefficients c_{-1}, c_0, c_1, c_2 at r = 0.
using Laurent = std::array<double, 4>;

/// Evaluators for the ratios-conjecture integrand. Immutable after construction.
class RatiosContext {
public:
    explicit RatiosContext(RatiosOptions o = {}) : opt_(o), fast_(make_opts(o.euler_cutoff)) {
        Z_ = laurent_of([&](cplx r) { return 2.0 * fast_.zeta_K_log_deriv(1.0 + 2.0 * r); });
        D0_ = laurent_of([&](cplx r) { return dual_base(r); });
    }

    const RatiosOptions& options() const { return opt_; }
    const ZetaKContext& zeta() const { return fast_; }
    const Laurent& zeta_laurent() const { return Z_; }
    const Laurent& dual_laurent() const { return D0_; }

    /// -(8/π) Γ(1/2-r)/Γ(1/2+r) (π²/32)^r ζ_K(1-2r) A(-r, r), the dual term without N(c)^{-r}.
    cplx dual_base(cplx r) const {
        return -8 / pi * std::exp(log_gamma(0.5 - r) - log_gamma(0.5 + r) + r * std::log(pi * pi / 32)) *
               fast_.zeta_K(1.0 - 2.0 * r) * fast_.A_closed(r);
    }

    /// -(8/π) X_c(1/2+r) ζ_K(1-2r) A(-r, r); inside |r| < eps0 only through the series branch.
    cplx dual_term(cplx r, double norm_c, bool laurent = false) const {
        if (norm_c < 1) throw domain_error("dual_term: norm must be at least 1");
        if (std::abs(r) < opt_.eps0) {
            if (!laurent) throw domain_error("dual_term: r inside the series radius");
            return eval_laurent(shifted(D0_, std::log(norm_c)), r);
        }
        return dual_base(r) * std::exp(-r * std::log(norm_c));
    }

    /// 2ζ'_K/ζ_K(1+2r) + 2A_α(r, r) through the prime-sum identity; Re r > 0.
    cplx combined_prime_term(cplx r) const {
        if (!(r.real() > 0)) throw domain_error("combined_prime_term: needs Re(r) > 0");
        return 2.0 * slow().prime_sum_identity(r);
    }

    /// The same quantity from ζ'_K/ζ_K and the Euler-product A_α separately.
    cplx combined_prime_term_direct(cplx r) const {
        return 2.0 * fast_.zeta_K_log_deriv(1.0 + 2.0 * r) + 2.0 * fast_.A_alpha(r);
    }

    /// Even parts at r = it of the prime term, the digamma pair and the dual base.
    struct Pieces {
        double prime = 0;    ///< Re(2ζ'_K/ζ_K(1+2it) + 2A_α(it, it))
        double digamma = 0;  ///< ψ(1/2-it) + ψ(1/2+it)
        cplx dual{};         ///< dual_base(it), unused inside the series radius
        bool series = false;
    };

    Pieces pieces(double t) const {
        Pieces p;
        cplx r(0, t);
        p.digamma = 2 * digamma(cplx(0.5, t)).real();
        double a = 2 * fast_.A_alpha(r).real();
        if (std::abs(t) < opt_.eps0) {
            p.series = true;
            p.prime = Z_[1] - Z_[3] * t * t + a;
        } else {
            p.prime = (2.0 * fast_.zeta_K_log_deriv(1.0 + 2.0 * r)).real() + a;
            p.dual = dual_base(r);
        }
        return p;
    }

    /// Re of the dual term at r = it for one norm, from precomputed pieces.
    double dual_real(const Pieces& p, double t, double norm_c) const {
        double l = std::log(norm_c);
        if (p.series) {
            auto s = shifted(D0_, l);
            return s[1] - s[3] * t * t;
        }
        return (p.dual * std::exp(cplx(0, -t * l))).real();
    }

    /// Real part of the bracketed integrand at r = it for one norm, times φ(tL/2π).
    double integrand(double t, double norm_c, const TestFunction& f, double L) const {
        auto p = pieces(t);
        double bracket = p.prime + std::log(32 * norm_c / (pi * pi)) + p.digamma + dual_real(p, t, norm_c);
        return bracket * f.phi(t * L / (2 * pi));
    }

private:
    static ZetaKOptions make_opts(i64 cut) {
        ZetaKOptions o;
        o.euler_cutoff = cut;
        return o;
    }

    const ZetaKContext& slow() const {
        static const ZetaKContext ctx;
        return ctx;
    }

    template <class F>
    static Laurent laurent_of(F&& f, double rho = 0.05, int points = 32) {
        std::vector<cplx> v;
        for (int j = 0; j < points; ++j) {
            cplx r = std::polar(rho, 2 * pi * (j + 0.5) / points);
            v.push_back(r * f(r));
        }
        Laurent c{};
        for (int k = 0; k < 4; ++k) {
            cplx s = 0;
            for (int j = 0; j < points; ++j) s += v[j] * std::pow(std::polar(rho, 2 * pi * (j + 0.5) / points), -k);
            c[k] = (s / double(points)).real();
        }
        return c;
    }

    /// Coefficients of c(r) e^{-r l}.
    static Laurent shifted(const Laurent& c, double l) {
        Laurent s{};
        s[0] = c[0];
        for (int k = 1; k < 4; ++k) {
            double acc = 0, fact = 1;
            for (int j = k; j >= 0; --j) {
                int p = k - j;
                if (p > 0) fact *= p;
                acc += c[j] * std::pow(-l, p) / fact;
            }
            s[k] = acc;
        }
        return s;
    }

    static cplx eval_laurent(const Laurent& c, cplx r) { return c[0] / r + c[1] + c[2] * r + c[3] * r * r; }

    RatiosOptions opt_;
    ZetaKContext fast_;
    Laurent Z_{}, D0_{};
};

// ---------------------------------------------------------------- family norm groups

struct NormGroups {
    std::vector<double> norms;
    std::vector<double> weights;  ///< summed w(N/X) over the four associates
    double W = 0;
};

/// Family weights grouped by N(c); ungrouped keeps one entry per associate.
inline NormGroups norm_groups(const DensityConfig& cfg, bool grouped = true) {
    auto F = make_family_table(cfg);
    NormGroups G;
    G.W = F.W;
    if (!grouped) {
        for (std::size_t k = 0; k < F.elems.size(); ++k)
            for (int u = 0; u < 4; ++u) {
                G.norms.push_back(double(F.elems[k].norm));
                G.weights.push_back(F.weights[k]);
            }
        return G;
    }
    std::vector<std::size_t> idx(F.elems.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return F.elems[a].norm < F.elems[b].norm; });
    for (std::size_t k : idx) {
        double n = double(F.elems[k].norm);
        if (G.norms.empty() || G.norms.back() != n) {
            G.norms.push_back(n);
            G.weights.push_back(0.0);
        }
        G.weights.back() += 4 * F.weights[k];
    }
    return G;
}

// ---------------------------------------------------------------- prediction

struct FirstOrderTerms {
    double leading = 0;        ///< φ̂(0)
    double tail_integral = 0;  ///< ∫_1^∞ φ̂
    double conductor = 0;      ///< (φ̂(0)/L)(log(32/π²) + 2ψ(1/2) + (2/ŵ(0)) ∫ w log)
    double digamma = 0;        ///< (2/L) ∫ e^{-t/2}/(1-e^{-t}) (φ̂(0) - φ̂(t/L)) dt
    double even_prime = 0;     ///< -(2/L) Σ log N/N^j (1+1/N)^{-1} φ̂(2j log N/L)
    double phi1 = 0;           ///< (φ̂(1)/L)(2γ + log(π²/2^{7/3}) + 2ζ'_K/ζ_K(2) - (8/π)γ_K - Mw'(1)/Mw(1))
};

/// Pieces of the integral on the contour Re r = 0⁺; the half residues at r = 0 of the prime and dual terms cancel.
struct IntegralTerms {
    double prime = 0;      ///< principal value minus φ(0)/2
    double conductor = 0;  ///< ⟨log(32N(c)/π²)⟩ φ̂(0)/L
    double digamma = 0;
    double dual = 0;       ///< principal value plus φ(0)/2
};

struct PredictionReport {
    double X = 0, L = 0;
    double D_ratios_integral = 0;
    double D_ratios_first_order = 0;
    FirstOrderTerms first_order;
    IntegralTerms integral;
    std::size_t points = 0;   ///< t-nodes in the finest rule
    double max_error = 0;     ///< quadrature difference plus tail estimate
    std::size_t norm_groups = 0;
};

/// 2γ + log(π²/2^{7/3}) + 2ζ'_K/ζ_K(2) - (8/π)γ_K - Mw'(1)/Mw(1).
inline double phi1_constant(const ZetaKContext& ctx, const WeightFunction& W) {
    return 2 * ctx.gamma + std::log(pi * pi / std::pow(2.0, 7.0 / 3)) + 2 * ctx.zetaK_logderiv_2 - 8 / pi * ctx.gammaK -
           W.M_log_deriv_1();
}

inline FirstOrderTerms first_order_terms(const DensityConfig& cfg, const ZetaKContext& ctx) {
    validate(cfg);
    const auto& f = cfg.test;
    double L = cfg.L();
    FirstOrderTerms T;
    T.leading = f.hat(0);
    T.tail_integral = f.sigma() > 1 ? f.hat_integral(1, f.sigma()) : 0.0;
    T.conductor = f.hat(0) / L * conductor_constant(cfg.weight);
    T.digamma = digamma_integral_term(f, L);
    T.even_prime = s_even_main_term(cfg);
    T.phi1 = f.hat(1) / L * phi1_constant(ctx, cfg.weight);
    return T;
}

inline double sum_terms(const FirstOrderTerms& T) {
    return T.leading + T.tail_integral + T.conductor + T.digamma + T.even_prime + T.phi1;
}

namespace detail {

struct RatiosNodes {
    std::vector<double> x, w;
};

inline RatiosNodes ratios_nodes(double x_max, double panel, int order) {
    RatiosNodes n;
    const auto& r = gauss_legendre(order);
    int panels = int(std::ceil(x_max / panel));
    double h = x_max / panels;
    for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            n.x.push_back(p * h + 0.5 * h * (1 + r.x[i]));
            n.w.push_back(0.5 * h * r.w[i]);
        }
    return n;
}

struct RatiosSums {
    double prime = 0, digamma = 0, dual = 0;
};

/// (2/L) ∫_0^{x_max} (piece)(2πx/L) φ(x) dx for the three t-dependent pieces.
inline RatiosSums ratios_sums(const RatiosContext& R, const NormGroups& G, const TestFunction& f, double L,
                              const RatiosNodes& n) {
    CompensatedSum<double> sp, sd, sq;
    std::vector<cplx> ph(G.norms.size());
    std::vector<double> ln(G.norms.size());
    for (std::size_t k = 0; k < G.norms.size(); ++k) ln[k] = std::log(G.norms[k]);
    for (std::size_t i = 0; i < n.x.size(); ++i) {
        double t = 2 * pi * n.x[i] / L, wphi = n.w[i] * f.phi(n.x[i]);
        auto p = R.pieces(t);
        double dual;
        if (p.series) {
            CompensatedSum<double> a;
            for (std::size_t k = 0; k < G.norms.size(); ++k) a += G.weights[k] * R.dual_real(p, t, G.norms[k]);
            dual = a.value() / G.W;
        } else {
            CompensatedSum<cplx> a;
            for (std::size_t k = 0; k < G.norms.size(); ++k) a += G.weights[k] * std::exp(cplx(0, -t * ln[k]));
            dual = (p.dual * a.value() / G.W).real();
        }
        sp += wphi * p.prime;
        sq += wphi * p.digamma;
        sd += wphi * dual;
    }
    return {2 / L * sp.value(), 2 / L * sq.value(), 2 / L * sd.value()};
}

}  // namespace detail

/// Digamma-pair tail beyond x_max with φ replaced by its mean; zero for the rapidly decaying bump.
inline double ratios_digamma_tail(const TestFunction& f, double L, double x_max) {
    if (f.kind() != TestFunction::Kind::fejer) return 0.0;
    double s = f.sigma();
    auto g = [&](double x) { return 2 * digamma(cplx(0.5, 2 * pi * x / L)).real() / (2 * pi * pi * s * x * x); };
    return 2 / L * integrate_to_inf(g, x_max, 1e-12).value;
}

/// (1/W) Σ_c w(N(c)/X) (1/2π) ∫ (bracket)(t) φ(tL/2π) dt on the real axis, with the first-order expansion alongside.
inline PredictionReport ratios_prediction(const DensityConfig& cfg, const RatiosContext& R, const ZetaKContext& ctx,
                                          bool grouped = true) {
    validate(cfg);
    const auto& f = cfg.test;
    double L = cfg.L();
    PredictionReport out;
    out.X = cfg.X;
    out.L = L;
    auto G = norm_groups(cfg, grouped);
    out.norm_groups = G.norms.size();
    CompensatedSum<double> lg;
    for (std::size_t k = 0; k < G.norms.size(); ++k) lg += G.weights[k] * std::log(32 * G.norms[k] / (pi * pi));
    const auto& o = R.options();
    auto fine = detail::ratios_nodes(o.x_max, o.panel, o.order);
    auto coarse = detail::ratios_nodes(o.x_max, 2 * o.panel, o.order);
    auto a = detail::ratios_sums(R, G, f, L, fine);
    auto b = detail::ratios_sums(R, G, f, L, coarse);
    double dtail = ratios_digamma_tail(f, L, o.x_max);
    double phi0 = f.phi(0.0);
    auto& I = out.integral;
    I.prime = a.prime - phi0 / 2;
    I.conductor = lg.value() / G.W * f.hat(0) / L;
    I.digamma = a.digamma + dtail;
    I.dual = a.dual + phi0 / 2;
    out.D_ratios_integral = I.prime + I.conductor + I.digamma + I.dual;
    out.points = fine.x.size();
    // oscillatory pieces beyond x_max fall off like x_max^{-2}
    double osc_tail = f.kind() == TestFunction::Kind::fejer ? 2 / L * 10.0 / (2 * pi * pi * f.sigma() * o.x_max * o.x_max) : 0.0;
    out.max_error = std::abs(a.prime - b.prime) + std::abs(a.digamma - b.digamma) + std::abs(a.dual - b.dual) + osc_tail;
    out.first_order = first_order_terms(cfg, ctx);
    out.D_ratios_first_order = sum_terms(out.first_order);
    return out;
}

// ---------------------------------------------------------------- comparison

struct CompareRow {
    double X = 0, L = 0;
    double D_emp = 0, D_int = 0, D_fo = 0, D_thm11 = 0;
    double r_emp_int = 0, r_emp_fo = 0, rL2_emp_fo = 0;
};

struct CompareOptions {
    int order = 2;            ///< expansion order for the D_thm11 column
    i64 d_cutoff = 4'000'000;  ///< prime cutoff for d_m
};

inline std::vector<CompareRow> compare(const DensityConfig& base, const std::vector<double>& grid, CompareOptions co = {}) {
    validate(base);
    if (!(base.test.sigma() < 2)) throw domain_error("compare: needs σ < 2");
    ZetaKContext ctx;
    RatiosContext R;
    auto K = ExpansionKernels::shared(base.weight, ctx.zetaK2);
    PrimeTable T(co.d_cutoff);
    auto d = d_coefficients(co.order, T, co.d_cutoff);
    auto c = c_w_coefficients(co.order, *K);
    auto E = expansion_coefficients(co.order, base.test, base.weight, d, c);
    std::vector<CompareRow> rows;
    for (double X : grid) {
        DensityConfig cfg = base;
        cfg.X = X;
        validate(cfg);
        CompareRow r;
        r.X = X;
        r.L = cfg.L();
        r.D_emp = one_level_density(cfg, LoopOrder::prime_outer).D_total;
        auto P = ratios_prediction(cfg, R, ctx);
        r.D_int = P.D_ratios_integral;
        r.D_fo = P.D_ratios_first_order;
        r.D_thm11 = theorem_prediction(X, cfg.test, E);
        r.r_emp_int = r.D_emp - r.D_int;
        r.r_emp_fo = r.D_emp - r.D_fo;
        r.rL2_emp_fo = r.r_emp_fo * r.L * r.L;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace qhecke
