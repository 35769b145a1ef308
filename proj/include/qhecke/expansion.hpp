#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "empirical.hpp"
#include "specfun.hpp"
#include "transforms.hpp"

namespace qhecke {

struct ValErr {
    double value = 0;
    double error = 0;
};

// ---------------------------------------------------------------- Möbius data over primary l

/// Σ_{N(l) = n} μ(l)/n² over primary squarefree l, grouped by norm, with prefix sums Φ.
class MobiusTable {
public:
    explicit MobiusTable(i64 bound) : bound_(bound) {
        auto sf = squarefree_primaries(bound);
        std::stable_sort(sf.begin(), sf.end(), [](const auto& x, const auto& y) { return x.norm < y.norm; });
        CompensatedSum<double> acc;
        prefix_.push_back(0.0);
        for (std::size_t k = 0; k < sf.size();) {
            i64 n = sf[k].norm;
            int m = 0;
            while (k < sf.size() && sf[k].norm == n) m += sf[k++].mu;
            if (m == 0) continue;
            double c = double(m) / (double(n) * double(n));
            norms_.push_back(n);
            coef_.push_back(c);
            acc += c;
            prefix_.push_back(acc.value());
        }
    }

    i64 bound() const { return bound_; }
    const std::vector<i64>& norms() const { return norms_; }
    const std::vector<double>& coef() const { return coef_; }

    /// First index with norm > t.
    std::size_t index_above(double t) const {
        return std::upper_bound(norms_.begin(), norms_.end(), t, [](double v, i64 n) { return v < double(n); }) -
               norms_.begin();
    }
    /// Φ(t) = Σ_{N(l) <= t} μ(l)/N(l)².
    double Phi(double t) const {
        if (t > double(bound_)) throw domain_error("MobiusTable: argument beyond bound");
        return prefix_[index_above(t)];
    }

private:
    i64 bound_;
    std::vector<i64> norms_;
    std::vector<double> coef_;
    std::vector<double> prefix_;
};

/// Σ_{N(l) > B} 1/N(l)² over odd ideals is about this constant over B.
inline constexpr double odd_ideal_tail_density = 0.4;

// ---------------------------------------------------------------- lattice kernels

struct KernelOptions {
    i64 mobius_bound = 4'000'000;
    double log_step = 5e-4;   ///< H table step in log Y
    double direct_max = 4;    ///< K(Y) by direct lattice sum for Y <= direct_max, by Poisson above
};

/// K(Y) = Σ_{k≠0} g(N(k)/Y), F(Y) = K(2Y)/2 - K(Y), H = F - g(0)/2, and the S₁, S₂, h₁, h₂ sums built on them.
class ExpansionKernels {
public:
    ExpansionKernels(const WeightFunction& W, double zetaK2, KernelOptions o = {})
        : T_(TransformTables::shared(W)), opt_(o), mob_(o.mobius_bound) {
        C = 3 * zetaK2 / (pi * W.w_hat0);
        g0 = T_->g(0);
        Phi_inf = 4 / (3 * zetaK2);
        gt0_ = T_->g_tilde(0);
        Ymin_ = 1 / (2 * T_->g_max_arg());
        Ymax_ = T_->g1_max_arg();
        r2_ = lattice_counts(i64(std::ceil(std::max(2 * o.direct_max * T_->g_max_arg(), 4 * Ymax_))) + 2);
        double a = std::log(Ymin_), b = std::log(Ymax_);
        int n = int(std::ceil((b - a) / o.log_step));
        double h = (b - a) / n;
        std::vector<double> ys;
        for (int k = 0; k <= n; ++k) ys.push_back(F_exact(std::exp(a + k * h)) - g0 / 2);
        H_ = UniformCubicTable(a, h, ys);
        double d = 0.05;
        g2_ = (2 * T_->g(d) - 2 * g0) / (d * d);
    }

    double C = 0;        ///< 3ζ_K(2)/(π ŵ(0))
    double g0 = 0;       ///< g(0) = w̃(0)
    double Phi_inf = 0;  ///< 4/(3ζ_K(2))

    const TransformTables& tables() const { return *T_; }
    const MobiusTable& mobius() const { return mob_; }
    double Y_min() const { return Ymin_; }
    double Y_max() const { return Ymax_; }
    /// Largest y for which S₂(y) uses complete Möbius data.
    double y_exact_max() const { return double(mob_.bound()) / Ymax_; }

    double K_direct(double Y) const {
        CompensatedSum<double> s;
        double gm = T_->g_max_arg();
        for (i64 n = 1; double(n) <= gm * Y; ++n) {
            if (std::size_t(n) >= r2_.size()) throw domain_error("K_direct: argument beyond lattice table");
            if (r2_[n]) s += r2_[n] * T_->g(double(n) / Y);
        }
        return s.value();
    }

    double K_poisson(double Y) const {
        CompensatedSum<double> s;
        for (i64 n = 1; double(n) * Y <= Ymax_; ++n) {
            if (std::size_t(n) >= r2_.size()) throw domain_error("K_poisson: argument beyond lattice table");
            if (r2_[n]) s += r2_[n] * T_->g1(double(n) * Y);
        }
        return Y * gt0_ + Y * s.value() - g0;
    }

    double K(double Y) const { return Y <= opt_.direct_max ? K_direct(Y) : K_poisson(Y); }

    /// F(Y) = K(2Y)/2 - K(Y), both halves by the same method.
    double F_exact(double Y) const {
        if (Y <= opt_.direct_max / 2) return 0.5 * K_direct(2 * Y) - K_direct(Y);
        return 0.5 * K_poisson(2 * Y) - K_poisson(Y);
    }

    /// F(Y) - g(0)/2 from the table: -g(0)/2 below Y_min, 0 above Y_max.
    double H(double Y) const {
        if (Y <= Ymin_) return -g0 / 2;
        if (Y >= Ymax_) return 0.0;
        return H_(std::log(Y));
    }

    /// S₁(y) = C Σ_l μ(l)/N(l)² (F(N(l) y) - g(0)/2) = y Σ_{j≠0} h₁(N(j) y).
    double S1(double y) const {
        CompensatedSum<double> s;
        const auto& N = mob_.norms();
        const auto& c = mob_.coef();
        for (std::size_t k = 0; k < N.size() && double(N[k]) * y < Ymax_; ++k) s += c[k] * H(double(N[k]) * y);
        return C * s.value();
    }

    /// S₂(y) = C Σ_l μ(l)/N(l)² F(N(l)/y) = Σ_{k≠0} h₂(N(k) y).
    ValErr S2(double y) const {
        double lo = y * Ymin_, hi = y * Ymax_;
        if (lo > double(mob_.bound())) throw domain_error("S2: argument beyond the Möbius table");
        const auto& N = mob_.norms();
        const auto& c = mob_.coef();
        CompensatedSum<double> s;
        s += g0 / 2 * (Phi_inf - mob_.Phi(lo));
        std::size_t k0 = mob_.index_above(lo);
        for (std::size_t k = k0; k < N.size() && double(N[k]) < hi; ++k) s += c[k] * H(double(N[k]) / y);
        ValErr r{C * s.value(), 0.0};
        if (hi > double(mob_.bound())) {
            double hmax = 0;
            for (double Y = double(mob_.bound()) / y; Y < Ymax_; Y *= 1.05) hmax = std::max(hmax, std::abs(H(Y)));
            r.error = C * hmax * odd_ideal_tail_density / double(mob_.bound());
        }
        return r;
    }

    /// h₁(x) = C Σ_l μ(l)/N(l) (g̃(√(2N(l)x)) - g̃(√(N(l)x))), a finite sum.
    double h1(double x) const {
        if (!(x > 0)) throw domain_error("h1: x must be positive");
        CompensatedSum<double> s;
        const auto& N = mob_.norms();
        const auto& c = mob_.coef();
        for (std::size_t k = 0; k < N.size() && double(N[k]) * x < Ymax_; ++k) {
            double n = double(N[k]);
            s += c[k] * n * (T_->g1(2 * n * x) - T_->g1(n * x));
        }
        return C * s.value();
    }

    /// h₂(x) = C Σ_l μ(l)/N(l)² (g(x/(2N(l)))/2 - g(x/N(l))), l truncated at N(l) <= lmax with the g(0) tail added.
    ValErr h2(double x, i64 lmax = 10'000, double tol = HUGE_VAL) const {
        if (x < 0) throw domain_error("h2: x must be nonnegative");
        if (lmax < 1 || lmax > mob_.bound()) throw domain_error("h2: lmax outside the Möbius table");
        const auto& N = mob_.norms();
        const auto& c = mob_.coef();
        CompensatedSum<double> s;
        for (std::size_t k = 0; k < N.size() && N[k] <= lmax; ++k) {
            double n = double(N[k]);
            s += c[k] * (0.5 * T_->g(x / (2 * n)) - T_->g(x / n));
        }
        s += -g0 / 2 * (Phi_inf - mob_.Phi(double(lmax)));
        double Lm = double(lmax), err;
        if (x <= Lm) {
            // next Taylor term of g around 0 over the dropped l
            err = C * std::abs(g2_) * 0.5 * x * x * odd_ideal_tail_density / (3 * Lm * Lm * Lm);
        } else {
            err = C * 1.5 * g0 * odd_ideal_tail_density / Lm;
        }
        if (err > tol) throw domain_error("h2: tail estimate above tolerance");
        return {C * s.value(), err};
    }

    static std::shared_ptr<const ExpansionKernels> shared(const WeightFunction& W, double zetaK2, KernelOptions o = {}) {
        static std::mutex mu;
        static std::map<std::pair<std::string, i64>, std::shared_ptr<const ExpansionKernels>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_pair(W.name, o.mobius_bound);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto K = std::make_shared<const ExpansionKernels>(W, zetaK2, o);
        cache.emplace(key, K);
        return K;
    }

private:
    std::shared_ptr<const TransformTables> T_;
    KernelOptions opt_;
    MobiusTable mob_;
    std::vector<int> r2_;
    UniformCubicTable H_;
    double gt0_ = 0, Ymin_ = 0, Ymax_ = 0, g2_ = 0;
};

// ---------------------------------------------------------------- J(X)

namespace detail {

/// Composite Gauss-Legendre over [a, b] with panels of width <= w; also returns the half-panel difference.
template <class F>
ValErr gl_with_check(F&& f, double a, double b, double w = 0.5, int order = 16) {
    if (!(b > a)) return {0.0, 0.0};
    int n = std::max(2, int(std::ceil((b - a) / w)));
    if (n % 2) ++n;
    double fine = gl_composite(f, a, b, n, order);
    double coarse = gl_composite(f, a, b, n / 2, order);
    return {fine, std::abs(fine - coarse)};
}

}  // namespace detail

/// J(X) = (1/L) ∫_0^∞ [φ̂(1+τ/L) S₁(e^{τ/2}) + φ̂(1-τ/L) S₂(e^{τ/2})] dτ.
inline ValErr J_X(double X, const TestFunction& f, const ExpansionKernels& K) {
    if (!(X > std::exp(1.0))) throw domain_error("J_X: X must exceed e");
    double L = std::log(X), sigma = f.sigma();
    ValErr out;
    if (sigma > 1) {
        double top = std::min((sigma - 1) * L, 2 * std::log(K.Y_max()));
        auto g = [&](double t) { return f.hat(1 + t / L) * K.S1(std::exp(t / 2)); };
        auto r = detail::gl_with_check(g, 0.0, top);
        out.value += r.value;
        out.error += r.error;
    }
    double trunc = 0;
    auto g = [&](double t) {
        ValErr s = K.S2(std::exp(t / 2));
        return f.hat(1 - t / L) * s.value;
    };
    for (auto [a, b] : {std::pair{0.0, L}, std::pair{L, (1 + sigma) * L}}) {
        auto r = detail::gl_with_check(g, a, b);
        out.value += r.value;
        out.error += r.error;
    }
    if ((1 + sigma) * L > 2 * std::log(K.y_exact_max())) {
        double ym = K.y_exact_max();
        trunc = K.S2(2 * ym).error * ((1 + sigma) * L - 2 * std::log(ym));
    }
    out.value /= L;
    out.error = (out.error + trunc) / L;
    return out;
}

/// 2γ + 2log4 + log(π²/32) + 2ζ'_K/ζ_K(2) - (4/3)log2 - (8/π)γ_K - Mw'(1)/Mw(1).
inline double J_first_order_constant(const ZetaKContext& ctx, const WeightFunction& W) {
    return 2 * ctx.gamma + 2 * std::log(4.0) + std::log(pi * pi / 32) + 2 * ctx.zetaK_logderiv_2 -
           4.0 / 3 * std::log(2.0) - 8 / pi * ctx.gammaK - W.M_log_deriv_1();
}

inline double J_first_order(double X, const TestFunction& f, const ZetaKContext& ctx, const WeightFunction& W) {
    if (!(X > std::exp(1.0))) throw domain_error("J_first_order: X must exceed e");
    return f.hat(1) / std::log(X) * J_first_order_constant(ctx, W);
}

// ---------------------------------------------------------------- c_{w,m}

struct CoefficientList {
    std::vector<double> value;  ///< entry m-1 holds order m
    std::vector<double> error;
};

/// c_{w,m} = (1/(m-1)!) ∫_0^∞ (τ^{m-1} S₁(e^{τ/2}) + (-τ)^{m-1} S₂(e^{τ/2})) dτ, m = 1..M.
inline CoefficientList c_w_coefficients(int M, const ExpansionKernels& K) {
    if (M < 1) throw domain_error("c_w_coefficients: M must be positive");
    double t1 = 2 * std::log(K.Y_max()), t2 = 2 * std::log(K.y_exact_max());
    // tabulate S₁, S₂ on fixed composite rules once and reuse for every m
    auto nodes = [](double a, double b, int panels, int order) {
        std::vector<std::pair<double, double>> out;
        const auto& r = gauss_legendre(order);
        double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p)
            for (std::size_t i = 0; i < r.x.size(); ++i) out.push_back({a + p * h + 0.5 * h * (1 + r.x[i]), 0.5 * h * r.w[i]});
        return out;
    };
    int p1 = int(std::ceil(t1 / 0.5)), p2 = int(std::ceil(t2 / 0.5));
    if (p1 % 2) ++p1;
    if (p2 % 2) ++p2;
    auto n1f = nodes(0, t1, p1, 16), n1c = nodes(0, t1, p1 / 2, 16);
    auto n2f = nodes(0, t2, p2, 16), n2c = nodes(0, t2, p2 / 2, 16);
    auto eval1 = [&](const auto& nd) {
        std::vector<double> v;
        for (auto [t, w] : nd) v.push_back(K.S1(std::exp(t / 2)));
        return v;
    };
    auto eval2 = [&](const auto& nd) {
        std::vector<double> v;
        for (auto [t, w] : nd) v.push_back(K.S2(std::exp(t / 2)).value);
        return v;
    };
    auto s1f = eval1(n1f), s1c = eval1(n1c), s2f = eval2(n2f), s2c = eval2(n2c);
    // envelope |S₂(y)| <= A y^{-3/2} fitted on the last four units of τ
    double A = 0;
    for (std::size_t i = 0; i < n2f.size(); ++i)
        if (n2f[i].first > t2 - 4) A = std::max(A, std::abs(s2f[i]) * std::exp(0.75 * n2f[i].first));

    CoefficientList out;
    double fact = 1;
    for (int m = 1; m <= M; ++m) {
        if (m > 1) fact *= (m - 1);
        auto moment = [&](const auto& nd, const std::vector<double>& v) {
            CompensatedSum<double> s;
            for (std::size_t i = 0; i < nd.size(); ++i) s += nd[i].second * std::pow(nd[i].first, m - 1) * v[i];
            return s.value();
        };
        double sign = (m - 1) % 2 ? -1.0 : 1.0;
        double a = moment(n1f, s1f), ac = moment(n1c, s1c);
        double b = moment(n2f, s2f), bc = moment(n2c, s2c);
        double tail = A * integrate_to_inf([&](double t) { return std::pow(t, m - 1) * std::exp(-0.75 * t); }, t2, 1e-12).value;
        out.value.push_back((a + sign * b) / fact);
        out.error.push_back((std::abs(a - ac) + std::abs(b - bc) + tail) / fact);
    }
    return out;
}

// ---------------------------------------------------------------- d_m

namespace detail {

/// ∫ (2 log t)^k t^{-2} dt = -2^k t^{-1} Σ_i k!/(k-i)! (log t)^{k-i}.
inline double G_antideriv(int k, double t) {
    double lt = std::log(t), s = 0, c = 1;
    for (int i = 0; i <= k; ++i) {
        s += c * std::pow(lt, k - i);
        c *= (k - i);
    }
    return -std::pow(2.0, k) / t * s;
}

}  // namespace detail

struct DCoefficients {
    std::vector<double> d;      ///< d_1..d_M
    std::vector<double> error;
    std::vector<double> P, C1, e;  ///< the prime-power, alternating and E(t) pieces, index k = m-1
    i64 cutoff = 0;
    double E_constant = 0;      ///< max |E(t)|/√t over the upper decade of the sieve
};

/// d_{k+1} = -2P_k/k! - C₁(k)/k! - 2e_k/k! + 4e_{k-1}/(k-1)! [k >= 1] - 2[k = 0], from primes up to B.
inline DCoefficients d_coefficients(int M, const PrimeTable& T, i64 B) {
    if (M < 0) throw domain_error("d_coefficients: M must be nonnegative");
    T.require(B);
    DCoefficients out;
    out.cutoff = B;
    double lB = std::log(double(B));
    // E(t) envelope over [B/10, B] at prime norms
    {
        CompensatedSum<double> theta;
        double cE = 0;
        for (const auto& P : T.primes()) {
            if (P.norm > B) break;
            double t = double(P.norm);
            theta += std::log(t);
            if (t >= double(B) / 10) {
                cE = std::max(cE, std::abs(theta.value() - t) / std::sqrt(t));
                cE = std::max(cE, std::abs(theta.value() - std::log(t) - t) / std::sqrt(t));
            }
        }
        out.E_constant = cE;
    }
    double fact = 1;
    for (int k = 0; k < M; ++k) {
        if (k > 0) fact *= k;
        CompensatedSum<double> P, C1, th;
        double Gb = detail::G_antideriv(k, double(B));
        for (const auto& Q : T.primes()) {
            if (Q.norm > B) break;
            double N = double(Q.norm), lN = std::log(N);
            double inner = 0, Nj = N * N;
            for (int j = 2; Nj < 1e300; ++j, Nj *= N) {
                double term = std::pow(2 * j * lN, k) / Nj;
                inner += term;
                if (term < 1e-22 * (inner + 1e-300)) break;
            }
            P += lN / (1 + 1 / N) * inner;
            C1 += -std::pow(2 * lN, k + 1) / (N * (N + 1));
            th += lN * (Gb - detail::G_antideriv(k, N));
        }
        auto tailP = integrate_to_inf([&](double t) { return std::pow(4 * std::log(t), k) / (t * t); }, double(B), 1e-14).value;
        auto tailC = integrate_to_inf([&](double t) { return 2 * std::pow(2 * std::log(t), k) / (t * t); }, double(B), 1e-14).value;
        double Pk = P.value() + tailP;
        double Ck = C1.value() - tailC;
        double ek = th.value() - std::pow(2 * lB, k + 1) / (2 * (k + 1));
        double ek_err = out.E_constant *
                        integrate_to_inf([&](double t) { return std::pow(t, -1.5) * std::pow(2 * std::log(t), k); }, double(B), 1e-12).value;
        out.P.push_back(Pk);
        out.C1.push_back(Ck);
        out.e.push_back(ek);
        double d = -2 * Pk / fact - Ck / fact - 2 * ek / fact;
        double err = 2 * ek_err / fact + out.E_constant * std::sqrt(double(B)) * (tailP + tailC) / double(B);
        if (k >= 1) {
            double fk1 = fact / k;
            d += 4 * out.e[k - 1] / fk1;
            err += 4 * out.E_constant *
                   integrate_to_inf([&](double t) { return std::pow(t, -1.5) * std::pow(2 * std::log(t), k - 1); }, double(B), 1e-12).value / fk1;
        } else {
            d -= 2;  // boundary term from E(1) = -1
        }
        out.d.push_back(d);
        out.error.push_back(err);
    }
    return out;
}

/// κ_m, the Taylor coefficients at r = 0 of A_α(r, r) + ζ'_K/ζ_K(1+2r) + 1/(2r), by a discrete Cauchy integral.
inline std::vector<double> combined_taylor(int M, const ZetaKContext& ctx, double rho = 0.05, int points = 16) {
    std::vector<cplx> vals;
    for (int j = 0; j < points; ++j) {
        cplx r = std::polar(rho, 2 * pi * (j + 0.5) / points);
        vals.push_back(ctx.A_alpha(r) + ctx.zeta_K_log_deriv(1.0 + 2.0 * r) + 1.0 / (2.0 * r));
    }
    std::vector<double> kappa;
    for (int m = 0; m < M; ++m) {
        cplx s = 0;
        for (int j = 0; j < points; ++j) {
            cplx r = std::polar(rho, 2 * pi * (j + 0.5) / points);
            s += vals[j] * std::pow(r, -m);
        }
        kappa.push_back((s / double(points)).real());
    }
    return kappa;
}

/// d_{m+1} = 2(-1)^m κ_m, the Laurent route to the same coefficients.
inline std::vector<double> d_coefficients_laurent(int M, const ZetaKContext& ctx) {
    auto kappa = combined_taylor(M, ctx);
    std::vector<double> d;
    for (int m = 0; m < M; ++m) d.push_back(2 * (m % 2 ? -1.0 : 1.0) * kappa[m]);
    return d;
}

// ---------------------------------------------------------------- assembly

/// ∫_0^∞ e^{-x/2} x^k/(1 - e^{-x}) dx for k >= 1, with the refinement difference as error.
inline ValErr digamma_moment(int k) {
    if (k < 1) throw domain_error("digamma_moment: k must be at least 1");
    auto f = [&](double x) { return x == 0 ? (k == 1 ? 1.0 : 0.0) : std::exp(-x / 2) * std::pow(x, k) / -std::expm1(-x); };
    double top = 120 + 10 * k;
    return detail::gl_with_check(f, 0.0, top, 0.5, 20);
}

/// Closed form Γ(k+1)(2^{k+1} - 1)ζ(k+1).
inline double digamma_moment_closed(int k) {
    return std::tgamma(k + 1.0) * (std::pow(2.0, k + 1) - 1) * riemann_zeta(double(k + 1)).real();
}

struct ExpansionCoefficients {
    int M = 0;
    std::vector<double> d, d_error;
    std::vector<double> c_w, c_w_error;
    std::vector<double> R_w, R_w_error;
};

/// log(32/π²) + 2ψ(1/2) + (2/ŵ(0)) ∫_0^∞ w log.
inline double conductor_constant(const WeightFunction& W) {
    return std::log(32 / (pi * pi)) + 2 * digamma(0.5) + 2 / W.w_hat0 * W.log_moment();
}

/// R_{w,m}(φ) for m = 1..M from d_m and c_{w,m}.
inline ExpansionCoefficients expansion_coefficients(int M, const TestFunction& f, const WeightFunction& W,
                                                    const DCoefficients& d, const CoefficientList& c) {
    if (int(d.d.size()) < M || int(c.value.size()) < M) throw domain_error("expansion_coefficients: too few inputs");
    ExpansionCoefficients E;
    E.M = M;
    double fact = 1;
    for (int m = 1; m <= M; ++m) {
        if (m > 1) fact *= (m - 1);
        E.d.push_back(d.d[m - 1]);
        E.d_error.push_back(d.error[m - 1]);
        E.c_w.push_back(c.value[m - 1]);
        E.c_w_error.push_back(c.error[m - 1]);
        double h0 = f.hat_deriv(m - 1, 0.0), h1 = f.hat_deriv(m - 1, 1.0);
        double R = c.value[m - 1] * h1 + d.d[m - 1] * h0;
        double err = c.error[m - 1] * std::abs(h1) + d.error[m - 1] * std::abs(h0);
        if (m == 1) {
            R += h0 * conductor_constant(W);
        } else {
            auto mom = digamma_moment(m - 1);
            R -= 2 * h0 / fact * mom.value;
            err += 2 * std::abs(h0) / fact * mom.error;
        }
        E.R_w.push_back(R);
        E.R_w_error.push_back(err);
    }
    return E;
}

/// φ̂(0) - ½∫_{-1}^{1} φ̂.
inline double leading_term(const TestFunction& f) { return f.hat(0) - f.hat_integral(0, 1); }

/// φ̂(0) - ½∫_{-1}^{1} φ̂ + Σ_{m<=M} R_{w,m}/L^m.
inline double theorem_prediction(double X, const TestFunction& f, const ExpansionCoefficients& E, int M = -1) {
    if (M < 0) M = E.M;
    double L = std::log(X), s = leading_term(f), Lm = 1;
    for (int m = 1; m <= M; ++m) {
        Lm *= L;
        s += E.R_w[m - 1] / Lm;
    }
    return s;
}

struct PreciseAssembly {
    double leading = 0, conductor = 0, J = 0, J_error = 0, digamma = 0, d_terms = 0, total = 0;
};

/// Five-term decomposition with J(X) and the digamma term kept exact and S_even expanded to order M.
inline PreciseAssembly precise_assembly(double X, const TestFunction& f, const WeightFunction& W, const ExpansionKernels& K,
                                        const DCoefficients& d, int M) {
    double L = std::log(X);
    PreciseAssembly P;
    P.leading = leading_term(f);
    P.conductor = f.hat(0) / L * conductor_constant(W);
    auto j = J_X(X, f, K);
    P.J = j.value;
    P.J_error = j.error;
    P.digamma = digamma_integral_term(f, L);
    double Lm = 1;
    for (int m = 1; m <= M; ++m) {
        Lm *= L;
        P.d_terms += d.d[m - 1] * f.hat_deriv(m - 1, 0.0) / Lm;
    }
    P.total = P.leading + P.conductor + P.J + P.digamma + P.d_terms;
    return P;
}

}  // namespace qhecke
