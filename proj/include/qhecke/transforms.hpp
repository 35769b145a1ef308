#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "numeric.hpp"
#include "specfun.hpp"

namespace qhecke {

// ---------------------------------------------------------------- Bessel J0

/// J0(x): power series (long double) below 12, Hankel asymptotic expansion above.
inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x < 12) {
        long double q = -0.25L * (long double)x * x, term = 1, s = 1;
        for (int k = 1; k < 200; ++k) {
            term *= q / ((long double)k * k);
            s += term;
            if (std::abs(term) < 1e-22L) break;
        }
        return double(s);
    }
    // P = 1 - a_2/x^2 + a_4/x^4 - ..., Q = -a_1/x + a_3/x^3 - ..., a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k)
    double P = 0, Q = 0, a = 1, prev = 1e300;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) a *= (2.0 * k - 1) * (2.0 * k - 1) / (8.0 * k * x);  // a_k / x^k
        if (std::abs(a) > prev) break;
        prev = std::abs(a);
        int m = k % 4;
        if (m == 0) {
            P += a;
        } else if (m == 1) {
            Q -= a;
        } else if (m == 2) {
            P -= a;
        } else {
            Q += a;
        }
        if (std::abs(a) < 1e-17) break;
    }
    double ph = x - pi / 4;
    return std::sqrt(2 / (pi * x)) * (P * std::cos(ph) - Q * std::sin(ph));
}

// ---------------------------------------------------------------- test functions

/// Even test function φ with compactly supported φ̂ on (-σ, σ).
class TestFunction {
public:
    enum class Kind { fejer, bump };

    static TestFunction fejer(double sigma) { return TestFunction(Kind::fejer, sigma); }
    static TestFunction bump(double sigma) { return TestFunction(Kind::bump, sigma); }

    /// Parses "fejer:1.5" or "bump:1.2".
    static TestFunction parse(const std::string& spec) {
        auto pos = spec.find(':');
        if (pos == std::string::npos) throw domain_error("test function spec must look like kind:sigma");
        std::string kind = spec.substr(0, pos);
        double sigma = 0;
        try {
            std::size_t used = 0;
            sigma = std::stod(spec.substr(pos + 1), &used);
            if (used != spec.size() - pos - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw domain_error("bad support radius in '" + spec + "'");
        }
        if (kind == "fejer") return fejer(sigma);
        if (kind == "bump") return bump(sigma);
        throw domain_error("unknown test function kind '" + kind + "'");
    }

    Kind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    std::string spec() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s:%.15g", kind_ == Kind::fejer ? "fejer" : "bump", sigma_);
        return buf;
    }

    /// φ̂(u); exactly 0 for |u| >= σ.
    double hat(double u) const {
        u = std::abs(u);
        if (u >= sigma_) return 0.0;
        double v = u / sigma_;
        if (kind_ == Kind::fejer) return 1 - v;
        return std::exp(1 - 1 / (1 - v * v));
    }

    /// φ(x) for real x.
    double phi(double x) const {
        if (kind_ == Kind::fejer) {
            double a = pi * sigma_ * x;
            if (std::abs(a) < 1e-8) return sigma_ * (1 - a * a / 3);
            double s = std::sin(a) / a;
            return sigma_ * s * s;
        }
        return bump_phi(cplx(x)).real();
    }

    /// φ(z) continued to complex z.
    cplx phi(cplx z) const {
        if (kind_ == Kind::fejer) {
            cplx a = pi * sigma_ * z;
            if (std::abs(a) < 1e-6) return sigma_ * (1.0 - a * a / 3.0 + a * a * a * a * (2.0 / 45));
            cplx s = std::sin(a) / a;
            return sigma_ * s * s;
        }
        return bump_phi(z);
    }

    /// m-th derivative of φ̂ at u >= 0; right derivative at 0, left derivative at σ, zero beyond σ.
    double hat_deriv(int m, double u) const {
        if (m < 0) throw domain_error("hat_deriv: negative order");
        if (u < 0) throw domain_error("hat_deriv: defined for u >= 0");
        if (m == 0) return u >= sigma_ ? 0.0 : hat(u);
        if (kind_ == Kind::fejer) {
            if (u > sigma_) return 0.0;
            return m == 1 ? -1 / sigma_ : 0.0;
        }
        if (u >= sigma_) return 0.0;
        // Cauchy integral on a circle inside the analyticity disc (poles at ±σ)
        double rho = 0.5 * (sigma_ - u);
        if (u < 1e-300) rho = 0.5 * sigma_;
        const int n = 64;
        cplx s = 0;
        for (int k = 0; k < n; ++k) {
            cplx e = std::polar(1.0, 2 * pi * k / n);
            cplx v = (u + rho * e) / sigma_;
            s += std::exp(1.0 - 1.0 / (1.0 - v * v)) / std::pow(e, m);
        }
        double f = 1;
        for (int k = 2; k <= m; ++k) f *= k;
        return (s / double(n)).real() * f / std::pow(rho, m);
    }

    /// ∫_a^b φ̂(u) du.
    double hat_integral(double a, double b) const {
        if (b < a) return -hat_integral(b, a);
        if (kind_ == Kind::fejer) {
            auto F = [&](double u) {  // antiderivative for u >= 0, constant beyond σ
                double v = std::min(std::abs(u), sigma_);
                double r = v - v * v / (2 * sigma_);
                return u < 0 ? -r : r;
            };
            return F(b) - F(a);
        }
        double lo = std::max(a, -sigma_), hi = std::min(b, sigma_);
        if (hi <= lo) return 0.0;
        return integrate([&](double u) { return hat(u); }, lo, hi, 1e-14).value;
    }

private:
    TestFunction(Kind k, double sigma) : kind_(k), sigma_(sigma) {
        if (!(sigma > 0 && sigma < 2)) throw domain_error("support radius must lie in (0, 2)");
        if (k == Kind::bump) build_bump_nodes();
    }

    void build_bump_nodes() {
        // composite Gauss-Legendre on [0, σ]; weights already multiplied by φ̂
        auto nodes = std::make_shared<std::vector<std::pair<double, double>>>();
        const auto& r = gauss_legendre(16);
        const int panels = 512;
        double h = sigma_ / panels;
        for (int p = 0; p < panels; ++p) {
            double a = p * h;
            for (std::size_t i = 0; i < r.x.size(); ++i) {
                double u = a + 0.5 * h * (1 + r.x[i]);
                nodes->push_back({u, 0.5 * h * r.w[i] * hat(u)});
            }
        }
        bump_nodes_ = nodes;
    }

    // φ(z) = 2 ∫_0^σ φ̂(u) cos(2πuz) du on the cached rule; resolves |σ Re z| up to about 1000
    cplx bump_phi(cplx z) const {
        CompensatedSum<cplx> s;
        for (const auto& [u, w] : *bump_nodes_) s += w * std::cos(2 * pi * u * z);
        return 2.0 * s.value();
    }

    Kind kind_;
    double sigma_;
    std::shared_ptr<const std::vector<std::pair<double, double>>> bump_nodes_;
};

// ---------------------------------------------------------------- weight functions

/// Even nonnegative weight w with the transforms used by the family averages.
struct WeightFunction {
    std::string name;
    std::function<double(double)> w;
    double x_max = 0;                    ///< w negligible (< 1e-40) beyond
    double w_hat0 = 0;                   ///< ŵ(0) = ∫_R w
    std::function<cplx(cplx)> mellin;    ///< closed-form Mw(s), may be empty

    double operator()(double x) const { return w(x); }

    /// Mw(s) = ∫_0^∞ w(t) t^{s-1} dt (closed form when available).
    cplx M(cplx s) const;
    /// Mw'(1)/Mw(1).
    double M_log_deriv_1() const;
    /// ∫_0^∞ w(x) log x dx by quadrature.
    double log_moment() const;
};

/// Numerical Mellin transform ∫_0^∞ f(t) t^{s-1} dt split at 1, with error estimate.
template <class F>
CQuadResult mellin_num(F&& f, cplx s, double tol = 1e-12) {
    // t = e^{-v} on (0, 1], t = e^{v} on [1, ∞)
    auto lo = [&](double v) -> cplx {
        double y = v > 700 ? 0.0 : f(std::exp(-v));
        return y == 0 ? cplx(0) : y * std::exp(-s * v);
    };
    auto hi = [&](double v) -> cplx {
        double y = v > 700 ? 0.0 : f(std::exp(v));
        return y == 0 ? cplx(0) : y * std::exp(s * v);
    };
    CQuadResult a = integrate_complex_to_inf(lo, 0.0, tol);
    CQuadResult b = integrate_complex_to_inf(hi, 0.0, tol);
    return {a.value + b.value, a.error + b.error, a.evals + b.evals};
}

inline cplx WeightFunction::M(cplx s) const {
    if (mellin) return mellin(s);
    return mellin_num([this](double t) { return w(t); }, s).value;
}

inline double WeightFunction::M_log_deriv_1() const {
    if (mellin) {
        double h = 1e-5;
        return ((mellin(1.0 + h) - mellin(1.0 - h)) / (2 * h)).real() / mellin(1.0).real();
    }
    return log_moment() / M(1.0).real();
}

inline double WeightFunction::log_moment() const {
    auto f = [this](double x) { return x > 0 ? w(x) * std::log(x) : 0.0; };
    return integrate(f, 0.0, 1.0, 1e-13).value + integrate(f, 1.0, x_max, 1e-13).value;
}

/// w(x) = exp(-πx²): ŵ(0) = 1, Mw(s) = Γ(s/2)/(2π^{s/2}).
inline WeightFunction make_gaussian_weight() {
    WeightFunction W;
    W.name = "gaussian";
    W.w = [](double x) { return std::exp(-pi * x * x); };
    W.x_max = 6;
    W.w_hat0 = 1;
    W.mellin = [](cplx s) { return std::exp(log_gamma(s / 2.0) - s / 2.0 * std::log(pi)) / 2.0; };
    return W;
}

inline WeightFunction parse_weight(const std::string& spec) {
    if (spec == "gaussian") return make_gaussian_weight();
    throw domain_error("unknown weight '" + spec + "'");
}

/// Mw'(1)/Mw(1) for the gaussian in closed form, (-γ - 2 log 2 - log π)/2.
inline double gaussian_M_log_deriv_1() { return (-euler_gamma - 2 * std::log(2.0) - std::log(pi)) / 2; }

// ---------------------------------------------------------------- radial transforms

/// 2π ∫_0^R f(r) J0(2π t r) r dr by composite Gauss-Legendre; panel count grows with t.
template <class F>
double radial_transform(F&& f, double t, double R, int base_panels = 24, int order = 20) {
    int panels = base_panels + int(std::ceil(2 * std::abs(t) * R));
    return 2 * pi * gl_composite([&](double r) { return f(r) * bessel_j0(2 * pi * t * r) * r; }, 0.0, R, panels, order);
}

/// w̃(t) = 2π ∫_0^∞ w(r²) J0(2πtr) r dr with a grid-refinement error estimate.
inline QuadResult w_tilde_quad(const WeightFunction& W, double t) {
    double R = std::sqrt(W.x_max);
    auto f = [&](double r) { return W.w(r * r); };
    double a = radial_transform(f, t, R, 24);
    double b = radial_transform(f, t, R, 48);
    return {b, std::abs(a - b), 0};
}

inline double w_tilde(const WeightFunction& W, double t) { return w_tilde_quad(W, std::abs(t)).value; }

struct TransformOptions {
    double t_max = 12;       ///< w̃ tabulated on [0, t_max]
    double t_step = 0.0025;
    double s_max = 12;       ///< g̃ tabulated on [0, s_max]
    double s_step = 0.0025;
    int g_panels = 120;      ///< panels of the ρ-rule for g̃
};

/// Tables of w̃, g(y) = w̃(√2 y) and g̃(s), with g₁(y) = g̃(√y).
class TransformTables {
public:
    explicit TransformTables(const WeightFunction& W, TransformOptions o = {}) : W_(W), opt_(o) {
        std::vector<double> ts, vs;
        int n = int(std::ceil(o.t_max / o.t_step));
        for (int k = 0; k <= n; ++k) {
            double t = k * o.t_step;
            ts.push_back(t);
            vs.push_back(qhecke::w_tilde(W, t));
        }
        wt_ = CubicTable(ts, vs);
        // g̃(s) = 2π ∫ g(ρ²) J0(2πsρ) ρ dρ on fixed nodes with exact g values
        double rho_max = std::sqrt(o.t_max / std::sqrt(2.0));
        const auto& r = gauss_legendre(20);
        double h = rho_max / o.g_panels;
        for (int p = 0; p < o.g_panels; ++p) {
            for (std::size_t i = 0; i < r.x.size(); ++i) {
                double rho = p * h + 0.5 * h * (1 + r.x[i]);
                double wgt = 0.5 * h * r.w[i];
                rho_nodes_.push_back(rho);
                rho_weights_.push_back(wgt * rho * qhecke::w_tilde(W, std::sqrt(2.0) * rho * rho));
            }
        }
        std::vector<double> ss, gs;
        int m = int(std::ceil(o.s_max / o.s_step));
        for (int k = 0; k <= m; ++k) {
            double s = k * o.s_step;
            ss.push_back(s);
            gs.push_back(g_tilde_direct(s));
        }
        gt_ = CubicTable(ss, gs);
    }

    const WeightFunction& weight() const { return W_; }
    const TransformOptions& options() const { return opt_; }

    /// w̃(t) from the table; 0 beyond t_max.
    double w_tilde(double t) const {
        t = std::abs(t);
        return t > wt_.hi() ? 0.0 : wt_(t);
    }
    /// g(y) = w̃(√2 y), y >= 0.
    double g(double y) const {
        if (y < 0) throw domain_error("g: argument must be nonnegative");
        return w_tilde(std::sqrt(2.0) * y);
    }
    /// g̃(s) for s >= 0 from the table; 0 beyond s_max.
    double g_tilde(double s) const {
        if (s < 0) throw domain_error("g_tilde: argument must be nonnegative");
        return s > gt_.hi() ? 0.0 : gt_(s);
    }
    /// g₁(y) = g̃(√y).
    double g1(double y) const {
        if (y < 0) throw domain_error("g1: argument must be nonnegative");
        return g_tilde(std::sqrt(y));
    }
    /// g̃(s) by quadrature on the fixed ρ-rule, bypassing the table.
    double g_tilde_direct(double s) const {
        CompensatedSum<double> acc;
        for (std::size_t i = 0; i < rho_nodes_.size(); ++i)
            acc += rho_weights_[i] * bessel_j0(2 * pi * s * rho_nodes_[i]);
        return 2 * pi * acc.value();
    }

    double g_max_arg() const { return wt_.hi() / std::sqrt(2.0); }
    double g1_max_arg() const { return gt_.hi() * gt_.hi(); }
    const CubicTable& w_tilde_table() const { return wt_; }
    const CubicTable& g_tilde_table() const { return gt_; }

    /// Shared tables per weight name (construction costs about a second).
    static std::shared_ptr<const TransformTables> shared(const WeightFunction& W) {
        static std::mutex mu;
        static std::map<std::string, std::shared_ptr<const TransformTables>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(W.name);
        if (it != cache.end()) return it->second;
        auto T = std::make_shared<const TransformTables>(W);
        cache.emplace(W.name, T);
        return T;
    }

private:
    WeightFunction W_;
    TransformOptions opt_;
    CubicTable wt_, gt_;
    std::vector<double> rho_nodes_, rho_weights_;
};

// ---------------------------------------------------------------- Mellin transforms of g, g₁

/// M g₁(s) = ∫_0^∞ g₁(t) t^{s-1} dt = 2 ∫_0^∞ g̃(u) u^{2s-1} du, Re s > 0.
inline cplx mellin_g1(const TransformTables& T, cplx s) {
    if (s.real() <= 0) throw domain_error("mellin_g1: needs Re(s) > 0");
    auto f = [&](double u) -> cplx { return u > 0 ? T.g_tilde(u) * std::exp((2.0 * s - 1.0) * std::log(u)) : 0.0; };
    double hi = T.g_tilde_table().hi();
    CompensatedSum<cplx> acc;
    int pieces = 48;
    for (int k = 0; k < pieces; ++k) acc += integrate_complex(f, hi * k / pieces, hi * (k + 1) / pieces, 1e-13).value;
    return 2.0 * acc.value();
}

/// M g(w) continued to Re w > -2: ∫_0^1 (g - g(0)) t^{w-1} + g(0)/w + ∫_1^∞ g t^{w-1}.
inline cplx mellin_g_reg(const TransformTables& T, cplx w) {
    if (w.real() <= -2) throw domain_error("mellin_g_reg: needs Re(w) > -2");
    if (w == cplx(0.0)) throw domain_error("mellin_g_reg: pole at 0");
    double g0 = T.g(0);
    auto lo = [&](double t) -> cplx { return t > 0 ? (T.g(t) - g0) * std::exp((w - 1.0) * std::log(t)) : 0.0; };
    auto hi = [&](double t) -> cplx { return T.g(t) * std::exp((w - 1.0) * std::log(t)); };
    CompensatedSum<cplx> acc;
    acc += integrate_complex(lo, 0.0, 1.0, 1e-13).value;
    acc += g0 / w;
    double top = T.g_max_arg();
    int pieces = 24;
    for (int k = 0; k < pieces; ++k)
        acc += integrate_complex(hi, 1 + (top - 1) * k / pieces, 1 + (top - 1) * (k + 1) / pieces, 1e-13).value;
    return acc.value();
}

/// r₂(n): number of k ∈ Z[i] with N(k) = n, for n = 0..nmax.
inline std::vector<int> lattice_counts(i64 nmax) {
    std::vector<int> r(std::size_t(nmax) + 1, 0);
    for (i64 a = 0; a * a <= nmax; ++a)
        for (i64 b = 0; a * a + b * b <= nmax; ++b) {
            int mult = (a == 0 ? 1 : 2) * (b == 0 ? 1 : 2);
            r[a * a + b * b] += mult;
        }
    return r;
}

struct MellinIdentity {
    cplx lhs{};       ///< ζ_K(z+1) M g₁(z+1), direct integral
    cplx rhs{};       ///< ζ_K(-z) M g(-z), regularized integral
    cplx lattice{};   ///< analytic continuation through lattice sums over [1, ∞)
    double residual = 0;  ///< max pairwise disagreement
};

/// Both sides of ζ_K(z+1) M g₁(z+1) = ζ_K(-z) M g(-z) and their lattice-sum form; -1 < Re z, z != 0.
inline MellinIdentity mellin_identity_check(const TransformTables& T, cplx z) {
    if (z == cplx(0.0) || z == cplx(-1.0)) throw domain_error("mellin_identity_check: z must avoid 0 and -1");
    if (z.real() <= -1 || z.real() > 1) throw domain_error("mellin_identity_check: needs -1 < Re(z) <= 1");
    MellinIdentity out;
    out.lhs = zeta_K(z + 1.0) * mellin_g1(T, z + 1.0);
    out.rhs = zeta_K(-z) * mellin_g_reg(T, -z);
    // (1/4)[g(0)/z - g̃(0)/(z+1) + ∫_1^∞ Σ_{k≠0} g₁(N(k)t) t^{z} dt + ∫_1^∞ Σ_{k≠0} g(N(k)t) t^{-z-1} dt]
    double g0 = T.g(0), gt0 = T.g_tilde(0);
    i64 nmax = i64(std::ceil(std::max(T.g_max_arg(), T.g1_max_arg())));
    auto r2 = lattice_counts(nmax);
    auto theta1 = [&](double t) {
        CompensatedSum<double> s;
        for (i64 n = 1; n <= nmax && n * t <= T.g1_max_arg(); ++n)
            if (r2[n]) s += r2[n] * T.g1(n * t);
        return s.value();
    };
    auto theta = [&](double t) {
        CompensatedSum<double> s;
        for (i64 n = 1; n <= nmax && n * t <= T.g_max_arg(); ++n)
            if (r2[n]) s += r2[n] * T.g(n * t);
        return s.value();
    };
    auto f1 = [&](double t) -> cplx { return theta1(t) * std::exp(z * std::log(t)); };
    auto f2 = [&](double t) -> cplx { return theta(t) * std::exp((-z - 1.0) * std::log(t)); };
    CompensatedSum<cplx> acc;
    acc += g0 / z - gt0 / (z + 1.0);
    double top1 = T.g1_max_arg(), top2 = T.g_max_arg();
    // the integrands have kinks where n t crosses a table end; split finely
    int pieces = 256;
    for (int k = 0; k < pieces; ++k) {
        acc += integrate_complex(f1, 1 + (top1 - 1) * k / pieces, 1 + (top1 - 1) * (k + 1) / pieces, 1e-12).value;
        acc += integrate_complex(f2, 1 + (top2 - 1) * k / pieces, 1 + (top2 - 1) * (k + 1) / pieces, 1e-12).value;
    }
    out.lattice = 0.25 * acc.value();
    out.residual = std::max({std::abs(out.lhs - out.rhs), std::abs(out.lhs - out.lattice), std::abs(out.rhs - out.lattice)});
    return out;
}

// ---------------------------------------------------------------- diagnostics

/// ∫φ² over R and ∫φ̂² over R, for the Parseval spot check.
inline std::pair<double, double> parseval_pair(const TestFunction& phi) {
    double s = phi.sigma();
    double hat2 = 2 * integrate([&](double u) { double h = phi.hat(u); return h * h; }, 0.0, s, 1e-14).value;
    // ∫_0^A φ² by pieces of length 1/σ (zeros of the Fejér kernel), tail by the x^{-4} envelope average
    double A = 400 / s, step = 1 / s;
    CompensatedSum<double> acc;
    auto f = [&](double x) { double p = phi.phi(x); return p * p; };
    for (double a = 0; a < A - 1e-12; a += step) acc += gl_integrate(f, a, a + step, 24);
    double tail = 0;
    if (phi.kind() == TestFunction::Kind::fejer) {
        // φ² ~ σ²/(πσx)^4 sin^4, mean of sin^4 is 3/8
        tail = s * s * (3.0 / 8) / std::pow(pi * s, 4) / (3 * A * A * A);
    }
    return {2 * (acc.value() + tail), hat2};
}

/// Fitted C in |f(t)| <= C t^{-3} over [t_lo, t_hi].
template <class F>
double decay_constant(F&& f, double t_lo, double t_hi, int samples = 400) {
    double C = 0;
    for (int k = 0; k <= samples; ++k) {
        double t = t_lo + (t_hi - t_lo) * k / samples;
        C = std::max(C, std::abs(f(t)) * t * t * t);
    }
    return C;
}

/// Writes a table as CSV rows "t,value".
inline void write_table_csv(const CubicTable& T, std::ostream& os) {
    os << "t,value\n";
    char buf[64];
    for (std::size_t k = 0; k < T.xs().size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.10g,%.15g\n", T.xs()[k], T.ys()[k]);
        os << buf;
    }
}

}  // namespace qhecke
