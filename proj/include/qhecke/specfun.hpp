#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <memory>

#include "numeric.hpp"
#include "sieve.hpp"
#include "zint.hpp"

namespace qhecke {

/// Value together with its derivative in s.
struct ValueDeriv {
    cplx value{};
    cplx deriv{};
};

namespace detail {

// B_{2j} / (2j)! for j = 1..12.
inline constexpr std::array<double, 12> bernoulli_over_factorial = {
    1.0 / 6 / 2,
    -1.0 / 30 / 24,
    1.0 / 42 / 720,
    -1.0 / 30 / 40320,
    5.0 / 66 / 3628800,
    -691.0 / 2730 / 479001600,
    7.0 / 6 / 87178291200.0,
    -3617.0 / 510 / 20922789888000.0,
    43867.0 / 798 / 6402373705728000.0,
    -174611.0 / 330 / 2432902008176640000.0,
    854513.0 / 138 / 1124000727777607680000.0,
    -236364091.0 / 2730 / 620448401733239439360000.0,
};

/// x^w for real x > 0; exact real pow on the real axis.
inline cplx rpow(double x, cplx w, double lx) {
    if (w.imag() == 0) return std::pow(x, w.real());
    return std::exp(w * lx);
}

inline int em_shift_for(cplx s, int shift) { return shift + int(std::ceil(std::abs(s.imag()))); }

/// Euler-Maclaurin Hurwitz sum without the x^{1-s}/(s-1) pole term, x = N + a.
inline ValueDeriv hurwitz_regular(cplx s, double a, int N, int order) {
    CompensatedSum<cplx> v, d;
    for (int k = 0; k < N; ++k) {
        double lk = std::log(k + a);
        cplx t = rpow(k + a, -s, lk);
        v += t;
        d += -lk * t;
    }
    double x = N + a, lx = std::log(x);
    cplx xs = rpow(x, -s, lx);
    v += 0.5 * xs;
    d += -0.5 * lx * xs;
    // rising factorial (s)_{2j-1} and its derivative
    cplx P = s, dP = 1.0;
    double xp = 1.0 / x;  // x^{1-2j}
    for (int j = 1; j <= order; ++j) {
        double b = bernoulli_over_factorial[j - 1];
        cplx base = xs * xp;
        v += b * P * base;
        d += b * (dP - lx * P) * base;
        double m1 = 2.0 * j - 1, m2 = 2.0 * j;
        dP = dP * (s + m1) + P;
        P = P * (s + m1);
        dP = dP * (s + m2) + P;
        P = P * (s + m2);
        xp /= x * x;
    }
    return {v.value(), d.value()};
}

/// x^{1-s}/(s-1) and its s-derivative.
inline ValueDeriv pole_term(cplx s, double x) {
    double lx = std::log(x);
    cplx p = rpow(x, 1.0 - s, lx);
    cplx v = p / (s - 1.0);
    return {v, -lx * v - v / (s - 1.0)};
}

/// (x^{1-s} - y^{1-s})/(s-1) and its s-derivative, regular at s = 1.
inline ValueDeriv pole_diff(cplx s, double x, double y) {
    cplx z = 1.0 - s;
    double lx = std::log(x), ly = std::log(y);
    if (std::abs(z) > 0.1) {
        cplx px = rpow(x, z, lx), py = rpow(y, z, ly);
        cplx f = -(px - py) / z;
        cplx df_dz = -(lx * px - ly * py) / z + (px - py) / (z * z);
        return {f, -df_dz};
    }
    // series in z: -(x^z - y^z)/z = -sum_{n>=1} z^{n-1} (lx^n - ly^n)/n!
    cplx f = 0, df = 0, zp = 1;
    double px = 1, py = 1, fact = 1;
    for (int n = 1; n < 60; ++n) {
        px *= lx;
        py *= ly;
        fact *= n;
        double c = (px - py) / fact;
        f -= zp * c;
        if (n >= 2) df -= double(n - 1) * (zp / z) * c;
        zp *= z;
        if (std::abs(zp) * std::abs(px) / fact < 1e-20) break;
    }
    if (std::abs(z) == 0) df = -(lx * lx - ly * ly) / 2.0;
    return {f, -df};
}

}  // namespace detail

/// Options for the Euler-Maclaurin evaluators.
struct EMOptions {
    int order = 12;
    int shift = 20;
};

/// Hurwitz zeta ζ(s, a) and its s-derivative.
inline ValueDeriv hurwitz_zeta_d(cplx s, double a, EMOptions o = {}) {
    if (s == cplx(1.0)) throw domain_error("hurwitz_zeta: pole at s = 1");
    if (a <= 0) throw domain_error("hurwitz_zeta: a must be positive");
    int N = detail::em_shift_for(s, o.shift);
    auto r = detail::hurwitz_regular(s, a, N, o.order);
    auto p = detail::pole_term(s, N + a);
    return {r.value + p.value, r.deriv + p.deriv};
}

inline cplx hurwitz_zeta(cplx s, double a, EMOptions o = {}) { return hurwitz_zeta_d(s, a, o).value; }

inline ValueDeriv riemann_zeta_d(cplx s, EMOptions o = {}) { return hurwitz_zeta_d(s, 1.0, o); }
inline cplx riemann_zeta(cplx s, EMOptions o = {}) { return riemann_zeta_d(s, o).value; }

/// L(s, χ₋₄) = 4^{-s}(ζ(s,1/4) - ζ(s,3/4)) and its derivative; entire.
inline ValueDeriv dirichlet_L4_d(cplx s, EMOptions o = {}) {
    int N = detail::em_shift_for(s, o.shift);
    auto a = detail::hurwitz_regular(s, 0.25, N, o.order);
    auto b = detail::hurwitz_regular(s, 0.75, N, o.order);
    auto p = detail::pole_diff(s, N + 0.25, N + 0.75);
    cplx h = a.value - b.value + p.value;
    cplx dh = a.deriv - b.deriv + p.deriv;
    double l4 = std::log(4.0);
    cplx f = std::exp(-s * l4);
    return {f * h, f * (dh - l4 * h)};
}

inline cplx dirichlet_L4(cplx s, EMOptions o = {}) { return dirichlet_L4_d(s, o).value; }

inline constexpr double zeta_K_min_re = -1.0;

/// ζ_K(s) = ζ(s)L(s,χ₋₄) and its derivative for Re s >= -1, s != 1.
inline ValueDeriv zeta_K_d(cplx s, EMOptions o = {}) {
    if (s == cplx(1.0)) throw domain_error("zeta_K: pole at s = 1");
    if (s.real() < zeta_K_min_re) throw domain_error("zeta_K: Re(s) below implemented strip");
    auto z = riemann_zeta_d(s, o);
    auto l = dirichlet_L4_d(s, o);
    return {z.value * l.value, z.deriv * l.value + z.value * l.deriv};
}

inline cplx zeta_K(cplx s, EMOptions o = {}) { return zeta_K_d(s, o).value; }

inline constexpr double default_guard = 1e-4;

/// ζ'_K/ζ_K(s) = ζ'/ζ + L'/L.
inline cplx zeta_K_log_deriv(cplx s, double guard = default_guard, EMOptions o = {}) {
    if (std::abs(s - 1.0) < guard) throw domain_error("zeta_K_log_deriv: too close to the pole at s = 1");
    if (s.real() < zeta_K_min_re) throw domain_error("zeta_K_log_deriv: Re(s) below implemented strip");
    auto z = riemann_zeta_d(s, o);
    auto l = dirichlet_L4_d(s, o);
    if (std::abs(z.value) < 1e-12 || std::abs(l.value) < 1e-12)
        throw domain_error("zeta_K_log_deriv: too close to a zero");
    return z.deriv / z.value + l.deriv / l.value;
}

// ---------------------------------------------------------------- Γ and ψ

namespace detail {

inline bool at_gamma_pole(cplx z) {
    return z.imag() == 0 && z.real() <= 0 && z.real() == std::floor(z.real());
}

}  // namespace detail

/// Digamma ψ(z) by recurrence, reflection and the asymptotic series.
inline cplx digamma(cplx z) {
    if (detail::at_gamma_pole(z)) throw domain_error("digamma: pole");
    if (z.real() < 0.5) return digamma(1.0 - z) - pi / std::tan(pi * z);
    cplx acc = 0;
    while (std::abs(z) < 12) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    cplx iz2 = 1.0 / (z * z), p = iz2;
    cplx s = std::log(z) - 0.5 / z;
    for (int j = 1; j <= 10; ++j) {
        double b2j = detail::bernoulli_over_factorial[j - 1];
        // B_{2j}/(2j) = b2j * (2j-1)!
        double f = 1;
        for (int k = 2; k < 2 * j; ++k) f *= k;
        s -= b2j * f * p;
        p *= iz2;
    }
    return acc + s;
}

inline double digamma(double x) { return digamma(cplx(x)).real(); }

/// log Γ(z) (a branch of it) by Stirling's series after upward recurrence; reflection for Re z < 1/2.
inline cplx log_gamma(cplx z) {
    if (detail::at_gamma_pole(z)) throw domain_error("log_gamma: pole");
    if (z.real() < 0.5) return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
    cplx acc = 0;
    while (std::abs(z) < 12) {
        acc -= std::log(z);
        z += 1.0;
    }
    cplx s = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2 * pi);
    cplx iz = 1.0 / z, iz2 = iz * iz, p = iz;
    for (int j = 1; j <= 10; ++j) {
        double b2j = detail::bernoulli_over_factorial[j - 1];
        // B_{2j}/(2j(2j-1)) = b2j * (2j-2)!
        double f = 1;
        for (int k = 2; k <= 2 * j - 2; ++k) f *= k;
        s += b2j * f * p;
        p *= iz2;
    }
    return acc + s;
}

/// X_c(s) = Γ(1-s)/Γ(s) · (π²/(32 N(c)))^{s-1/2}.
inline cplx X_c(cplx s, double norm_c) {
    if (norm_c <= 0) throw domain_error("X_c: norm must be positive");
    if (detail::at_gamma_pole(s) || detail::at_gamma_pole(1.0 - s)) throw domain_error("X_c: Γ pole");
    return std::exp(log_gamma(1.0 - s) - log_gamma(s) + (s - 0.5) * std::log(pi * pi / (32 * norm_c)));
}

/// X_c'/X_c(s) = -ψ(1-s) - ψ(s) + log(π²/(32 N(c))).
inline cplx X_c_log_deriv(cplx s, double norm_c) {
    return -digamma(1.0 - s) - digamma(s) + std::log(pi * pi / (32 * norm_c));
}

// ---------------------------------------------------------------- γ_K

/// Cohen-Villegas-Zagier acceleration of sum_{k>=0} (-1)^k a(k).
template <class F>
double cvz_alternating(F&& a, int n) {
    double d = std::pow(3 + std::sqrt(8.0), n);
    d = 0.5 * (d + 1 / d);
    double b = -1, c = -d, s = 0;
    for (int k = 0; k < n; ++k) {
        c = b - c;
        s += c * a(k);
        b = (double(k) + n) * (double(k) - n) * b / ((k + 0.5) * (k + 1.0));
    }
    return s / d;
}

/// L'(1, χ₋₄) = -sum_{k>=0} (-1)^k log(2k+1)/(2k+1), by CVZ acceleration.
inline double L4_prime_at_1(int terms = 40) {
    return -cvz_alternating([](int k) { return std::log(2.0 * k + 1) / (2.0 * k + 1); }, terms);
}

/// γ_K = γ π/4 + L'(1, χ₋₄), the constant term of ζ_K at s = 1.
inline double gamma_K(int terms = 40) { return euler_gamma * pi / 4 + L4_prime_at_1(terms); }

// ---------------------------------------------------------------- Euler products

namespace detail {

/// log(1 + q) accurate for small complex q.
inline cplx log1p_c(cplx q) {
    double re = 0.5 * std::log1p(2 * q.real() + std::norm(q));
    double im = std::atan2(q.imag(), 1 + q.real());
    return {re, im};
}

}  // namespace detail

struct EulerProductResult {
    cplx value{};
    cplx tail{};     ///< logarithmic tail added for primes beyond the cutoff
    double error = 0;  ///< estimate of the remaining truncation error
};

/// A_α(r, r) evaluated three ways.
struct AAlphaResult {
    cplx value{};               ///< termwise derivative of the Euler product
    cplx finite_difference{};   ///< central difference of A_euler in α
    cplx prime_sum{};           ///< -ζ'_K/ζ_K(1+2r) - Σ N log N / ((N+1)(N^{1+2r}-1))
    double tolerance = 0;       ///< allowed disagreement between the three
};

struct ZetaKOptions {
    double tolerance = 1e-10;
    i64 euler_cutoff = 1'000'000;
    double guard = default_guard;
    EMOptions em{};
};

/// Cached analytic constants and Euler-product evaluators for K = Q(i). Immutable after construction.
class ZetaKContext {
public:
    explicit ZetaKContext(ZetaKOptions o = {})
        : opt_(o), primes_(std::make_shared<PrimeTable>(o.euler_cutoff)) {
        gamma = euler_gamma;
        gammaK = gamma_K();
        auto z2 = zeta_K_d(2.0, opt_.em);
        zetaK2 = z2.value.real();
        zetaK_logderiv_2 = (z2.deriv / z2.value).real();
        auto z0 = zeta_K_d(0.0, opt_.em);
        zetaK0 = z0.value.real();
        zetaK0_prime = z0.deriv.real();
        residue = dirichlet_L4(1.0, opt_.em).real();
        log_B_ = std::log(double(o.euler_cutoff));
    }

    const ZetaKOptions& options() const { return opt_; }
    const PrimeTable& primes() const { return *primes_; }

    cplx zeta_K(cplx s) const { return qhecke::zeta_K(s, opt_.em); }
    cplx zeta_K_log_deriv(cplx s) const { return qhecke::zeta_K_log_deriv(s, opt_.guard, opt_.em); }

    /// A(α, β): 2-factor prefactor times the product over primary primes of norm <= cutoff, plus a log tail.
    EulerProductResult A_euler(cplx alpha, cplx beta) const {
        check_domain(alpha, beta);
        CompensatedSum<cplx> logs;
        cplx e1 = -1.0 - alpha - beta, e2 = -1.0 - 2.0 * alpha, e3 = beta - alpha;
        for (const auto& P : primes_->primes()) {
            double N = double(P.norm), lN = std::log(N);
            cplx x = std::exp(e1 * lN);
            cplx delta = (x - std::exp(e2 * lN)) / (N + 1);
            logs += detail::log1p_c(delta / (1.0 - x));
        }
        cplx tail = expint_e1((1.0 + alpha + beta) * log_B_) - expint_e1((1.0 + 2.0 * alpha) * log_B_);
        cplx t1 = std::exp((1.0 + alpha + beta) * std::log(2.0));
        cplx pref = (t1 - std::exp(e3 * std::log(2.0))) / (t1 - 1.0);
        EulerProductResult r;
        r.tail = tail;
        r.value = pref * std::exp(logs.value() + tail);
        r.error = std::abs(r.value) * std::abs(tail);
        return r;
    }

    /// Closed form 3(2-4^r)/(4-4^r) · ζ_K(2)/ζ_K(2-2r) for A(-r, r).
    cplx A_closed(cplx r) const {
        cplx f = std::exp(r * std::log(4.0));
        return 3.0 * (2.0 - f) / (4.0 - f) * zetaK2 / zeta_K(2.0 - 2.0 * r);
    }

    /// A_α(r, r) as a termwise derivative of the product: ln2/(2^{1+2r}-1) + Σ log N/((N+1)(N^{1+2r}-1)).
    cplx A_alpha(cplx r) const {
        check_domain(r, r);
        CompensatedSum<cplx> s;
        cplx e = 1.0 + 2.0 * r;
        for (const auto& P : primes_->primes()) {
            double N = double(P.norm), lN = std::log(N);
            s += lN / ((N + 1) * (std::exp(e * lN) - 1.0));
        }
        // Σ_{N > B} log N / N^{2+2r} over prime ideals ≈ B^{-1-2r}/(1+2r)
        cplx tail = std::exp(-e * log_B_) / e;
        return std::log(2.0) / (std::exp(e * std::log(2.0)) - 1.0) + s.value() + tail;
    }

    /// -Σ N log N/((N+1)(N^{1+2r}-1)) over primary primes, with the tail B^{-2r}/(2r); Re r > 0.
    cplx prime_sum_identity(cplx r) const {
        if (r.real() <= 0) throw domain_error("prime_sum_identity: needs Re(r) > 0");
        CompensatedSum<cplx> s;
        cplx e = 1.0 + 2.0 * r;
        for (const auto& P : primes_->primes()) {
            double N = double(P.norm), lN = std::log(N);
            s += N * lN / ((N + 1) * (std::exp(e * lN) - 1.0));
        }
        cplx tail = std::exp(-2.0 * r * log_B_) / (2.0 * r);
        return -(s.value() + tail);
    }

    /// A_α(r, r) with both cross-checks; throws when they disagree beyond ten times the tolerance.
    AAlphaResult A_alpha_diag(cplx r) const {
        AAlphaResult out;
        out.value = A_alpha(r);
        const double h = 1e-4;
        check_domain(r - h, r);
        out.finite_difference = (A_euler(r + h, r).value - A_euler(r - h, r).value) / (2 * h);
        double B = double(opt_.euler_cutoff);
        // prime-ideal counting fluctuation beyond the cutoff
        out.tolerance = opt_.tolerance + std::pow(B, -0.5 - 2 * r.real()) * log_B_;
        if (r.real() > 0) {
            out.prime_sum = prime_sum_identity(r) - zeta_K_log_deriv(1.0 + 2.0 * r);
            if (std::abs(out.prime_sum - out.value) > 10 * out.tolerance)
                throw domain_error("A_alpha_diag: prime-sum identity disagrees with the Euler product");
        } else {
            out.prime_sum = cplx(std::nan(""), std::nan(""));
        }
        if (std::abs(out.finite_difference - out.value) > 10 * (out.tolerance + 1e-7))
            throw domain_error("A_alpha_diag: finite difference disagrees with the termwise derivative");
        return out;
    }

    double gamma = 0;
    double gammaK = 0;
    double zetaK2 = 0;
    double zetaK_logderiv_2 = 0;
    double zetaK0 = 0;
    double zetaK0_prime = 0;
    double residue = 0;

private:
    void check_domain(cplx a, cplx b) const {
        double lo = -0.25 + opt_.guard;
        if (a.real() <= lo || b.real() <= lo) throw domain_error("A_euler: Re(α), Re(β) must exceed -1/4 + guard");
    }

    ZetaKOptions opt_;
    std::shared_ptr<const PrimeTable> primes_;
    double log_B_ = 0;
};

}  // namespace qhecke
