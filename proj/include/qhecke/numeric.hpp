#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qhecke {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;

/// Neumaier compensated accumulator.
template <class T = double>
class CompensatedSum {
public:
    void add(T x) {
        T t = sum_ + x;
        if constexpr (std::is_same_v<T, cplx>) {
            comp_ += cplx(part(sum_.real(), x.real(), t.real()),
                          part(sum_.imag(), x.imag(), t.imag()));
        } else {
            comp_ += part(sum_, x, t);
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(T x) { add(x); return *this; }
    T value() const { return sum_ + comp_; }

private:
    static double part(double s, double x, double t) {
        return std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    }
    T sum_{};
    T comp_{};
};

struct QuadResult {
    double value = 0;
    double error = 0;
    std::size_t evals = 0;
};

struct CQuadResult {
    cplx value{};
    double error = 0;
    std::size_t evals = 0;
};

namespace detail {

struct GLRule {
    std::vector<double> x, w;
};

inline GLRule make_gl(int n) {
    GLRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1, p2 = 0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * pp * pp);
    }
    return r;
}

}  // namespace detail

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
inline const detail::GLRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, detail::GLRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::make_gl(n)).first;
    return it->second;
}

/// Fixed-order Gauss-Legendre on [a, b]; works for real or complex integrands.
template <class F>
auto gl_integrate(F&& f, double a, double b, int n) {
    const auto& r = gauss_legendre(n);
    double h = 0.5 * (b - a), m = 0.5 * (a + b);
    using R = decltype(f(a));
    R s{};
    for (int i = 0; i < n; ++i) s += r.w[i] * f(m + h * r.x[i]);
    return s * h;
}

/// Composite Gauss-Legendre over `panels` equal panels.
template <class F>
auto gl_composite(F&& f, double a, double b, int panels, int n) {
    using R = decltype(f(a));
    R s{};
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) s += gl_integrate(f, a + p * h, a + (p + 1) * h, n);
    return s;
}

namespace detail {

inline constexpr std::array<double, 8> gk_xk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F, class R>
void gk15(F& f, double a, double b, R& val, double& err) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    R fc = f(c);
    R kron = fc * gk_wk[7];
    R gauss = fc * gk_wg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * gk_xk[j];
        R f1 = f(c - dx), f2 = f(c + dx);
        kron += gk_wk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += gk_wg[j / 2] * (f1 + f2);
    }
    val = kron * h;
    err = std::abs((kron - gauss) * h);
}

template <class R>
struct GKSegment {
    double a, b;
    R val;
    double err;
    bool operator<(const GKSegment& o) const { return err < o.err; }
};

/// Globally adaptive Gauss-Kronrod: bisect the segment with the largest error until the total
/// error is below tol or the segment budget is spent.
template <class F, class R>
void gk_global(F& f, double a, double b, double tol, std::size_t max_segments, R& value, double& error,
               std::size_t& evals) {
    std::vector<GKSegment<R>> heap;
    GKSegment<R> s{a, b, R{}, 0};
    gk15(f, a, b, s.val, s.err);
    evals = 15;
    heap.push_back(s);
    double total = s.err;
    while (total > tol && heap.size() < max_segments) {
        std::pop_heap(heap.begin(), heap.end());
        GKSegment<R> w = heap.back();
        heap.pop_back();
        double m = 0.5 * (w.a + w.b);
        if (m <= w.a || m >= w.b) {  // interval exhausted in floating point
            heap.push_back(w);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        GKSegment<R> l{w.a, m, R{}, 0}, r{m, w.b, R{}, 0};
        gk15(f, l.a, l.b, l.val, l.err);
        gk15(f, r.a, r.b, r.val, r.err);
        evals += 30;
        total += l.err + r.err - w.err;
        heap.push_back(l);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(r);
        std::push_heap(heap.begin(), heap.end());
    }
    // re-sum to avoid drift in the running totals
    std::sort(heap.begin(), heap.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    value = R{};
    error = 0;
    for (const auto& g : heap) {
        value += g.val;
        error += g.err;
    }
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) on a finite interval with a budget of max_segments subintervals.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol = 1e-12, std::size_t max_segments = 2000) {
    QuadResult out;
    detail::gk_global(f, a, b, tol, max_segments, out.value, out.error, out.evals);
    return out;
}

template <class F>
CQuadResult integrate_complex(F&& f, double a, double b, double tol = 1e-12, std::size_t max_segments = 2000) {
    CQuadResult out;
    detail::gk_global(f, a, b, tol, max_segments, out.value, out.error, out.evals);
    return out;
}

/// Integral over [a, inf) by the substitution t = a + u/(1-u).
template <class F>
QuadResult integrate_to_inf(F&& f, double a, double tol = 1e-12) {
    auto g = [&](double u) {
        if (u >= 1) return 0.0;
        double d = 1 - u;
        return f(a + u / d) / (d * d);
    };
    return integrate(g, 0.0, 1.0, tol);
}

template <class F>
CQuadResult integrate_complex_to_inf(F&& f, double a, double tol = 1e-12) {
    auto g = [&](double u) -> cplx {
        if (u >= 1) return 0.0;
        double d = 1 - u;
        return f(a + u / d) / (d * d);
    };
    return integrate_complex(g, 0.0, 1.0, tol);
}

/// Cubic Lagrange interpolation on a sorted, possibly nonuniform grid.
class CubicTable {
public:
    CubicTable() = default;
    CubicTable(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        if (x_.size() != y_.size() || x_.size() < 4) throw std::invalid_argument("CubicTable: need >= 4 nodes");
    }
    double operator()(double t) const {
        if (t < x_.front() || t > x_.back()) throw std::out_of_range("CubicTable: argument outside table");
        std::size_t k = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin();
        std::size_t i0 = k < 2 ? 0 : k - 2;
        i0 = std::min(i0, x_.size() - 4);
        double s = 0;
        for (std::size_t i = i0; i < i0 + 4; ++i) {
            double li = 1;
            for (std::size_t j = i0; j < i0 + 4; ++j)
                if (j != i) li *= (t - x_[j]) / (x_[i] - x_[j]);
            s += li * y_[i];
        }
        return s;
    }
    double lo() const { return x_.front(); }
    double hi() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_;
};

/// 4-point Lagrange interpolation on a uniform grid lo + k h; constant-time lookup.
class UniformCubicTable {
public:
    UniformCubicTable() = default;
    UniformCubicTable(double lo, double h, std::vector<double> y) : lo_(lo), h_(h), y_(std::move(y)) {
        if (y_.size() < 4 || !(h > 0)) throw std::invalid_argument("UniformCubicTable: need >= 4 nodes and h > 0");
    }
    double operator()(double t) const {
        double u = (t - lo_) / h_;
        if (u < 0 || u > double(y_.size() - 1)) throw std::out_of_range("UniformCubicTable: argument outside table");
        std::size_t k = std::size_t(u);
        std::size_t i0 = k < 1 ? 0 : k - 1;
        i0 = std::min(i0, y_.size() - 4);
        double x = u - double(i0);  // nodes at 0, 1, 2, 3
        double a = x * (x - 1) * (x - 2), b = (x - 1) * (x - 2) * (x - 3);
        return -b / 6 * y_[i0] + x * (x - 2) * (x - 3) / 2 * y_[i0 + 1] - x * (x - 1) * (x - 3) / 2 * y_[i0 + 2] +
               a / 6 * y_[i0 + 3];
    }
    double lo() const { return lo_; }
    double hi() const { return lo_ + h_ * double(y_.size() - 1); }

private:
    double lo_ = 0, h_ = 1;
    std::vector<double> y_;
};

/// Exponential integral E1(z), Re z > 0 or z off the negative real axis.
inline cplx expint_e1(cplx z) {
    if (std::abs(z) < 1.0) {
        cplx term = 1, s = 0;
        for (int k = 1; k < 60; ++k) {
            term *= -z / double(k);
            s += term / double(k);
            if (std::abs(term) < 1e-18) break;
        }
        return -euler_gamma - std::log(z) - s;
    }
    // modified Lentz on the continued fraction e^{-z} / (z + 1/(1 + 1/(z + 2/(1 + ...))))
    const double tiny = 1e-300;
    cplx b = z + 1.0, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -double(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        cplx del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-z);
}

}  // namespace qhecke
