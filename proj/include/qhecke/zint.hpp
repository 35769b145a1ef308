#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "numeric.hpp"

namespace qhecke {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

/// Norms above this are rejected instead of wrapping.
inline constexpr i64 norm_cap = i64(1) << 62;

class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exact Gaussian integer re + im*i.
struct GInt {
    i64 re = 0, im = 0;

    constexpr GInt() = default;
    constexpr GInt(i64 r, i64 i = 0) : re(r), im(i) {}

    i64 norm() const {
        i128 n = i128(re) * re + i128(im) * im;
        if (n > norm_cap) throw domain_error("GInt: norm exceeds cap");
        return i64(n);
    }
    constexpr GInt conj() const { return {re, -im}; }
    constexpr bool is_zero() const { return re == 0 && im == 0; }
    bool is_unit() const { return norm() == 1; }
    bool is_odd() const { return (norm() & 1) == 1; }

    friend constexpr bool operator==(const GInt&, const GInt&) = default;
    friend constexpr GInt operator-(const GInt& a) { return {-a.re, -a.im}; }
    friend constexpr GInt operator+(const GInt& a, const GInt& b) { return {a.re + b.re, a.im + b.im}; }
    friend constexpr GInt operator-(const GInt& a, const GInt& b) { return {a.re - b.re, a.im - b.im}; }
    friend GInt operator*(const GInt& a, const GInt& b) {
        i128 r = i128(a.re) * b.re - i128(a.im) * b.im;
        i128 i = i128(a.re) * b.im + i128(a.im) * b.re;
        if (r > norm_cap || -r > norm_cap || i > norm_cap || -i > norm_cap)
            throw domain_error("GInt: product overflow");
        return {i64(r), i64(i)};
    }
    /// Canonical order: norm, then re, then im.
    friend bool operator<(const GInt& a, const GInt& b) {
        return std::make_tuple(a.norm(), a.re, a.im) < std::make_tuple(b.norm(), b.re, b.im);
    }
    friend std::ostream& operator<<(std::ostream& os, const GInt& z) {
        return os << z.re << (z.im < 0 ? "-" : "+") << (z.im < 0 ? -z.im : z.im) << "i";
    }
    cplx to_complex() const { return {double(re), double(im)}; }
};

inline i64 norm(const GInt& z) { return z.norm(); }

inline constexpr GInt unit_of(int k) {
    constexpr GInt u[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return u[k & 3];
}

/// Index k with unit_of(k) == u, or -1.
inline int unit_index(const GInt& u) {
    for (int k = 0; k < 4; ++k)
        if (unit_of(k) == u) return k;
    return -1;
}

namespace detail {

inline i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline i64 mod_i64(i128 a, i64 m) {
    i128 r = a % m;
    return i64(r < 0 ? r + m : r);
}

}  // namespace detail

/// True iff b divides a in Z[i].
inline bool divides(const GInt& b, const GInt& a) {
    if (b.is_zero()) return a.is_zero();
    i128 n = b.norm();
    i128 x = i128(a.re) * b.re + i128(a.im) * b.im;
    i128 y = i128(a.im) * b.re - i128(a.re) * b.im;
    return x % n == 0 && y % n == 0;
}

/// Exact quotient a / b; b must divide a.
inline GInt exact_div(const GInt& a, const GInt& b) {
    i128 n = b.norm();
    i128 x = i128(a.re) * b.re + i128(a.im) * b.im;
    i128 y = i128(a.im) * b.re - i128(a.re) * b.im;
    if (x % n != 0 || y % n != 0) throw domain_error("exact_div: not divisible");
    return {i64(x / n), i64(y / n)};
}

/// Remainder of a modulo b using nearest-integer quotient; N(rem) <= N(b)/2.
inline GInt gmod(const GInt& a, const GInt& b) {
    i128 n = b.norm();
    i128 x = i128(a.re) * b.re + i128(a.im) * b.im;
    i128 y = i128(a.im) * b.re - i128(a.re) * b.im;
    i128 qx = detail::floor_div(2 * x + n, 2 * n);
    i128 qy = detail::floor_div(2 * y + n, 2 * n);
    i128 rr = i128(a.re) - (qx * b.re - qy * b.im);
    i128 ri = i128(a.im) - (qx * b.im + qy * b.re);
    return {i64(rr), i64(ri)};
}

inline GInt mulmod(const GInt& a, const GInt& b, const GInt& m) {
    i128 r = i128(a.re) * b.re - i128(a.im) * b.im;
    i128 i = i128(a.re) * b.im + i128(a.im) * b.re;
    // operands are reduced, so r and i stay well inside i128 and fit after reduction
    i128 n = m.norm();
    i128 x = r * m.re + i * m.im;
    i128 y = i * m.re - r * m.im;
    i128 qx = detail::floor_div(2 * x + n, 2 * n);
    i128 qy = detail::floor_div(2 * y + n, 2 * n);
    return {i64(r - (qx * m.re - qy * m.im)), i64(i - (qx * m.im + qy * m.re))};
}

inline GInt powmod(GInt a, u64 e, const GInt& m) {
    GInt r = gmod(GInt{1}, m);
    a = gmod(a, m);
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

/// Fast congruence test for z ≡ 1 mod (1+i)^3.
inline bool is_primary(const GInt& z) {
    return (z.re & 1) == 1 && (z.im & 1) == 0 && (((z.re + z.im) % 4) + 4) % 4 == 1;
}

/// Direct reduction oracle: (z - 1) divisible by (1+i)^3 = -2+2i.
inline bool is_primary_by_division(const GInt& z) { return divides(GInt{-2, 2}, z - GInt{1}); }

/// z = unit * primary; returns {unit, primary}.
inline std::pair<GInt, GInt> primary_associate(const GInt& z) {
    if (z.is_zero() || !z.is_odd()) throw domain_error("primary_associate: argument must be odd and nonzero");
    for (int k = 0; k < 4; ++k) {
        GInt u = unit_of(k);
        GInt p = z * u.conj();  // u^{-1} = conj(u)
        if (is_primary(p)) return {u, p};
    }
    throw std::logic_error("primary_associate: no primary associate");
}

// ---------------------------------------------------------------- rational helpers

inline u64 mulmod_u64(u64 a, u64 b, u64 m) { return u64((unsigned __int128)a * b % m); }

inline u64 powmod_u64(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

/// Jacobi symbol (a/n) for odd n > 0.
inline int jacobi(i64 a_in, i64 n_in) {
    if (n_in <= 0 || (n_in & 1) == 0) throw domain_error("jacobi: modulus must be odd and positive");
    u64 n = u64(n_in);
    u64 a = u64(detail::mod_i64(a_in, n_in));
    int t = 1;
    while (a != 0) {
        int z = __builtin_ctzll(a);
        a >>= z;
        if ((z & 1) && ((n & 7) == 3 || (n & 7) == 5)) t = -t;
        if ((a & 3) == 3 && (n & 3) == 3) t = -t;
        std::swap(a, n);
        a %= n;
    }
    return n == 1 ? t : 0;
}

inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { comp = false; break; }
        }
        if (comp) return false;
    }
    return true;
}

/// Trial-division factorization of n >= 1 into (prime, exponent) pairs.
inline std::vector<std::pair<i64, int>> factor_rational(i64 n) {
    std::vector<std::pair<i64, int>> out;
    if (n < 1) throw domain_error("factor_rational: n must be positive");
    for (i64 p : {2, 3}) {
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        if (e) out.push_back({p, e});
    }
    for (i64 p = 5; p * p <= n; p += 6) {
        for (i64 q : {p, p + 2}) {
            int e = 0;
            while (n % q == 0) { n /= q; ++e; }
            if (e) out.push_back({q, e});
        }
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

/// Square root of -1 modulo a prime p ≡ 1 mod 4.
inline u64 sqrt_minus_one(u64 p) {
    for (u64 n = 2; n < p; ++n) {
        if (powmod_u64(n, (p - 1) / 2, p) == p - 1) return powmod_u64(n, (p - 1) / 4, p);
    }
    throw domain_error("sqrt_minus_one: no non-residue");
}

/// Cornacchia: p = a^2 + b^2 for a prime p ≡ 1 mod 4.
inline GInt two_squares(i64 p) {
    u64 r = sqrt_minus_one(u64(p));
    if (2 * r > u64(p)) r = u64(p) - r;
    u64 a = u64(p), b = r;
    while (b * b > u64(p)) {
        u64 t = a % b;
        a = b;
        b = t;
    }
    i64 x = i64(b);
    i64 y2 = p - x * x;
    i64 y = i64(std::llround(std::sqrt(double(y2))));
    while (y * y > y2) --y;
    while ((y + 1) * (y + 1) <= y2) ++y;
    if (x * x + y * y != p) throw std::logic_error("two_squares: decomposition failed");
    return {x, y};
}

// ---------------------------------------------------------------- primes

enum class PrimeKind { split, inert };

/// Primary Gaussian prime with its residue-field data.
struct PrimaryPrime {
    GInt value;
    i64 norm = 0;
    i64 p = 0;  ///< rational prime below
    PrimeKind kind = PrimeKind::split;
    i64 i_image = 0;  ///< image of i in Z/p (split primes only)

    friend bool operator==(const PrimaryPrime& a, const PrimaryPrime& b) { return a.value == b.value; }
    friend bool operator<(const PrimaryPrime& a, const PrimaryPrime& b) { return a.value < b.value; }
};

/// Builds the PrimaryPrime record for a primary prime element.
inline PrimaryPrime make_primary_prime(const GInt& v) {
    if (!is_primary(v)) throw domain_error("make_primary_prime: value not primary");
    PrimaryPrime P;
    P.value = v;
    P.norm = v.norm();
    if (v.im == 0) {
        i64 q = v.re < 0 ? -v.re : v.re;
        if (q % 4 != 3 || !is_prime_u64(u64(q))) throw domain_error("make_primary_prime: not an inert prime");
        P.p = q;
        P.kind = PrimeKind::inert;
        return P;
    }
    if (!is_prime_u64(u64(P.norm))) throw domain_error("make_primary_prime: norm not prime");
    P.p = P.norm;
    P.kind = PrimeKind::split;
    // x + y i ≡ 0 mod ϖ  =>  i ≡ -x / y mod p
    i64 y = detail::mod_i64(v.im, P.p);
    i64 yinv = i64(powmod_u64(u64(y), u64(P.p - 2), u64(P.p)));
    P.i_image = detail::mod_i64(-i128(v.re) * yinv, P.p);
    return P;
}

/// The two primary primes above a split rational prime p ≡ 1 mod 4, in canonical order.
inline std::pair<PrimaryPrime, PrimaryPrime> primes_above_split(i64 p) {
    GInt z = two_squares(p);
    GInt a = primary_associate(z).second;
    GInt b = primary_associate(z.conj()).second;
    if (b < a) std::swap(a, b);
    return {make_primary_prime(a), make_primary_prime(b)};
}

// ---------------------------------------------------------------- factorization

struct Factorization {
    GInt unit{1};
    int two_exponent = 0;  ///< exponent of (1+i)
    std::vector<std::pair<PrimaryPrime, int>> primes;
};

inline Factorization factor(GInt z) {
    if (z.is_zero()) throw domain_error("factor: zero");
    Factorization F;
    const GInt one_plus_i{1, 1};
    while (z.norm() % 2 == 0) {
        z = exact_div(z, one_plus_i);
        ++F.two_exponent;
    }
    i64 n = z.norm();
    std::vector<std::pair<PrimaryPrime, int>> parts;
    for (auto [p, e] : factor_rational(n)) {
        if (p == 2) continue;
        if (p % 4 == 3) {
            PrimaryPrime q = make_primary_prime(GInt{-p, 0});
            int k = 0;
            while (divides(q.value, z)) { z = exact_div(z, q.value); ++k; }
            if (k) parts.push_back({q, k});
        } else {
            auto [a, b] = primes_above_split(p);
            for (const auto& P : {a, b}) {
                int k = 0;
                while (divides(P.value, z)) { z = exact_div(z, P.value); ++k; }
                if (k) parts.push_back({P, k});
            }
        }
    }
    if (z.norm() != 1) throw std::logic_error("factor: residual cofactor is not a unit");
    std::sort(parts.begin(), parts.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    F.unit = z;
    F.primes = std::move(parts);
    return F;
}

/// Product of the factorization, for round-trip checks.
inline GInt expand(const Factorization& F) {
    GInt r = F.unit;
    for (int k = 0; k < F.two_exponent; ++k) r = r * GInt{1, 1};
    for (const auto& [P, e] : F.primes)
        for (int k = 0; k < e; ++k) r = r * P.value;
    return r;
}

inline int moebius(const GInt& z) {
    if (z.is_zero() || !z.is_odd()) throw domain_error("moebius: argument must be odd and nonzero");
    auto F = factor(z);
    for (const auto& pe : F.primes)
        if (pe.second > 1) return 0;
    return (F.primes.size() % 2) ? -1 : 1;
}

// ---------------------------------------------------------------- residue symbols

/// Generic Euler criterion a^{(N-1)/2} mod ϖ for a prime element ϖ.
inline int quad_symbol_euler(const GInt& a, const GInt& w) {
    i64 n = w.norm();
    if (divides(w, a)) return 0;
    GInt r = powmod(a, u64(n - 1) / 2, w);
    if (divides(w, r - GInt{1})) return 1;
    if (divides(w, r + GInt{1})) return -1;
    throw domain_error("quad_symbol_euler: modulus is not prime");
}

/// Split fast path: map a to Z/p through i -> i_image and take the Jacobi symbol.
inline int quad_symbol_split(const GInt& a, const PrimaryPrime& P) {
    i64 r = detail::mod_i64(i128(a.re) + i128(detail::mod_i64(a.im, P.p)) * P.i_image, P.p);
    return jacobi(r, P.p);
}

/// Inert fast path: (a/q) = (N(a)/q) in Z.
inline int quad_symbol_inert(const GInt& a, const PrimaryPrime& P) {
    i64 nr = detail::mod_i64(i128(a.re) * a.re + i128(a.im) * a.im, P.p);
    return jacobi(nr, P.p);
}

inline int quad_symbol_prime(const GInt& a, const PrimaryPrime& P) {
    return P.kind == PrimeKind::split ? quad_symbol_split(a, P) : quad_symbol_inert(a, P);
}

/// Quadratic residue symbol (a/n) for odd non-unit n.
inline int quad_symbol(const GInt& a, const GInt& n) {
    if (n.is_zero() || !n.is_odd()) throw domain_error("quad_symbol: modulus must be odd");
    if (n.is_unit()) throw domain_error("quad_symbol: modulus is a unit");
    int s = 1;
    for (const auto& [P, e] : factor(n).primes) {
        int v = quad_symbol_prime(a, P);
        if (v == 0) return 0;
        if (e % 2) s *= v;
    }
    return s;
}

/// Quartic residue symbol as an exponent k with value i^k, or -1 when ϖ | a.
inline int quartic_symbol_exponent(const GInt& a, const PrimaryPrime& P) {
    if (divides(P.value, a)) return -1;
    GInt r = powmod(a, u64(P.norm - 1) / 4, P.value);
    for (int k = 0; k < 4; ++k)
        if (divides(P.value, r - unit_of(k))) return k;
    throw std::logic_error("quartic_symbol: no matching root of unity");
}

/// Quartic residue symbol with value in {1, i, -1, -i, 0}.
inline GInt quartic_symbol(const GInt& a, const PrimaryPrime& P) {
    int k = quartic_symbol_exponent(a, P);
    return k < 0 ? GInt{0} : unit_of(k);
}

/// i(1+i)^5 = 4 - 4i.
inline constexpr GInt family_twist{4, -4};

/// Family character χ_{i(1+i)^5 c}(n).
inline int chi_family(const GInt& c, const GInt& n) { return quad_symbol(family_twist * c, n); }

// ---------------------------------------------------------------- Gauss sums

inline constexpr i64 gauss_sum_cap = 1'000'000;

/// Complete residue system {x + y i : 0 <= x < N/g, 0 <= y < g}, g = gcd(re, im).
inline std::vector<GInt> residue_system(const GInt& n) {
    i64 N = n.norm();
    i64 g = std::gcd(n.re < 0 ? -n.re : n.re, n.im < 0 ? -n.im : n.im);
    std::vector<GInt> out;
    out.reserve(std::size_t(N));
    for (i64 y = 0; y < g; ++y)
        for (i64 x = 0; x < N / g; ++x) out.push_back({x, y});
    return out;
}

/// ẽ(z) = exp(2πi Im z); here z = r x / n and Im(r x / n) = Im(r x conj(n)) / N(n).
inline cplx e_tilde_ratio(const GInt& num, const GInt& n) {
    i128 im = i128(num.im) * n.re - i128(num.re) * n.im;
    i64 N = n.norm();
    i64 red = detail::mod_i64(im, N);
    return std::polar(1.0, 2 * pi * double(red) / double(N));
}

inline cplx gauss_sum(const GInt& r, const GInt& n) {
    if (n.is_zero() || !n.is_odd() || n.is_unit()) throw domain_error("gauss_sum: modulus must be odd and not a unit");
    if (n.norm() > gauss_sum_cap) throw domain_error("gauss_sum: modulus exceeds brute-force cap");
    CompensatedSum<cplx> s;
    for (const GInt& x : residue_system(n)) {
        int chi = quad_symbol(x, n);
        if (chi == 0) continue;
        s += double(chi) * e_tilde_ratio(r * x, n);
    }
    return s.value();
}

}  // namespace qhecke
