#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "zint.hpp"

namespace qhecke {

/// Rational primes up to n by the sieve of Eratosthenes.
inline std::vector<i64> rational_primes(i64 n) {
    std::vector<i64> out;
    if (n < 2) return out;
    std::vector<bool> comp(std::size_t(n) + 1, false);
    for (i64 p = 2; p <= n; ++p) {
        if (comp[p]) continue;
        out.push_back(p);
        for (i64 q = p * p; q <= n; q += p) comp[q] = true;
    }
    return out;
}

/// Smallest-prime-factor table for 0..n.
inline std::vector<std::uint32_t> spf_table(i64 n) {
    std::vector<std::uint32_t> spf(std::size_t(n) + 1, 0);
    for (i64 p = 2; p <= n; ++p) {
        if (spf[p]) continue;
        for (i64 q = p; q <= n; q += p)
            if (!spf[q]) spf[q] = std::uint32_t(p);
    }
    return spf;
}

/// All primary primes with norm <= B in canonical order.
inline std::vector<PrimaryPrime> primary_primes_up_to(i64 B) {
    std::vector<PrimaryPrime> out;
    if (B < 5) return out;
    for (i64 p : rational_primes(B)) {
        if (p % 4 == 1) {
            auto [a, b] = primes_above_split(p);
            out.push_back(a);
            out.push_back(b);
        } else if (p % 4 == 3 && p <= B / p) {
            out.push_back(make_primary_prime(GInt{-p, 0}));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Shared read-only table of primary primes.
class PrimeTable {
public:
    explicit PrimeTable(i64 bound) : bound_(bound), primes_(primary_primes_up_to(bound)) {}
    PrimeTable(i64 bound, std::vector<PrimaryPrime> primes) : bound_(bound), primes_(std::move(primes)) {}

    i64 bound() const { return bound_; }
    const std::vector<PrimaryPrime>& primes() const { return primes_; }
    std::size_t size() const { return primes_.size(); }

    /// Number of entries with norm <= b.
    std::size_t count_up_to(i64 b) const {
        return std::upper_bound(primes_.begin(), primes_.end(), b,
                                [](i64 v, const PrimaryPrime& P) { return v < P.norm; }) -
               primes_.begin();
    }

    void require(i64 b) const {
        if (b > bound_) throw domain_error("prime table bound " + std::to_string(bound_) + " below required " + std::to_string(b));
    }

private:
    i64 bound_;
    std::vector<PrimaryPrime> primes_;
};

inline constexpr const char* sieve_cache_magic = "# qhecke-sieve v1";

/// Writes the table as CSV rows (re, im, norm, kind).
inline void write_sieve_cache(const PrimeTable& T, std::ostream& os) {
    os << sieve_cache_magic << " bound=" << T.bound() << "\n";
    os << "re,im,norm,kind\n";
    for (const auto& P : T.primes())
        os << P.value.re << "," << P.value.im << "," << P.norm << "," << (P.kind == PrimeKind::split ? "split" : "inert") << "\n";
}

/// Loads and validates a sieve cache; throws on any invariant violation.
inline PrimeTable read_sieve_cache(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind(sieve_cache_magic, 0) != 0) throw domain_error("sieve cache: bad header");
    auto pos = line.find("bound=");
    if (pos == std::string::npos) throw domain_error("sieve cache: missing bound");
    i64 bound = std::stoll(line.substr(pos + 6));
    if (!std::getline(is, line) || line != "re,im,norm,kind") throw domain_error("sieve cache: bad column header");
    std::vector<PrimaryPrime> v;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[4];
        for (auto& s : f)
            if (!std::getline(ss, s, ',')) throw domain_error("sieve cache: short row");
        PrimaryPrime P = make_primary_prime(GInt{std::stoll(f[0]), std::stoll(f[1])});
        if (P.norm != std::stoll(f[2])) throw domain_error("sieve cache: norm mismatch");
        if ((f[3] == "split") != (P.kind == PrimeKind::split)) throw domain_error("sieve cache: kind mismatch");
        if (P.norm > bound) throw domain_error("sieve cache: entry above bound");
        if (!v.empty() && !(v.back() < P)) throw domain_error("sieve cache: rows not in canonical order");
        v.push_back(P);
    }
    if (v.size() != PrimeTable(bound).size()) throw domain_error("sieve cache: incomplete table");
    return PrimeTable(bound, std::move(v));
}

// ---------------------------------------------------------------- squarefree enumeration

/// Odd squarefree element c = unit * primary_part.
struct FamilyElement {
    GInt c;
    GInt unit;
    GInt primary_part;
    i64 norm = 0;
};

/// Primary squarefree element with its Möbius value and prime factors.
struct SquarefreePrimary {
    GInt value;
    i64 norm = 0;
    int mu = 1;
};

namespace detail {

/// Möbius value of a primary (odd) element from the factorization of its norm; 0 if not squarefree.
inline int mu_from_norm(const GInt& z, i64 n, const std::vector<std::uint32_t>& spf) {
    int mu = 1;
    while (n > 1) {
        i64 p = spf[n];
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        if (p % 4 == 3) {
            if (e > 2) return 0;
            mu = -mu;  // e == 2: one inert prime
        } else {
            if (e == 1) {
                mu = -mu;
            } else if (e == 2 && z.re % p == 0 && z.im % p == 0) {
                // both conjugate primes once
            } else {
                return 0;
            }
        }
    }
    return mu;
}

}  // namespace detail

/// All primary squarefree elements with norm <= B (including 1), canonical order.
inline std::vector<SquarefreePrimary> squarefree_primaries(i64 B) {
    std::vector<SquarefreePrimary> out;
    if (B < 1) return out;
    auto spf = spf_table(B);
    i64 r = i64(std::sqrt(double(B))) + 1;
    for (i64 b = -r; b <= r; b += 1) {
        if (b % 2 != 0) continue;
        for (i64 a = -r; a <= r; ++a) {
            GInt z{a, b};
            i64 n = a * a + b * b;
            if (n > B || !is_primary(z)) continue;
            int mu = detail::mu_from_norm(z, n, spf);
            if (mu != 0) out.push_back({z, n, mu});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.value < y.value; });
    return out;
}

/// All odd squarefree c with N(c) <= B, each associate separately, ordered by (norm, re, im).
inline std::vector<FamilyElement> family_stream(i64 B) {
    std::vector<FamilyElement> out;
    for (const auto& s : squarefree_primaries(B)) {
        for (int k = 0; k < 4; ++k) {
            GInt u = unit_of(k);
            out.push_back({u * s.value, u, s.value, s.norm});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.c < y.c; });
    return out;
}

}  // namespace qhecke
