// Test-side oracles, independent of the library implementation paths they
// check: classical index/genus/cusp formulas for Gamma_0(N) and brute-force
// point counts on small Weierstrass models.
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

inline std::vector<std::uint32_t> prime_divisors(std::uint32_t n) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t d = 2; static_cast<std::uint64_t>(d) * d <= n; ++d)
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) out.push_back(n);
    return out;
}

inline std::uint64_t psi_index(std::uint32_t N) {  // [SL2(Z) : Gamma_0(N)]
    std::uint64_t mu = N;
    for (std::uint32_t q : prime_divisors(N)) mu = mu / q * (q + 1);
    return mu;
}

inline int nu2(std::uint32_t N) {
    if (N % 4 == 0) return 0;
    int v = 1;
    for (std::uint32_t q : prime_divisors(N)) {
        if (q == 2) continue;
        v *= (q % 4 == 1) ? 2 : 0;
    }
    return v;
}

inline int nu3(std::uint32_t N) {
    if (N % 9 == 0) return 0;
    int v = 1;
    for (std::uint32_t q : prime_divisors(N)) {
        if (q == 3) continue;
        v *= (q % 3 == 1) ? 2 : 0;
    }
    return v;
}

inline std::uint32_t euler_phi(std::uint32_t n) {
    std::uint32_t r = n;
    for (std::uint32_t q : prime_divisors(n)) r = r / q * (q - 1);
    return r;
}

inline std::uint32_t cusp_count(std::uint32_t N) {
    std::uint32_t c = 0;
    for (std::uint32_t d = 1; d <= N; ++d)
        if (N % d == 0) c += euler_phi(std::gcd(d, N / d));
    return c;
}

inline std::int64_t genus_gamma0(std::uint32_t N) {
    std::int64_t twelve_g = 12 + static_cast<std::int64_t>(psi_index(N)) - 3 * nu2(N) - 4 * nu3(N) -
                            6 * static_cast<std::int64_t>(cusp_count(N));
    return twelve_g / 12;
}

struct Curve {
    std::int64_t a1, a2, a3, a4, a6;
};

// Known minimal models for the isogeny classes of prime-ish small conductor
// used in the Hecke sanity checks.
inline Curve curve_of_conductor(std::uint32_t N) {
    switch (N) {
        case 11: return {0, -1, 1, -10, -20};
        case 15: return {1, 1, 1, -10, -10};
        case 17: return {1, -1, 1, -1, -14};
        case 19: return {0, 1, 1, -9, -15};
        case 33: return {1, 1, 0, -11, 0};
        default: throw std::invalid_argument("no tabulated curve at this conductor");
    }
}

// Trace of Frobenius at ell by exhaustive point counting on the reduced
// Weierstrass model.  Good reduction: a = ell - #affine.  Multiplicative or
// additive reduction: a = ell - 1 - #smooth affine (the group of smooth
// points has ell - a points including the one at infinity).
inline int frobenius_trace(const Curve& e, std::uint32_t ell) {
    auto md = [&](std::int64_t v) { return static_cast<std::int64_t>(((v % ell) + ell) % ell); };
    std::int64_t a1 = md(e.a1), a2 = md(e.a2), a3 = md(e.a3), a4 = md(e.a4), a6 = md(e.a6);
    int smooth = 0;
    bool singular_found = false;
    for (std::int64_t x = 0; x < ell; ++x)
        for (std::int64_t y = 0; y < ell; ++y) {
            std::int64_t lhs = md(y * y + a1 * x * y + a3 * y);
            std::int64_t rhs = md(x * x * x + a2 * x * x + a4 * x + a6);
            if (lhs != rhs) continue;
            std::int64_t fy = md(2 * y + a1 * x + a3);
            std::int64_t fx = md(a1 * y - (3 * x * x + 2 * a2 * x + a4));
            if (fy == 0 && fx == 0)
                singular_found = true;
            else
                ++smooth;
        }
    if (!singular_found) return static_cast<int>(ell) - smooth;
    return static_cast<int>(ell) - 1 - smooth;
}

}  // namespace oracle
