#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lmcount {

inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d : {2ULL, 3ULL, 5ULL}) {
        if (n % d == 0) return n == d;
    }
    // trial division with a 2-3-5 wheel; fine for the moduli this library sees
    static const int wheel[8] = {4, 2, 4, 2, 4, 6, 2, 6};
    std::uint64_t d = 7;
    int w = 0;
    while (d * d <= n) {
        if (n % d == 0) return false;
        d += wheel[w];
        w = (w + 1) & 7;
    }
    return true;
}

// Checks that p is a prime small enough that products of residues fit in
// 64-bit intermediates (p < 2^31).
inline std::uint32_t checked_modulus(std::uint64_t p) {
    if (p >= (1ULL << 31))
        throw std::invalid_argument("modulus too large: p must be < 2^31, got " + std::to_string(p));
    if (!is_prime_u64(p))
        throw std::invalid_argument("modulus must be prime, got " + std::to_string(p));
    return static_cast<std::uint32_t>(p);
}

inline std::uint32_t mod_reduce(std::int64_t v, std::uint32_t p) {
    std::int64_t r = v % static_cast<std::int64_t>(p);
    if (r < 0) r += p;
    return static_cast<std::uint32_t>(r);
}

inline std::uint32_t mod_add(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    std::uint32_t s = a + b;
    return s >= p ? s - p : s;
}

inline std::uint32_t mod_sub(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    return a >= b ? a - b : a + p - b;
}

inline std::uint32_t mod_mul(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    return static_cast<std::uint32_t>(static_cast<std::uint64_t>(a) * b % p);
}

inline std::uint32_t mod_pow(std::uint32_t a, std::uint64_t e, std::uint32_t p) {
    std::uint64_t base = a % p, acc = 1;
    while (e) {
        if (e & 1) acc = acc * base % p;
        base = base * base % p;
        e >>= 1;
    }
    return static_cast<std::uint32_t>(acc);
}

inline std::uint32_t mod_inv(std::uint32_t a, std::uint32_t p) {
    if (a % p == 0) throw std::domain_error("division by zero in F_p");
    return mod_pow(a % p, p - 2, p);  // p prime
}

// A residue together with its modulus.  Arithmetic checks that moduli match.
struct FpElement {
    std::uint32_t value = 0;  // in [0, p)
    std::uint32_t p = 0;

    FpElement() = default;
    FpElement(std::int64_t v, std::uint32_t modulus) : p(modulus) {
        if (modulus == 0 || modulus >= (1u << 31))
            throw std::invalid_argument("modulus out of range");
        value = mod_reduce(v, modulus);
    }

    static FpElement make(std::int64_t v, std::uint64_t modulus) {
        return FpElement(v, checked_modulus(modulus));
    }

    friend bool operator==(const FpElement&, const FpElement&) = default;
};

inline void require_same_modulus(std::uint32_t a, std::uint32_t b) {
    if (a != b)
        throw std::invalid_argument("modulus mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

inline FpElement operator+(FpElement a, FpElement b) {
    require_same_modulus(a.p, b.p);
    return {mod_add(a.value, b.value, a.p), a.p};
}

inline FpElement operator-(FpElement a, FpElement b) {
    require_same_modulus(a.p, b.p);
    return {mod_sub(a.value, b.value, a.p), a.p};
}

inline FpElement operator*(FpElement a, FpElement b) {
    require_same_modulus(a.p, b.p);
    return {mod_mul(a.value, b.value, a.p), a.p};
}

inline FpElement operator-(FpElement a) {
    return {a.value == 0 ? 0u : a.p - a.value, a.p};
}

inline FpElement inverse(FpElement a) { return {mod_inv(a.value, a.p), a.p}; }

inline FpElement operator/(FpElement a, FpElement b) {
    require_same_modulus(a.p, b.p);
    return a * inverse(b);
}

}  // namespace lmcount
