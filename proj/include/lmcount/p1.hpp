#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lmcount {

inline std::int64_t floordiv(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

inline std::int64_t gcd_i64(std::int64_t a, std::int64_t b) {
    return std::gcd(a, b);
}

// g = a x + b y
inline std::int64_t xgcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
    std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        std::int64_t q = old_r / r;
        std::int64_t tmp;
        tmp = old_r - q * r; old_r = r; r = tmp;
        tmp = old_s - q * s; old_s = s; s = tmp;
        tmp = old_t - q * t; old_t = t; t = tmp;
    }
    x = old_s; y = old_t;
    return old_r;
}

// The projective line P^1(Z/N) with canonical representatives and
// constant-time-ish lookup of the class of an arbitrary pair (c:d).
class P1Table {
public:
    explicit P1Table(std::uint32_t N) : N_(N) {
        if (N == 0) throw std::invalid_argument("P1Table: N must be positive");
        if (N == 1) {
            reps_ = {{0, 0}};
            index_.emplace(0, 0);
            return;
        }
        std::vector<std::uint32_t> divs;
        for (std::uint32_t c = 1; c * 1ull * c <= N; ++c) {
            if (N % c == 0) {
                divs.push_back(c);
                if (c != N / c) divs.push_back(N / c);
            }
        }
        std::sort(divs.begin(), divs.end());
        // canonical first coordinate of a class is gcd(c, N), so scanning
        // divisor x residue pairs hits every class
        index_.reserve(static_cast<std::size_t>(N) * 2);
        auto consider = [&](std::uint32_t c, std::uint32_t d) {
            auto t = normalize(c, d);
            if (!t) return;
            std::uint64_t key = static_cast<std::uint64_t>(t->first) * N_ + t->second;
            if (index_.emplace(key, static_cast<std::int32_t>(reps_.size())).second)
                reps_.push_back(*t);
        };
        consider(0, 1);
        for (std::uint32_t d = 0; d < N; ++d) consider(1, d);
        for (std::uint32_t c : divs) {
            if (c == 1 || c == N) continue;
            for (std::uint32_t d = 0; d < N; ++d) consider(c, d);
        }
    }

    std::uint32_t level() const { return N_; }
    std::size_t size() const { return reps_.size(); }
    std::pair<std::uint32_t, std::uint32_t> rep(std::size_t i) const { return reps_[i]; }

    // canonical representative of (u:v), or nullopt when gcd(u,v,N) > 1
    std::optional<std::pair<std::uint32_t, std::uint32_t>> normalize(std::int64_t u, std::int64_t v) const {
        const std::int64_t N = N_;
        if (N == 1) return std::make_pair(0u, 0u);
        u %= N; if (u < 0) u += N;
        v %= N; if (v < 0) v += N;
        if (gcd_i64(gcd_i64(u, N), v) != 1) return std::nullopt;
        if (u == 0) return std::make_pair(0u, 1u);
        std::int64_t s, t;
        std::int64_t g = xgcd(u, N, s, t);
        s %= N; if (s < 0) s += N;
        if (g != 1) {
            std::int64_t d = N / g;
            while (gcd_i64(s, N) != 1) s = (s + d) % N;
        }
        std::int64_t u2 = g;
        std::int64_t v2 = (s * v) % N;
        if (g != 1) {
            // minimise over the stabiliser of the first coordinate:
            // units w = 1 + k N/g
            std::int64_t Ng = N / g, best = v2;
            for (std::int64_t k = 1; k < g; ++k) {
                std::int64_t w = 1 + k * Ng;
                if (gcd_i64(w, N) != 1) continue;
                std::int64_t cand = (v2 * w) % N;
                if (cand < best) best = cand;
            }
            v2 = best;
        }
        return std::make_pair(static_cast<std::uint32_t>(u2), static_cast<std::uint32_t>(v2));
    }

    // index of the class of (u:v); -1 when the pair is not in P^1 (shared factor with N)
    std::int32_t index(std::int64_t u, std::int64_t v) const {
        auto t = normalize(u, v);
        if (!t) return -1;
        auto it = index_.find(static_cast<std::uint64_t>(t->first) * N_ + t->second);
        return it == index_.end() ? -1 : it->second;
    }

private:
    std::uint32_t N_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> reps_;
    std::unordered_map<std::uint64_t, std::int32_t> index_;
};

}  // namespace lmcount
