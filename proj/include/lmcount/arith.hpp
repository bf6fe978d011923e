#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lmcount {

inline constexpr std::uint64_t kLevelCap = 10'000'000;

// Trial division over a 2-3-5 wheel.  Levels are capped at 10^7.
inline std::vector<std::pair<std::uint32_t, int>> factorize(std::uint64_t n) {
    if (n == 0 || n > kLevelCap) throw std::invalid_argument("factorize: argument out of range");
    std::vector<std::pair<std::uint32_t, int>> out;
    auto strip = [&](std::uint64_t d) {
        if (n % d == 0) {
            int e = 0;
            while (n % d == 0) { n /= d; ++e; }
            out.emplace_back(static_cast<std::uint32_t>(d), e);
        }
    };
    strip(2); strip(3); strip(5);
    static const int wheel[8] = {4, 2, 4, 2, 4, 6, 2, 6};
    std::uint64_t d = 7;
    int w = 0;
    while (d * d <= n) {
        strip(d);
        d += wheel[w];
        w = (w + 1) & 7;
    }
    if (n > 1) out.emplace_back(static_cast<std::uint32_t>(n), 1);
    return out;
}

inline int omega(std::uint64_t n) { return static_cast<int>(factorize(n).size()); }

inline bool is_squarefree(std::uint64_t n) {
    for (auto& [q, e] : factorize(n))
        if (e > 1) return false;
    return true;
}

inline std::vector<std::uint32_t> prime_factors(std::uint64_t n) {
    std::vector<std::uint32_t> out;
    for (auto& [q, e] : factorize(n)) out.push_back(q);
    return out;
}

inline std::vector<std::uint32_t> divisors(std::uint32_t n) {
    std::vector<std::uint32_t> out{1};
    for (auto& [q, e] : factorize(n)) {
        std::size_t sz = out.size();
        std::uint64_t qe = 1;
        for (int i = 0; i < e; ++i) {
            qe *= q;
            for (std::size_t j = 0; j < sz; ++j) out.push_back(static_cast<std::uint32_t>(out[j] * qe));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace lmcount
