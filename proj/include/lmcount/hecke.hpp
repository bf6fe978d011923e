#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <string>

#include "lmcount/arith.hpp"
#include "lmcount/manin.hpp"

namespace lmcount {

// Merel's matrices of determinant n: integral (a b; c d) with
// a > b >= 0 and d > c >= 0.  They implement T_n on Manin symbols by
// right action, dropping images that leave P^1(Z/N).
inline std::vector<Mat22> merel_matrices(std::uint32_t n) {
    std::vector<Mat22> out;
    for (std::int64_t a = 1; a <= n; ++a)
        for (std::int64_t d = 1; d <= n; ++d) {
            std::int64_t need = a * d - n;  // = b c
            if (need < 0) continue;
            for (std::int64_t b = 0; b < a; ++b) {
                if (b == 0) {
                    if (need == 0)
                        for (std::int64_t c = 0; c < d; ++c) out.push_back({a, b, c, d});
                    continue;
                }
                if (need % b) continue;
                std::int64_t c = need / b;
                if (c < d) out.push_back({a, b, c, d});
            }
        }
    return out;
}

// Hecke operator T_q on the full presented quotient (column convention).
inline FpMatrix hecke_matrix(const ManinSpace& s, std::uint32_t q) {
    if (!is_prime_u64(q)) throw std::invalid_argument("hecke: q must be prime");
    if (s.level() % q == 0 || s.modulus() == q)
        throw std::invalid_argument("hecke: q | Np is not supported (no U_q here)");
    const std::vector<Mat22> heil = merel_matrices(q);
    const std::size_t m = s.dim();
    std::vector<std::vector<std::uint32_t>> cols(m);
    std::vector<std::uint64_t> acc(m);
    for (std::size_t k = 0; k < m; ++k) {
        auto [c, d] = s.rep_of_free(k);
        std::fill(acc.begin(), acc.end(), 0);
        for (const Mat22& h : heil) {
            std::int64_t c2 = c * h[0] + d * h[2];
            std::int64_t d2 = c * h[1] + d * h[3];
            s.class_add(acc.data(), s.p1().index(c2, d2), 1u);
        }
        cols[k] = s.reduce(acc);
    }
    return s.operator_from_columns(cols);
}

// T_q restricted to an invariant subspace V (throws if V is not invariant).
inline FpMatrix hecke_on(const ManinSpace& s, const Subspace& v, std::uint32_t q) {
    return restrict_operator(hecke_matrix(s, q), v);
}

// Integral lift of the Atkin-Lehner involution w_Q for Q || N:
// W = (Q u, v; N, Q) with u = Q^{-1} mod N/Q and det W = Q.
inline Mat22 atkin_lehner_lift(std::uint32_t N, std::uint32_t Q) {
    if (Q == 0 || N % Q != 0 || gcd_i64(Q, N / Q) != 1)
        throw std::invalid_argument("atkin_lehner: Q must exactly divide N");
    std::int64_t NQ = N / Q;
    if (NQ == 1) return {0, -1, static_cast<std::int64_t>(N), static_cast<std::int64_t>(N)};
    std::int64_t u, y;
    xgcd(static_cast<std::int64_t>(Q), NQ, u, y);
    u = ((u % NQ) + NQ) % NQ;  // smallest nonnegative solution of Qu = 1 (mod N/Q)
    std::int64_t v = (static_cast<std::int64_t>(Q) * u - 1) / NQ;
    return {static_cast<std::int64_t>(Q) * u, v, static_cast<std::int64_t>(N), static_cast<std::int64_t>(Q)};
}

// w_Q on the full quotient.  In weight 2 the path action of the integral
// lift is already an involution (W^2 lies in Q * Gamma_0(N)).
inline FpMatrix atkin_lehner_matrix(const ManinSpace& s, std::uint32_t Q) {
    Mat22 W = atkin_lehner_lift(s.level(), Q);
    const std::size_t m = s.dim();
    std::vector<std::vector<std::uint32_t>> cols(m);
    std::vector<std::uint64_t> acc(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::fill(acc.begin(), acc.end(), 0);
        s.add_transformed_generator(acc.data(), W, k, 1u);
        cols[k] = s.reduce(acc);
    }
    return s.operator_from_columns(cols);
}

inline FpMatrix atkin_lehner_on(const ManinSpace& s, const Subspace& v, std::uint32_t Q) {
    return restrict_operator(atkin_lehner_matrix(s, Q), v);
}

// Degeneracy (trace) maps from level N down to level M = N/ell.
// Column convention: dst.dim() x src.dim(); twisted=false is {a,b} -> {a,b},
// twisted=true is {a,b} -> {ell a, ell b}.
inline FpMatrix degeneracy_matrix(const ManinSpace& src, const ManinSpace& dst, std::uint32_t ell, bool twisted) {
    if (dst.level() * static_cast<std::uint64_t>(ell) != src.level())
        throw std::invalid_argument("degeneracy: levels must satisfy N = ell * M");
    require_same_modulus(src.modulus(), dst.modulus());
    const std::size_t msrc = src.dim(), mdst = dst.dim();
    FpMatrix out(src.modulus(), mdst, msrc);
    std::vector<std::uint64_t> acc(mdst);
    for (std::size_t k = 0; k < msrc; ++k) {
        std::fill(acc.begin(), acc.end(), 0);
        const Mat22& g = src.lift_of_free(k);
        if (!twisted) {
            dst.class_add(acc.data(), dst.p1().index(g[2], g[3]), 1u);
        } else {
            std::int64_t l = ell;
            dst.add_path(acc.data(), l * g[1], g[3], l * g[0], g[2], 1u);
        }
        std::vector<std::uint32_t> col = dst.reduce(acc);
        for (std::size_t i = 0; i < mdst; ++i) out.set_reduced(i, k, col[i]);
    }
    return out;
}

using SpaceGetter = std::function<std::shared_ptr<const ManinSpace>(std::uint32_t)>;

inline SpaceGetter ad_hoc_spaces(std::uint32_t p) {
    return [p](std::uint32_t N) { return std::make_shared<const ManinSpace>(N, p); };
}

// New subspace: intersection, inside cuspidal plus, of the kernels of both
// degeneracy maps to level N/ell for every prime ell | N.
inline Subspace new_subspace(const ManinSpace& s, const SpaceGetter& spaces) {
    const Subspace& V = s.cuspidal_plus();
    const std::uint32_t p = s.modulus();
    std::vector<FpMatrix> blocks;
    std::size_t total_rows = 0;
    for (std::uint32_t ell : prime_factors(s.level())) {
        std::shared_ptr<const ManinSpace> dst = spaces(s.level() / ell);
        for (bool twisted : {false, true}) {
            FpMatrix D = degeneracy_matrix(s, *dst, ell, twisted);
            // rows of K = V.basis * D^T are the images of the V-basis
            FpMatrix K = V.basis * D.transpose();
            blocks.push_back(K.transpose());
            total_rows += blocks.back().rows();
        }
    }
    const std::size_t g = V.dim();
    FpMatrix stacked(p, total_rows, g);
    std::size_t at = 0;
    for (const FpMatrix& b : blocks) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < g; ++j) stacked.set_reduced(at + i, j, b(i, j));
        at += b.rows();
    }
    Subspace coords = kernel(stacked);
    return Subspace::from_rows(coords.basis * V.basis);
}

inline Subspace new_subspace(std::uint32_t N, std::uint64_t p) {
    ManinSpace s(N, p);
    return new_subspace(s, ad_hoc_spaces(static_cast<std::uint32_t>(p)));
}

// Simultaneous Atkin-Lehner eigenspace decomposition of the new subspace,
// for squarefree N.  Eigenspaces are indexed by a bitmask over the sorted
// prime factors; bit i set means w_{p_i} acts by -1.
struct ALDecomposition {
    std::uint32_t N = 1, p = 0;
    std::vector<std::uint32_t> factors;  // sorted
    std::vector<Subspace> eigenspaces;   // size 2^s, indexed by mask
    std::size_t new_dim = 0;

    std::string chi_string(std::size_t mask) const {
        std::string out;
        for (std::size_t i = 0; i < factors.size(); ++i) out += (mask >> i) & 1 ? '-' : '+';
        return out;
    }
};

inline ALDecomposition al_eigenspaces(const ManinSpace& s, const SpaceGetter& spaces) {
    if (!is_squarefree(s.level())) throw std::invalid_argument("al_eigenspaces: N must be squarefree");
    ALDecomposition dec;
    dec.N = s.level();
    dec.p = s.modulus();
    dec.factors = prime_factors(s.level());
    Subspace nw = new_subspace(s, spaces);
    dec.new_dim = nw.dim();
    dec.eigenspaces = {nw};
    const std::uint32_t p = s.modulus();
    for (std::size_t i = 0; i < dec.factors.size(); ++i) {
        FpMatrix W = atkin_lehner_matrix(s, dec.factors[i]);
        std::vector<Subspace> next(dec.eigenspaces.size() * 2);
        for (std::size_t mask = 0; mask < dec.eigenspaces.size(); ++mask) {
            const Subspace& S = dec.eigenspaces[mask];
            if (S.dim() == 0) {
                Subspace empty;
                empty.ambient = S.ambient;
                empty.basis = FpMatrix(p, 0, S.ambient);
                next[mask] = empty;
                next[mask | (1ULL << i)] = empty;
                continue;
            }
            FpMatrix w = restrict_operator(W, S);
            FpMatrix wm = w, wp = w;
            for (std::size_t t = 0; t < w.rows(); ++t) {
                wm.set(t, t, static_cast<std::int64_t>(wm(t, t)) - 1);  // w - 1: kernel = +1 eigenspace
                wp.set(t, t, wp(t, t) + 1);                             // w + 1: kernel = -1 eigenspace
            }
            Subspace plus_c = kernel(wm), minus_c = kernel(wp);
            next[mask] = Subspace::from_rows(plus_c.basis * S.basis);
            next[mask | (1ULL << i)] = Subspace::from_rows(minus_c.basis * S.basis);
        }
        dec.eigenspaces = std::move(next);
    }
    return dec;
}

inline ALDecomposition al_eigenspaces(std::uint32_t N, std::uint64_t p) {
    ManinSpace s(N, p);
    return al_eigenspaces(s, ad_hoc_spaces(static_cast<std::uint32_t>(p)));
}

// Thread-safe cache of constructed spaces with an approximate byte budget.
class SpaceCache {
public:
    explicit SpaceCache(std::uint32_t p, std::size_t max_bytes = 2ULL << 30) : p_(p), cap_(max_bytes) {}

    std::shared_ptr<const ManinSpace> get(std::uint32_t N) {
        std::unique_lock<std::mutex> lk(mu_);
        for (;;) {
            auto it = done_.find(N);
            if (it != done_.end()) {
                it->second.stamp = ++tick_;
                return it->second.space;
            }
            if (!building_.count(N)) break;
            cv_.wait(lk);
        }
        building_.insert(N);
        lk.unlock();
        std::shared_ptr<const ManinSpace> built;
        try {
            built = std::make_shared<const ManinSpace>(N, p_);
        } catch (...) {
            lk.lock();
            building_.erase(N);
            cv_.notify_all();
            throw;
        }
        lk.lock();
        std::size_t bytes = approx_bytes(*built);
        done_.emplace(N, Entry{built, ++tick_, bytes});
        bytes_ += bytes;
        building_.erase(N);
        while (bytes_ > cap_ && done_.size() > 1) {
            auto victim = done_.end();
            for (auto it = done_.begin(); it != done_.end(); ++it)
                if (it->first != N && (victim == done_.end() || it->second.stamp < victim->second.stamp)) victim = it;
            if (victim == done_.end()) break;
            bytes_ -= victim->second.bytes;
            done_.erase(victim);
        }
        cv_.notify_all();
        return built;
    }

    SpaceGetter getter() {
        return [this](std::uint32_t N) { return get(N); };
    }

private:
    static std::size_t approx_bytes(const ManinSpace& s) {
        return s.p1().size() * 24 + s.p1().size() * s.dim() * 4 + s.dim() * s.dim() * 8 + (1 << 12);
    }

    struct Entry {
        std::shared_ptr<const ManinSpace> space;
        std::uint64_t stamp;
        std::size_t bytes;
    };

    std::uint32_t p_;
    std::size_t cap_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::uint32_t, Entry> done_;
    std::set<std::uint32_t> building_;
    std::uint64_t tick_ = 0;
    std::size_t bytes_ = 0;
};

}  // namespace lmcount
