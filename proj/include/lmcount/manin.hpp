#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "lmcount/fp.hpp"
#include "lmcount/fp_matrix.hpp"
#include "lmcount/p1.hpp"

namespace lmcount {

using Mat22 = std::array<std::int64_t, 4>;  // (a b; c d)

// Weight-2 modular symbols for Gamma_0(N) over F_p, presented as the quotient
// of the free module on P^1(Z/N) by the two- and three-term Manin relations
//   x + x.sigma = 0,   x + x.tau + x.tau^2 = 0
// with sigma = (0,-1;1,0) and tau = (0,-1;1,-1).  The presentation only has
// 2- and 3-torsion, so any odd prime p != 3 is an admissible coefficient
// field, including p | N.
//
// Immutable after construction; lazily built members are guarded by
// std::call_once, so a constructed space is safe to share across threads.
class ManinSpace {
public:
    ManinSpace(std::uint32_t N, std::uint64_t p) : N_(N), p_(checked_modulus(p)), p1_(N) {
        if (p_ == 2 || p_ == 3)
            throw std::invalid_argument("manin_space: p | 6 gives torsion in the Manin relations");
        build_presentation();
        build_lifts();
    }

    std::uint32_t level() const { return N_; }
    std::uint32_t modulus() const { return p_; }
    const P1Table& p1() const { return p1_; }

    // dimension of the presented quotient (= 2 g_0(N) + #cusps - 1)
    std::size_t dim() const { return free_of_.size(); }

    // ---- classes of generators ----

    // acc[0..dim) += coeff * class(e_i)
    void class_add(std::uint64_t* acc, std::int32_t p1_index, std::uint32_t coeff) const {
        if (p1_index < 0 || coeff == 0) return;
        const GenRef& g = gen_of_[static_cast<std::size_t>(p1_index)];
        if (g.gen < 0) return;  // generator killed by the relations
        std::uint32_t c = g.negated ? p_ - coeff : coeff;
        if (c == p_) c = 0;
        std::int32_t slot = slot_of_[g.gen];
        if (slot >= 0) {
            acc[slot] += c;
            return;
        }
        const std::uint32_t* row = expr_row(g.gen);
        const std::uint64_t cc = c;
        for (std::size_t j = 0; j < dim(); ++j) acc[j] += cc * row[j];
    }

    std::vector<std::uint32_t> class_row(std::int32_t p1_index) const {
        std::vector<std::uint64_t> acc(dim(), 0);
        class_add(acc.data(), p1_index, 1u);
        return reduce(acc);
    }

    std::vector<std::uint32_t> reduce(const std::vector<std::uint64_t>& acc) const {
        Barrett br(p_);
        std::vector<std::uint32_t> out(acc.size());
        for (std::size_t i = 0; i < acc.size(); ++i) out[i] = br.reduce(acc[i]);
        return out;
    }

    // ---- modular symbol paths ----

    // acc += coeff * {oo, a/q}   (q == 0 encodes the cusp oo itself)
    void add_path_from_inf(std::uint64_t* acc, std::int64_t a, std::int64_t q, std::uint32_t coeff) const {
        if (coeff == 0 || q == 0) return;
        if (q < 0) { a = -a; q = -q; }
        // continued fraction a/q; segment k contributes the Manin symbol
        // (q_k : (-1)^{k-1} q_{k-1})
        std::int64_t a0 = floordiv(a, q);
        std::int64_t r = a - a0 * q;
        std::int64_t qk_1 = 0, qk = 1;
        class_add(acc, p1_.index(qk, -qk_1), coeff);
        std::int64_t num = q, den = r;
        int k = 0;
        while (den != 0) {
            std::int64_t step = num / den;
            std::int64_t tmp = num - step * den;
            num = den; den = tmp;
            ++k;
            std::int64_t qnew = step * qk + qk_1;
            qk_1 = qk; qk = qnew;
            std::int64_t sign = (k % 2 == 0) ? -1 : 1;  // (-1)^{k-1}
            class_add(acc, p1_.index(qk, sign * qk_1), coeff);
        }
    }

    // acc += coeff * {a1/q1, a2/q2}
    void add_path(std::uint64_t* acc, std::int64_t a1, std::int64_t q1, std::int64_t a2, std::int64_t q2,
                  std::uint32_t coeff) const {
        add_path_from_inf(acc, a2, q2, coeff);
        std::uint32_t neg = coeff % p_ ? p_ - coeff % p_ : 0;
        add_path_from_inf(acc, a1, q1, neg);
    }

    // acc += coeff * class of {M g 0, M g oo} where g is the SL2 lift of
    // free generator k; M is an integral matrix of positive determinant
    void add_transformed_generator(std::uint64_t* acc, const Mat22& M, std::size_t k, std::uint32_t coeff) const {
        const Mat22& g = lift_of_free_[k];
        std::int64_t na = M[0] * g[0] + M[1] * g[2];
        std::int64_t nb = M[0] * g[1] + M[1] * g[3];
        std::int64_t nc = M[2] * g[0] + M[3] * g[2];
        std::int64_t nd = M[2] * g[1] + M[3] * g[3];
        add_path(acc, nb, nd, na, nc, coeff);
    }

    const Mat22& lift_of_free(std::size_t k) const { return lift_of_free_[k]; }
    std::pair<std::uint32_t, std::uint32_t> rep_of_free(std::size_t k) const {
        return p1_.rep(static_cast<std::size_t>(free_of_[k]));
    }

    // ---- distinguished operators and subspaces ----

    // star involution (c:d) -> (-c:d); squares to the identity
    const FpMatrix& star_matrix() const { ensure_analysis(); return star_; }

    // boundary map to the cusp divisor module (#cusps x dim, column per basis vector)
    const FpMatrix& boundary_matrix() const { ensure_analysis(); return boundary_; }

    std::size_t cusp_count() const { ensure_analysis(); return cusp_reps_.size(); }

    // kernel of the boundary map intersected with the +1 eigenspace of star;
    // has dimension g_0(N) = dim S_2(Gamma_0(N))
    const Subspace& cuspidal_plus() const { ensure_analysis(); return cuspidal_plus_; }

    // operator matrix (column convention) from per-generator column images
    FpMatrix operator_from_columns(const std::vector<std::vector<std::uint32_t>>& cols) const {
        FpMatrix m(p_, dim(), dim());
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (std::size_t i = 0; i < dim(); ++i) m.set_reduced(i, j, cols[j][i]);
        return m;
    }

private:
    struct GenRef {
        std::int32_t gen = -1;  // sigma-orbit generator id, or -1 if the class is zero
        bool negated = false;
    };

    void build_presentation();
    void build_lifts();
    void ensure_analysis() const { std::call_once(analysis_once_, [this] { build_analysis(); }); }
    void build_analysis() const;

    const std::uint32_t* expr_row(std::int32_t gen) const {
        return expr_.data() + static_cast<std::size_t>(expr_slot_[gen]) * dim();
    }

    std::uint32_t N_;
    std::uint32_t p_;
    P1Table p1_;

    std::vector<GenRef> gen_of_;        // P^1 index -> sigma generator reference
    std::vector<std::int32_t> slot_of_; // gen -> free coordinate slot, or -1 if pivot
    std::vector<std::int32_t> expr_slot_;  // gen -> row in expr_, or -1
    std::vector<std::uint32_t> expr_;   // dense rows, one per pivot generator
    std::vector<std::int32_t> free_of_; // free coordinate slot -> P^1 index
    std::vector<Mat22> lift_of_free_;

    mutable std::once_flag analysis_once_;
    mutable FpMatrix star_;
    mutable FpMatrix boundary_;
    mutable std::vector<std::pair<std::int64_t, std::int64_t>> cusp_reps_;
    mutable Subspace cuspidal_plus_;
};

namespace detail {

struct SparseRow {
    std::vector<std::pair<std::int32_t, std::uint32_t>> e;  // sorted by column
};

inline SparseRow axpy(const SparseRow& x, std::uint32_t f, const SparseRow& y, std::uint32_t p) {
    // x + f*y
    SparseRow out;
    out.e.reserve(x.e.size() + y.e.size());
    std::size_t i = 0, j = 0;
    while (i < x.e.size() || j < y.e.size()) {
        if (j == y.e.size() || (i < x.e.size() && x.e[i].first < y.e[j].first)) {
            out.e.push_back(x.e[i++]);
        } else if (i == x.e.size() || y.e[j].first < x.e[i].first) {
            std::uint32_t v = mod_mul(f, y.e[j].second, p);
            if (v) out.e.emplace_back(y.e[j].first, v);
            ++j;
        } else {
            std::uint32_t v = mod_add(x.e[i].second, mod_mul(f, y.e[j].second, p), p);
            if (v) out.e.emplace_back(x.e[i].first, v);
            ++i; ++j;
        }
    }
    return out;
}

}  // namespace detail

inline void ManinSpace::build_presentation() {
    const std::size_t n = p1_.size();
    const std::uint32_t p = p_;

    // 1. two-term relations: pair each symbol with its sigma image
    gen_of_.assign(n, GenRef{});
    std::vector<std::int32_t> gen_p1;  // generator id -> P^1 index
    std::vector<std::int8_t> state(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (state[i]) continue;
        auto [c, d] = p1_.rep(i);
        std::int32_t j = p1_.index(static_cast<std::int64_t>(d), -static_cast<std::int64_t>(c));
        if (j == static_cast<std::int32_t>(i)) {
            gen_of_[i] = GenRef{-1, false};  // 2 e = 0 and p is odd
            state[i] = 1;
            continue;
        }
        std::int32_t g = static_cast<std::int32_t>(gen_p1.size());
        gen_p1.push_back(static_cast<std::int32_t>(i));
        gen_of_[i] = GenRef{g, false};
        gen_of_[j] = GenRef{g, true};
        state[i] = state[j] = 1;
    }
    const std::size_t ngen = gen_p1.size();

    // 2. three-term relations expressed in sigma generators
    std::vector<detail::SparseRow> rows;
    std::vector<std::int8_t> seen(n, 0);
    std::vector<std::uint32_t> coeff_acc;
    for (std::size_t i = 0; i < n; ++i) {
        if (seen[i]) continue;
        auto [c0, d0] = p1_.rep(i);
        std::int64_t c = c0, d = d0;
        std::array<std::int32_t, 3> orbit;
        orbit[0] = static_cast<std::int32_t>(i);
        std::int32_t t1 = p1_.index(d, -c - d);
        std::int32_t t2 = p1_.index(-c - d, c);
        orbit[1] = t1;
        orbit[2] = t2;
        for (std::int32_t o : orbit) seen[o] = 1;
        std::vector<std::pair<std::int32_t, std::uint32_t>> terms;
        for (std::int32_t o : orbit) {
            const GenRef& g = gen_of_[o];
            if (g.gen < 0) continue;
            terms.emplace_back(g.gen, g.negated ? p - 1 : 1u);
        }
        std::sort(terms.begin(), terms.end());
        detail::SparseRow row;
        for (auto& [col, v] : terms) {
            if (!row.e.empty() && row.e.back().first == col)
                row.e.back().second = mod_add(row.e.back().second, v, p);
            else
                row.e.emplace_back(col, v);
        }
        row.e.erase(std::remove_if(row.e.begin(), row.e.end(), [](auto& t) { return t.second == 0; }),
                    row.e.end());
        if (!row.e.empty()) rows.push_back(std::move(row));
    }

    // 3. sparse echelon (pivot = smallest column)
    std::vector<std::int32_t> pivot_row_of(ngen, -1);
    std::vector<detail::SparseRow> pool;
    for (detail::SparseRow& r : rows) {
        detail::SparseRow cur = std::move(r);
        while (!cur.e.empty()) {
            std::int32_t c = cur.e.front().first;
            std::int32_t pr = pivot_row_of[c];
            if (pr < 0) {
                std::uint32_t inv = mod_inv(cur.e.front().second, p);
                if (inv != 1)
                    for (auto& t : cur.e) t.second = mod_mul(t.second, inv, p);
                pivot_row_of[c] = static_cast<std::int32_t>(pool.size());
                pool.push_back(std::move(cur));
                break;
            }
            std::uint32_t f = p - cur.e.front().second;  // eliminate the lead
            cur = detail::axpy(cur, f, pool[pr], p);
        }
    }

    // 4. free generators = non-pivot columns, in ascending order
    slot_of_.assign(ngen, -1);
    for (std::size_t g = 0; g < ngen; ++g)
        if (pivot_row_of[g] < 0) {
            slot_of_[g] = static_cast<std::int32_t>(free_of_.size());
            free_of_.push_back(gen_p1[g]);
        }
    const std::size_t m = free_of_.size();

    // 5. back-substitute pivot generators into dense expressions over the
    //    free coordinates (descending pivot order)
    expr_slot_.assign(ngen, -1);
    std::size_t npiv = ngen - m;
    expr_.assign(npiv * m, 0u);
    Barrett br(p);
    std::size_t next_expr = npiv;
    std::vector<std::uint64_t> acc(m);
    for (std::size_t gi = ngen; gi-- > 0;) {
        std::int32_t prow = pivot_row_of[gi];
        if (prow < 0) continue;
        expr_slot_[gi] = static_cast<std::int32_t>(--next_expr);
        std::uint32_t* out = expr_.data() + static_cast<std::size_t>(expr_slot_[gi]) * m;
        std::fill(acc.begin(), acc.end(), 0);
        const detail::SparseRow& row = pool[prow];
        for (std::size_t t = 1; t < row.e.size(); ++t) {  // skip the lead (= gi)
            auto [col, v] = row.e[t];
            std::uint32_t nv = p - v;  // e_piv = -sum(...)
            std::int32_t slot = slot_of_[col];
            if (slot >= 0) {
                acc[slot] += nv;
            } else {
                const std::uint32_t* sub = expr_.data() + static_cast<std::size_t>(expr_slot_[col]) * m;
                const std::uint64_t f = nv;
                for (std::size_t j = 0; j < m; ++j) acc[j] += f * sub[j];
            }
        }
        for (std::size_t j = 0; j < m; ++j) out[j] = br.reduce(acc[j]);
    }
}

inline void ManinSpace::build_lifts() {
    lift_of_free_.resize(free_of_.size());
    for (std::size_t k = 0; k < free_of_.size(); ++k) {
        auto [c0, d0] = p1_.rep(static_cast<std::size_t>(free_of_[k]));
        std::int64_t c = c0, d = d0;
        if (N_ == 1) { lift_of_free_[k] = {1, 0, 0, 1}; continue; }
        if (c == 0) { c = 0; d = 1; }
        else {
            while (gcd_i64(c, d) != 1) d += N_;
        }
        std::int64_t a, negb;
        std::int64_t g = xgcd(d, c, a, negb);
        if (g != 1) throw std::logic_error("lift: generator not coprime");
        lift_of_free_[k] = {a, -negb, c, d};  // a d - b c = 1
    }
}

// Gamma_0(N)-equivalence of cusps (in lowest terms, q >= 0, oo = (1,0)).
inline bool cusp_equivalent(std::uint32_t N, std::int64_t p1n, std::int64_t q1, std::int64_t p2n, std::int64_t q2) {
    auto inv_mod = [](std::int64_t a, std::int64_t m) -> std::int64_t {
        if (m == 0) return 1;
        if (m == 1) return 0;
        std::int64_t x, y;
        xgcd(((a % m) + m) % m, m, x, y);
        return ((x % m) + m) % m;
    };
    std::int64_t s1 = inv_mod(p1n, q1);
    std::int64_t s2 = inv_mod(p2n, q2);
    std::int64_t g = gcd_i64(q1 * q2, static_cast<std::int64_t>(N));
    if (g == 0) g = N;
    std::int64_t lhs = ((s1 * q2 - s2 * q1) % g + g) % g;
    return lhs == 0;
}

inline void ManinSpace::build_analysis() const {
    const std::size_t m = dim();
    const std::uint32_t p = p_;

    // star involution
    std::vector<std::vector<std::uint32_t>> cols(m);
    for (std::size_t k = 0; k < m; ++k) {
        auto [c, d] = rep_of_free(k);
        std::vector<std::uint64_t> acc(m, 0);
        class_add(acc.data(), p1_.index(-static_cast<std::int64_t>(c), d), 1u);
        cols[k] = reduce(acc);
    }
    star_ = operator_from_columns(cols);

    // boundary map: {g0, goo} -> [a/c] - [b/d]
    auto canon = [](std::int64_t a, std::int64_t q) {
        if (q < 0) { a = -a; q = -q; }
        if (q == 0) a = 1;
        return std::make_pair(a, q);
    };
    auto cusp_class = [&](std::int64_t a, std::int64_t q) -> std::size_t {
        auto [cp, cq] = canon(a, q);
        for (std::size_t i = 0; i < cusp_reps_.size(); ++i)
            if (cusp_equivalent(N_, cp, cq, cusp_reps_[i].first, cusp_reps_[i].second)) return i;
        cusp_reps_.emplace_back(cp, cq);
        return cusp_reps_.size() - 1;
    };
    std::vector<std::pair<std::size_t, std::size_t>> bcols(m);
    for (std::size_t k = 0; k < m; ++k) {
        const Mat22& g = lift_of_free_[k];
        bcols[k] = {cusp_class(g[0], g[2]), cusp_class(g[1], g[3])};
    }
    boundary_ = FpMatrix(p, cusp_reps_.size(), m);
    for (std::size_t k = 0; k < m; ++k) {
        auto [i1, i2] = bcols[k];
        boundary_.set(i1, k, boundary_(i1, k) + 1);
        boundary_.set(i2, k, static_cast<std::int64_t>(boundary_(i2, k)) - 1);
    }

    // cuspidal plus subspace: kernel of [boundary; star - 1]
    const std::size_t C = cusp_reps_.size();
    FpMatrix stacked(p, C + m, m);
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < m; ++j) stacked.set_reduced(i, j, boundary_(i, j));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            std::uint32_t v = star_(i, j);
            if (i == j) v = mod_sub(v, 1u, p);
            stacked.set_reduced(C + i, j, v);
        }
    cuspidal_plus_ = kernel(stacked);
}

// Free functions mirroring the operation names used elsewhere.
inline Subspace cuspidal_plus(const ManinSpace& space) { return space.cuspidal_plus(); }

}  // namespace lmcount
