#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <utility>
#include <vector>

#include "lmcount/fp.hpp"
#include "lmcount/fp_poly.hpp"

namespace lmcount {

// Word-sized Barrett reducer; avoids hardware division in hot loops.
struct Barrett {
    std::uint32_t p;
    std::uint64_t magic;

    explicit Barrett(std::uint32_t p_) : p(p_), magic(~0ULL / p_) {}

    std::uint32_t reduce(std::uint64_t x) const {
        std::uint64_t q = static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * magic) >> 64);
        std::uint64_t r = x - q * p;
        while (r >= p) r -= p;
        return static_cast<std::uint32_t>(r);
    }

    std::uint32_t mulmod(std::uint32_t a, std::uint32_t b) const {
        return reduce(static_cast<std::uint64_t>(a) * b);
    }
};

// Dense matrix over F_p.  Entries are stored reduced in [0, p); row-major.
class FpMatrix {
public:
    FpMatrix() : p_(2), rows_(0), cols_(0) {}

    FpMatrix(std::uint64_t p, std::size_t rows, std::size_t cols)
        : p_(checked_modulus(p)), rows_(rows), cols_(cols), a_(rows * cols, 0u) {}

    FpMatrix(std::uint64_t p, std::size_t rows, std::size_t cols, const std::vector<std::int64_t>& entries)
        : FpMatrix(p, rows, cols) {
        if (entries.size() != rows * cols)
            throw std::invalid_argument("entry count must equal rows*cols");
        for (std::size_t i = 0; i < entries.size(); ++i) a_[i] = mod_reduce(entries[i], p_);
    }

    static FpMatrix identity(std::uint64_t p, std::size_t n) {
        FpMatrix m(p, n, n);
        for (std::size_t i = 0; i < n; ++i) m.a_[i * n + i] = 1u;
        return m;
    }

    std::uint32_t modulus() const { return p_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::uint32_t operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    void set(std::size_t i, std::size_t j, std::int64_t v) { a_[i * cols_ + j] = mod_reduce(v, p_); }
    void set_reduced(std::size_t i, std::size_t j, std::uint32_t v) { a_[i * cols_ + j] = v; }

    std::span<const std::uint32_t> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }
    std::span<std::uint32_t> row(std::size_t i) { return {a_.data() + i * cols_, cols_}; }

    bool is_zero() const {
        for (std::uint32_t v : a_)
            if (v) return false;
        return true;
    }

    bool is_square() const { return rows_ == cols_; }

    friend bool operator==(const FpMatrix& x, const FpMatrix& y) {
        return x.p_ == y.p_ && x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
    }

    FpMatrix transpose() const {
        FpMatrix t(p_, cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t.a_[j * rows_ + i] = a_[i * cols_ + j];
        return t;
    }

    friend FpMatrix operator+(const FpMatrix& x, const FpMatrix& y) {
        x.require_same_shape(y);
        FpMatrix z(x.p_, x.rows_, x.cols_);
        for (std::size_t i = 0; i < x.a_.size(); ++i) z.a_[i] = mod_add(x.a_[i], y.a_[i], x.p_);
        return z;
    }

    friend FpMatrix operator-(const FpMatrix& x, const FpMatrix& y) {
        x.require_same_shape(y);
        FpMatrix z(x.p_, x.rows_, x.cols_);
        for (std::size_t i = 0; i < x.a_.size(); ++i) z.a_[i] = mod_sub(x.a_[i], y.a_[i], x.p_);
        return z;
    }

    friend FpMatrix operator*(const FpMatrix& x, const FpMatrix& y) {
        require_same_modulus(x.p_, y.p_);
        if (x.cols_ != y.rows_) throw std::invalid_argument("matrix product shape mismatch");
        FpMatrix z(x.p_, x.rows_, y.cols_);
        if (x.rows_ == 0 || y.cols_ == 0 || x.cols_ == 0) return z;
        const std::uint64_t limit = max_accum_terms(x.p_);
        Barrett br(x.p_);
        std::vector<std::uint64_t> acc(y.cols_);
        for (std::size_t i = 0; i < x.rows_; ++i) {
            std::memset(acc.data(), 0, acc.size() * sizeof(std::uint64_t));
            std::uint64_t terms = 0;
            for (std::size_t k = 0; k < x.cols_; ++k) {
                std::uint32_t f = x.a_[i * x.cols_ + k];
                if (!f) continue;
                const std::uint32_t* brow = y.a_.data() + k * y.cols_;
                for (std::size_t j = 0; j < y.cols_; ++j)
                    acc[j] += static_cast<std::uint64_t>(f) * brow[j];
                if (++terms >= limit) {
                    for (auto& v : acc) v = br.reduce(v);
                    terms = 1;
                }
            }
            std::uint32_t* zrow = z.a_.data() + i * z.cols_;
            for (std::size_t j = 0; j < y.cols_; ++j) zrow[j] = br.reduce(acc[j]);
        }
        return z;
    }

    // Reduced row echelon form; returns pivots column indices.
    std::pair<FpMatrix, std::vector<std::size_t>> rref() const {
        FpMatrix work = *this;
        std::vector<std::size_t> pivots = work.rref_in_place();
        return {std::move(work), std::move(pivots)};
    }

    std::size_t rank() const { return rref().second.size(); }

    FpElement det() const;
    FpPoly charpoly() const;

private:
    void require_same_shape(const FpMatrix& o) const {
        require_same_modulus(p_, o.p_);
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
    }

    static std::uint64_t max_accum_terms(std::uint32_t p) {
        std::uint64_t sq = static_cast<std::uint64_t>(p - 1) * (p - 1);
        if (sq == 0) return ~0ULL;
        std::uint64_t t = ~0ULL / sq;
        return t < 2 ? 2 : t;
    }

    // In-place RREF using per-row 64-bit accumulation with deferred reduction.
    std::vector<std::size_t> rref_in_place();

    friend class GaussWork;

    std::uint32_t p_;
    std::size_t rows_, cols_;
    std::vector<std::uint32_t> a_;
};

// Shared elimination engine over 64-bit working rows.
class GaussWork {
public:
    GaussWork(const FpMatrix& m)
        : p_(m.modulus()), br_(m.modulus()), rows_(m.rows()), cols_(m.cols()),
          limit_(max_terms(m.modulus())), w_(m.rows() * m.cols()), dirt_(m.rows(), 0) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] = m.a_[i];
    }

    GaussWork(std::uint32_t p, std::size_t rows, std::size_t cols)
        : p_(p), br_(p), rows_(rows), cols_(cols), limit_(max_terms(p)), w_(rows * cols, 0), dirt_(rows, 0) {}

    std::uint64_t* row(std::size_t i) { return w_.data() + i * cols_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::uint32_t entry_mod(std::size_t i, std::size_t j) const { return br_.reduce(w_[i * cols_ + j]); }

    void reduce_row(std::size_t i) {
        std::uint64_t* r = row(i);
        for (std::size_t j = 0; j < cols_; ++j) r[j] = br_.reduce(r[j]);
        dirt_[i] = 0;
    }

    void scale_row(std::size_t i, std::uint32_t f) {
        reduce_row(i);
        std::uint64_t* r = row(i);
        for (std::size_t j = 0; j < cols_; ++j) r[j] = br_.reduce(r[j] * f);
    }

    void swap_rows(std::size_t i, std::size_t k) {
        if (i == k) return;
        for (std::size_t j = 0; j < cols_; ++j) std::swap(w_[i * cols_ + j], w_[k * cols_ + j]);
        std::swap(dirt_[i], dirt_[k]);
    }

    // row_i += f * row_k, where row_k must be reduced (entries < p).
    void addmul_row(std::size_t i, std::size_t k, std::uint32_t f, std::size_t from_col = 0) {
        if (!f) return;
        if (dirt_[i] + 1 >= limit_) reduce_row(i);
        const std::uint64_t* src = row(k);
        std::uint64_t* dst = row(i);
        std::uint64_t ff = f;
        for (std::size_t j = from_col; j < cols_; ++j) dst[j] += ff * src[j];
        ++dirt_[i];
    }

    // Forward + backward elimination to RREF.  Returns pivot columns.
    std::vector<std::size_t> to_rref() {
        std::vector<std::size_t> pivots;
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
            std::size_t pr = rows_;
            for (std::size_t i = r; i < rows_; ++i) {
                if (entry_mod(i, c) != 0) { pr = i; break; }
            }
            if (pr == rows_) continue;
            swap_rows(r, pr);
            reduce_row(r);
            std::uint32_t lead = static_cast<std::uint32_t>(w_[r * cols_ + c]);
            if (lead != 1) scale_row(r, mod_inv(lead, p_));
            for (std::size_t i = 0; i < rows_; ++i) {
                if (i == r) continue;
                std::uint32_t v = entry_mod(i, c);
                if (v) addmul_row(i, r, p_ - v, c);
            }
            pivots.push_back(c);
            ++r;
        }
        for (std::size_t i = 0; i < rows_; ++i) reduce_row(i);
        return pivots;
    }

    FpMatrix extract(std::size_t nrows) const {
        FpMatrix m(p_, nrows, cols_);
        for (std::size_t i = 0; i < nrows; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m.set_reduced(i, j, br_.reduce(w_[i * cols_ + j]));
        return m;
    }

private:
    static std::uint64_t max_terms(std::uint32_t p) {
        std::uint64_t sq = static_cast<std::uint64_t>(p - 1) * (p - 1);
        if (sq == 0) return ~0ULL;
        std::uint64_t t = ~0ULL / sq;
        return t < 2 ? 2 : t;
    }

    std::uint32_t p_;
    Barrett br_;
    std::size_t rows_, cols_;
    std::uint64_t limit_;
    std::vector<std::uint64_t> w_;
    std::vector<std::uint32_t> dirt_;
};

inline std::vector<std::size_t> FpMatrix::rref_in_place() {
    GaussWork g(*this);
    std::vector<std::size_t> pivots = g.to_rref();
    FpMatrix reduced = g.extract(rows_);
    a_ = std::move(reduced.a_);
    return pivots;
}

inline FpElement FpMatrix::det() const {
    if (!is_square()) throw std::invalid_argument("det: non-square input");
    if (rows_ == 0) return {1, p_};
    GaussWork g(*this);
    std::uint32_t d = 1;
    bool flip = false;
    std::size_t n = rows_;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pr = n;
        for (std::size_t i = c; i < n; ++i)
            if (g.entry_mod(i, c) != 0) { pr = i; break; }
        if (pr == n) return {0, p_};
        if (pr != c) { g.swap_rows(c, pr); flip = !flip; }
        g.reduce_row(c);
        std::uint32_t lead = g.entry_mod(c, c);
        d = mod_mul(d, lead, p_);
        std::uint32_t inv = mod_inv(lead, p_);
        g.scale_row(c, inv);
        for (std::size_t i = c + 1; i < n; ++i) {
            std::uint32_t v = g.entry_mod(i, c);
            if (v) g.addmul_row(i, c, p_ - v, c);
        }
    }
    if (flip) d = d ? p_ - d : 0;
    return {d, p_};
}

// Characteristic polynomial via Hessenberg reduction (cubic, no coefficient
// blowup over a field).  Returns a monic polynomial of degree rows().
inline FpPoly FpMatrix::charpoly() const {
    if (!is_square()) throw std::invalid_argument("charpoly: non-square input");
    const std::size_t n = rows_;
    const std::uint32_t p = p_;
    if (n == 0) return FpPoly::one(p);
    Barrett br(p);
    std::vector<std::uint32_t> h(a_);
    auto H = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return h[i * n + j]; };

    for (std::size_t m = 0; m + 2 < n; ++m) {
        std::size_t piv = n;
        for (std::size_t i = m + 1; i < n; ++i)
            if (H(i, m)) { piv = i; break; }
        if (piv == n) continue;
        if (piv != m + 1) {
            for (std::size_t j = 0; j < n; ++j) std::swap(H(piv, j), H(m + 1, j));
            for (std::size_t i = 0; i < n; ++i) std::swap(H(i, piv), H(i, m + 1));
        }
        std::uint32_t tinv = mod_inv(H(m + 1, m), p);
        for (std::size_t i = m + 2; i < n; ++i) {
            if (!H(i, m)) continue;
            std::uint32_t u = br.mulmod(H(i, m), tinv);
            std::uint32_t nu = p - u;
            // row_i -= u * row_{m+1}; columns < m are already zero in both rows
            std::uint64_t nuu = nu;
            for (std::size_t j = m; j < n; ++j)
                H(i, j) = br.reduce(H(i, j) + nuu * H(m + 1, j));
            // col_{m+1} += u * col_i  (similarity transform)
            std::uint64_t uu = u;
            for (std::size_t r = 0; r < n; ++r)
                H(r, m + 1) = br.reduce(H(r, m + 1) + uu * H(r, i));
        }
    }

    // Hessenberg characteristic polynomial recurrence
    std::vector<std::vector<std::uint32_t>> ps(n + 1);
    ps[0] = {1u};
    for (std::size_t m = 1; m <= n; ++m) {
        const std::vector<std::uint32_t>& prev = ps[m - 1];
        std::vector<std::uint32_t> cur(m + 1, 0u);
        std::uint32_t diag = H(m - 1, m - 1);
        for (std::size_t t = 0; t < prev.size(); ++t) {
            cur[t + 1] = mod_add(cur[t + 1], prev[t], p);
            if (diag) cur[t] = mod_sub(cur[t], br.mulmod(diag, prev[t]), p);
        }
        std::uint32_t prod = 1;
        for (std::size_t i = 1; i < m; ++i) {
            prod = br.mulmod(prod, H(m - i, m - i - 1));
            if (!prod) break;
            std::uint32_t coef = br.mulmod(H(m - 1 - i, m - 1), prod);
            if (!coef) continue;
            const std::vector<std::uint32_t>& q = ps[m - 1 - i];
            for (std::size_t t = 0; t < q.size(); ++t)
                cur[t] = mod_sub(cur[t], br.mulmod(coef, q[t]), p);
        }
        ps[m] = std::move(cur);
    }
    return FpPoly::from_residues(p, std::move(ps[n]));
}

inline FpPoly charpoly(const FpMatrix& m) { return m.charpoly(); }

// Row space presented by a reduced-echelon basis.
struct Subspace {
    std::size_t ambient = 0;
    FpMatrix basis;                    // dim x ambient, RREF
    std::vector<std::size_t> pivots;   // pivot columns, one per basis row

    std::size_t dim() const { return basis.rows(); }

    static Subspace full(std::uint32_t p, std::size_t n) {
        Subspace s;
        s.ambient = n;
        s.basis = FpMatrix::identity(p, n);
        s.pivots.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.pivots[i] = i;
        return s;
    }

    static Subspace from_rows(const FpMatrix& rows) {
        auto [r, piv] = rows.rref();
        Subspace s;
        s.ambient = rows.cols();
        s.basis = FpMatrix(rows.modulus(), piv.size(), rows.cols());
        for (std::size_t i = 0; i < piv.size(); ++i)
            for (std::size_t j = 0; j < rows.cols(); ++j) s.basis.set_reduced(i, j, r(i, j));
        s.pivots = std::move(piv);
        return s;
    }

    // Coordinates of v in this basis, or throws if v is outside the space.
    std::vector<std::uint32_t> coordinates(std::span<const std::uint32_t> v) const {
        const std::uint32_t p = basis.modulus();
        if (v.size() != ambient) throw std::invalid_argument("coordinates: wrong length");
        std::vector<std::uint32_t> c(dim());
        for (std::size_t i = 0; i < dim(); ++i) c[i] = v[pivots[i]];
        Barrett br(p);
        for (std::size_t j = 0; j < ambient; ++j) {
            std::uint64_t acc = 0;
            for (std::size_t i = 0; i < dim(); ++i) acc += static_cast<std::uint64_t>(c[i]) * basis(i, j);
            if (br.reduce(acc) != v[j]) throw std::invalid_argument("vector not contained in subspace");
        }
        return c;
    }
};

// Right kernel {x : M x = 0}, returned as a subspace of F_p^{cols}.
inline Subspace kernel(const FpMatrix& m) {
    auto [r, piv] = m.rref();
    const std::uint32_t p = m.modulus();
    const std::size_t n = m.cols();
    std::vector<bool> is_piv(n, false);
    for (std::size_t c : piv) is_piv[c] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < n; ++c)
        if (!is_piv[c]) free_cols.push_back(c);
    FpMatrix basis(p, free_cols.size(), n);
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
        std::size_t f = free_cols[k];
        basis.set_reduced(k, f, 1u);
        for (std::size_t i = 0; i < piv.size(); ++i) {
            std::uint32_t v = r(i, f);
            basis.set_reduced(k, piv[i], v ? p - v : 0u);
        }
    }
    return Subspace::from_rows(basis);
}

// Intersection of two row spaces (Zassenhaus).
inline Subspace intersect(const Subspace& x, const Subspace& y) {
    if (x.ambient != y.ambient) throw std::invalid_argument("intersect: ambient dimension mismatch");
    const std::uint32_t p = x.basis.modulus();
    require_same_modulus(p, y.basis.modulus());
    const std::size_t n = x.ambient;
    FpMatrix block(p, x.dim() + y.dim(), 2 * n);
    for (std::size_t i = 0; i < x.dim(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            block.set_reduced(i, j, x.basis(i, j));
            block.set_reduced(i, n + j, x.basis(i, j));
        }
    for (std::size_t i = 0; i < y.dim(); ++i)
        for (std::size_t j = 0; j < n; ++j) block.set_reduced(x.dim() + i, j, y.basis(i, j));
    auto [r, piv] = block.rref();
    FpMatrix rows(p, 0, n);
    std::vector<std::vector<std::uint32_t>> keep;
    for (std::size_t i = 0; i < piv.size(); ++i) {
        if (piv[i] < n) continue;  // rows pivoting in the left block span the sum
        std::vector<std::uint32_t> v(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = r(i, n + j);
        keep.push_back(std::move(v));
    }
    FpMatrix mat(p, keep.size(), n);
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) mat.set_reduced(i, j, keep[i][j]);
    return Subspace::from_rows(mat);
}

// Matrix of the operator M (column convention: image of e_j is M column j)
// restricted to an M-invariant subspace V, in V's basis coordinates.
// Throws if MV is not contained in V.
inline FpMatrix restrict_operator(const FpMatrix& m, const Subspace& v) {
    if (!m.is_square() || m.cols() != v.ambient)
        throw std::invalid_argument("restrict: operator/subspace shape mismatch");
    const std::uint32_t p = m.modulus();
    const std::size_t k = v.dim();
    // images of basis vectors: rows of (V * M^T)
    FpMatrix imgs = v.basis * m.transpose();
    FpMatrix res(p, k, k);
    for (std::size_t j = 0; j < k; ++j) {
        // coordinates of image of basis vector j
        for (std::size_t i = 0; i < k; ++i) res.set_reduced(i, j, imgs(j, v.pivots[i]));
    }
    if (!(res.transpose() * v.basis == imgs))
        throw std::invalid_argument("restrict: subspace is not invariant under the operator");
    return res;
}

}  // namespace lmcount
