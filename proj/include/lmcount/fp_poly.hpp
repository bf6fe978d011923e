#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "lmcount/fp.hpp"

namespace lmcount {

// Dense polynomial over F_p, coefficients lowest degree first.
// The zero polynomial has an empty coefficient vector and degree() == -1.
class FpPoly {
public:
    explicit FpPoly(std::uint64_t p) : p_(checked_modulus(p)) {}

    FpPoly(std::uint64_t p, std::vector<std::int64_t> coeffs) : p_(checked_modulus(p)) {
        coeffs_.reserve(coeffs.size());
        for (std::int64_t c : coeffs) coeffs_.push_back(mod_reduce(c, p_));
        trim();
    }

    static FpPoly from_residues(std::uint32_t p, std::vector<std::uint32_t> coeffs) {
        FpPoly f(p);
        f.coeffs_ = std::move(coeffs);
        f.trim();
        return f;
    }

    static FpPoly x_minus(FpElement a) {
        FpPoly f(a.p);
        f.coeffs_ = {a.value == 0 ? 0u : a.p - a.value, 1u};
        return f;
    }

    static FpPoly one(std::uint32_t p) { return FpPoly(p, {1}); }

    std::uint32_t modulus() const { return p_; }
    const std::vector<std::uint32_t>& coefficients() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }

    // -1 encodes degree(0) = -infinity
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

    std::uint32_t coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0u; }

    bool is_monic() const { return !coeffs_.empty() && coeffs_.back() == 1u; }

    FpElement eval(FpElement a) const {
        require_same_modulus(p_, a.p);
        std::uint64_t acc = 0;
        for (std::size_t i = coeffs_.size(); i-- > 0;)
            acc = (acc * a.value + coeffs_[i]) % p_;
        return {static_cast<std::uint32_t>(acc), p_};
    }

    FpPoly derivative() const {
        FpPoly d(p_);
        for (std::size_t i = 1; i < coeffs_.size(); ++i)
            d.coeffs_.push_back(static_cast<std::uint32_t>(static_cast<std::uint64_t>(coeffs_[i]) * (i % p_) % p_));
        d.trim();
        return d;
    }

    friend FpPoly operator*(const FpPoly& a, const FpPoly& b) {
        require_same_modulus(a.p_, b.p_);
        if (a.is_zero() || b.is_zero()) return FpPoly(a.p_);
        FpPoly c(a.p_);
        c.coeffs_.assign(a.coeffs_.size() + b.coeffs_.size() - 1, 0u);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (a.coeffs_[i] == 0) continue;
            std::uint64_t ai = a.coeffs_[i];
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
                c.coeffs_[i + j] = static_cast<std::uint32_t>((c.coeffs_[i + j] + ai * b.coeffs_[j]) % a.p_);
        }
        c.trim();
        return c;
    }

    friend FpPoly operator+(const FpPoly& a, const FpPoly& b) {
        require_same_modulus(a.p_, b.p_);
        FpPoly c(a.p_);
        c.coeffs_.assign(std::max(a.coeffs_.size(), b.coeffs_.size()), 0u);
        for (std::size_t i = 0; i < c.coeffs_.size(); ++i)
            c.coeffs_[i] = mod_add(a.coeff(i), b.coeff(i), a.p_);
        c.trim();
        return c;
    }

    friend bool operator==(const FpPoly& a, const FpPoly& b) {
        return a.p_ == b.p_ && a.coeffs_ == b.coeffs_;
    }

    // Synthetic division by (x - a).  Returns quotient; the remainder f(a)
    // is left for the caller to test.
    FpPoly divide_linear(FpElement a) const {
        require_same_modulus(p_, a.p);
        if (is_zero()) return FpPoly(p_);
        FpPoly q(p_);
        q.coeffs_.assign(coeffs_.size() - 1, 0u);
        std::uint64_t carry = 0;
        for (std::size_t i = coeffs_.size(); i-- > 1;) {
            carry = (carry * a.value + coeffs_[i]) % p_;
            q.coeffs_[i - 1] = static_cast<std::uint32_t>(carry);
        }
        q.trim();
        return q;
    }

    // Divisibility test: does g divide f?  (general long division)
    bool divisible_by(const FpPoly& g) const {
        require_same_modulus(p_, g.p_);
        if (g.is_zero()) throw std::invalid_argument("division by zero polynomial");
        if (is_zero()) return true;
        std::vector<std::uint32_t> r = coeffs_;
        std::uint32_t lead_inv = mod_inv(g.coeffs_.back(), p_);
        while (r.size() >= g.coeffs_.size()) {
            std::uint32_t f = mod_mul(r.back(), lead_inv, p_);
            std::size_t off = r.size() - g.coeffs_.size();
            for (std::size_t i = 0; i + 1 < g.coeffs_.size(); ++i)
                r[off + i] = mod_sub(r[off + i], mod_mul(f, g.coeffs_[i], p_), p_);
            r.pop_back();  // leading term cancels exactly
            while (!r.empty() && r.back() == 0) r.pop_back();
        }
        return r.empty();
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
    }

    std::uint32_t p_;
    std::vector<std::uint32_t> coeffs_;
};

inline FpElement poly_eval(const FpPoly& f, FpElement a) { return f.eval(a); }

// Roots a with f(a) = 0 and f'(a) != 0, i.e. multiplicity exactly one.
inline std::vector<std::uint32_t> simple_roots(const FpPoly& f) {
    if (f.is_zero()) throw std::invalid_argument("simple_roots: zero polynomial");
    const std::uint32_t p = f.modulus();
    FpPoly d = f.derivative();
    std::vector<std::uint32_t> roots;
    for (std::uint32_t a = 0; a < p; ++a) {
        FpElement x{static_cast<std::int64_t>(a), p};
        if (f.eval(x).value == 0 && d.eval(x).value != 0) roots.push_back(a);
    }
    return roots;
}

// Exact multiplicity of every F_p-rational root, found by repeated division
// by (x - a).  Trial division stays correct when the multiplicity reaches p
// (where derivative-based tests degenerate).
inline std::map<std::uint32_t, int> root_multiplicities(const FpPoly& f) {
    if (f.is_zero()) throw std::invalid_argument("root_multiplicities: zero polynomial");
    const std::uint32_t p = f.modulus();
    std::map<std::uint32_t, int> mult;
    for (std::uint32_t a = 0; a < p; ++a) {
        FpElement x{static_cast<std::int64_t>(a), p};
        if (f.eval(x).value != 0) continue;
        FpPoly g = f;
        int m = 0;
        while (!g.is_zero() && g.eval(x).value == 0) {
            g = g.divide_linear(x);
            ++m;
        }
        mult[a] = m;
    }
    return mult;
}

}  // namespace lmcount
