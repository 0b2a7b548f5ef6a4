#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "mostree/bitvec.hpp"

namespace mostree {

struct FieldMismatch : std::runtime_error {
    FieldMismatch() : std::runtime_error("gf2: operands belong to different field contexts") {}
};

// F_{2^ell} = F_2[X]/f(X) for a monic irreducible f of degree ell.
// For a fixed ell the modulus is found deterministically (same polynomial on
// every run and every party), lowest Hamming weight first: trinomials, then
// pentanomials, then a general ascending search.
class FieldCtx {
public:
    size_t ell() const { return ell_; }
    const BitVec& modulus() const { return modulus_; } // len ell+1, degree ell

    // Cached deterministic context for a bit width. Widths below 40 bits are
    // too small for the statistical checks that ride on this field; they are
    // allowed for tests but complain on stderr once.
    static std::shared_ptr<const FieldCtx> get(size_t ell);

    // Context with an explicit modulus (validated irreducible).
    static std::shared_ptr<const FieldCtx> with_modulus(const BitVec& f);

    // a*b mod f for ell-bit operands.
    BitVec mul(const BitVec& a, const BitVec& b) const;

    BitVec one() const { return BitVec::from_u64(1, ell_); }

private:
    FieldCtx(size_t ell, BitVec modulus);

    size_t ell_;
    BitVec modulus_;
    std::vector<uint64_t> low_words_; // f - X^ell, packed for reduction
};

using FieldPtr = std::shared_ptr<const FieldCtx>;

// Element of F_{2^ell}; same bit layout as a BitVec of length ell.
class GfElement {
public:
    GfElement() = default;
    GfElement(BitVec v, FieldPtr f) : v_(std::move(v)), f_(std::move(f)) {
        if (v_.len() != f_->ell()) throw std::invalid_argument("gf2: element width != field width");
    }

    const BitVec& bits() const { return v_; }
    const FieldPtr& field() const { return f_; }
    bool is_zero() const { return v_.is_zero(); }

    friend GfElement operator+(const GfElement& a, const GfElement& b) {
        a.check(b);
        return GfElement(a.v_ ^ b.v_, a.f_);
    }
    friend GfElement operator*(const GfElement& a, const GfElement& b) {
        a.check(b);
        return GfElement(a.f_->mul(a.v_, b.v_), a.f_);
    }
    bool operator==(const GfElement& o) const { return v_ == o.v_ && f_ == o.f_; }

private:
    void check(const GfElement& o) const {
        if (f_ != o.f_) throw FieldMismatch();
    }

    BitVec v_;
    FieldPtr f_;
};

// Polynomial helpers over F_2[X] (coefficients as BitVec, bit i = X^i).
namespace poly {
int degree(const BitVec& p);                    // -1 for zero
BitVec mod(const BitVec& a, const BitVec& f);
BitVec gcd(BitVec a, BitVec b);
BitVec mulmod(const BitVec& a, const BitVec& b, const BitVec& f);
bool is_irreducible(const BitVec& f);
}

// Deterministic search for the modulus used by FieldCtx::get.
// Returns a polynomial of degree ell (len ell+1).
BitVec find_irreducible(size_t ell);

} // namespace mostree
