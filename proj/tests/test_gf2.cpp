#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mostree/gf2.hpp"
#include "mostree/prf.hpp"
#include "oracles.hpp"

using namespace mostree;

TEST_CASE("bitvec basics") {
    BitVec a = BitVec::from_u64(0b1011, 8);
    CHECK(a.bit(0));
    CHECK(a.bit(1));
    CHECK(!a.bit(2));
    CHECK(a.bit(3));
    CHECK(a.to_u64() == 0b1011);
    BitVec b = BitVec::from_u64(0b0110, 8);
    CHECK((a ^ b).to_u64() == 0b1101);
    CHECK((a & b).to_u64() == 0b0010);

    BitVec wide(130);
    wide.set_bit(129, true);
    wide.set_bit(3, true);
    CHECK(wide.slice(120, 10).bit(9));
    CHECK(wide.popcount() == 2);
    BitVec pieces = BitVec::concat(a, b);
    CHECK(pieces.len() == 16);
    CHECK(pieces.slice(8, 8) == b);

    BitVec fan = BitVec::fan_each(BitVec::from_u64(0b10, 2), 3);
    CHECK(fan.to_u64() == 0b111000);

    BitVec v = BitVec::from_u64(0b0100, 4); // set at index 2
    BitVec u = v.xor_permute(3);            // u[j] = v[j^3]; v[2]=1 -> u[1]=1
    CHECK(u.to_u64() == 0b0010);
}

TEST_CASE("bitvec round trips through bytes") {
    Rng rng(7);
    for (size_t len : {1u, 7u, 64u, 65u, 130u, 1040u}) {
        BitVec v = rng.bits(len);
        auto bytes = v.to_bytes();
        CHECK(BitVec::from_bytes(bytes, len) == v);
    }
}

TEST_CASE("find_irreducible matches naive oracle for small degrees") {
    for (size_t ell = 2; ell <= 16; ell++) {
        BitVec f = find_irreducible(ell);
        CHECK(oracle::poly_deg(f) == (int)ell);
        CHECK(oracle::is_irreducible_naive(f));
        // first hit of the deterministic order: no smaller-weight/earlier poly
        // of the same search order is irreducible
        size_t w = f.popcount();
        CHECK((w == 3 || w == 5));
    }
    CHECK(find_irreducible(2).to_u64() == 0b111); // X^2+X+1, unique
}

TEST_CASE("field context is deterministic and validated") {
    auto f1 = FieldCtx::get(16);
    auto f2 = FieldCtx::get(16);
    CHECK(f1.get() == f2.get());
    CHECK(f1->modulus() == find_irreducible(16));
    CHECK_THROWS(FieldCtx::with_modulus(BitVec::from_u64(0b10110, 5))); // reducible? degree-4 X^4+X^2+X
}

TEST_CASE("gf_mul against brute-force oracle, AES field") {
    // f(X) = X^8+X^4+X^3+X+1
    BitVec f = BitVec::from_u64(0x11B, 9);
    auto ctx = FieldCtx::with_modulus(f);
    BitVec a = BitVec::from_u64(0x53, 8), b = BitVec::from_u64(0xCA, 8);
    BitVec prod = ctx->mul(a, b);
    CHECK(prod == oracle::gf_mul(a, b, f));
    CHECK(prod.to_u64() == 0x01); // 0x53 and 0xCA are inverses in the AES field

    Rng rng(3);
    for (int i = 0; i < 200; i++) {
        BitVec x = rng.bits(8), y = rng.bits(8);
        CHECK(ctx->mul(x, y) == oracle::gf_mul(x, y, f));
    }
}

TEST_CASE("gf_mul identity and absorbing element") {
    Rng rng(11);
    for (size_t ell : {8u, 16u, 64u, 1040u}) {
        auto ctx = FieldCtx::get(ell);
        BitVec one = ctx->one(), zero(ell);
        for (int i = 0; i < 8; i++) {
            BitVec a = rng.bits(ell);
            CHECK(ctx->mul(a, one) == a);
            CHECK(ctx->mul(a, zero) == zero);
        }
    }
}

TEST_CASE("gf_mul against oracle at protocol widths") {
    Rng rng(5);
    for (size_t ell : {16u, 80u, 263u}) {
        auto ctx = FieldCtx::get(ell);
        for (int i = 0; i < 50; i++) {
            BitVec x = rng.bits(ell), y = rng.bits(ell);
            CHECK(ctx->mul(x, y) == oracle::gf_mul(x, y, ctx->modulus()));
        }
    }
}

TEST_CASE("field axioms on random samples") {
    Rng rng(13);
    for (size_t ell : {8u, 16u, 64u, 1040u}) {
        auto ctx = FieldCtx::get(ell);
        int iters = ell > 256 ? 200 : 10000;
        for (int i = 0; i < iters; i++) {
            BitVec a = rng.bits(ell), b = rng.bits(ell), c = rng.bits(ell);
            CHECK(ctx->mul(a ^ b, c) == (ctx->mul(a, c) ^ ctx->mul(b, c)));
            CHECK(ctx->mul(a, b) == ctx->mul(b, a));
            CHECK(ctx->mul(ctx->mul(a, b), c) == ctx->mul(a, ctx->mul(b, c)));
        }
    }
}

TEST_CASE("constructed moduli pass gcd irreducibility probes") {
    for (size_t ell : {8u, 16u, 64u, 80u, 263u, 1040u}) {
        auto ctx = FieldCtx::get(ell);
        CHECK(poly::is_irreducible(ctx->modulus()));
    }
}

TEST_CASE("GfElement wrapper enforces context") {
    auto f8 = FieldCtx::get(8);
    auto faes = FieldCtx::with_modulus(BitVec::from_u64(0x11B, 9));
    GfElement a(BitVec::from_u64(0x53, 8), faes);
    GfElement b(BitVec::from_u64(0xCA, 8), faes);
    CHECK((a * b).bits().to_u64() == 0x01);
    GfElement c(BitVec::from_u64(3, 8), f8);
    CHECK_THROWS_AS((void)(a * c), FieldMismatch);
    // reinterpretation round trip: bits in = bits out
    CHECK(GfElement(a.bits(), faes).bits() == a.bits());
}
