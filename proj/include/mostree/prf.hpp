#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mostree/bitvec.hpp"

namespace mostree {

using Key128 = std::array<uint8_t, 16>;
using Digest256 = std::array<uint8_t, 32>;

// AES-128 based PRF with counter-mode expansion: output block j of a query is
// AES_k(tweak || counter || j). One instance per key; not thread-safe.
class Prf {
public:
    explicit Prf(const Key128& key);
    ~Prf();
    Prf(Prf&& o) noexcept;
    Prf& operator=(Prf&& o) noexcept;
    Prf(const Prf&) = delete;
    Prf& operator=(const Prf&) = delete;

    void bytes(uint64_t tweak, uint64_t counter, std::span<uint8_t> out) const;
    BitVec bits(uint64_t tweak, uint64_t counter, size_t width) const;

private:
    void* ctx_; // EVP_CIPHER_CTX, key scheduled once
};

// Deterministic seeded randomness for dealers, tests and the harness.
class Rng {
public:
    explicit Rng(uint64_t seed);
    uint64_t next_u64();
    uint64_t below(uint64_t n); // uniform in [0, n), n > 0
    BitVec bits(size_t width);
    void bytes(std::span<uint8_t> out);
    Key128 key128();

private:
    Prf prf_;
    uint64_t ctr_ = 0;
};

// Fixed-key AES in MMO mode for the DPF tree: H_K(x) = AES_K(x) ^ x.
// Three fixed keys: left child, right child, output conversion.
namespace prg {
void double_seed(const uint8_t seed[16], uint8_t left[16], uint8_t right[16]);
// Expand a leaf seed to `out.size()` bytes (block i: H_K2(seed ^ embed(i))).
void convert(const uint8_t seed[16], std::span<uint8_t> out);
}

Digest256 sha256(std::span<const uint8_t> data);

class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    void update(std::span<const uint8_t> data);
    void update_u64(uint64_t v);
    Digest256 finish();

private:
    void* ctx_;
};

} // namespace mostree
