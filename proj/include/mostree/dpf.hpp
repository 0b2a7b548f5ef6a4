#pragma once

#include <optional>

#include "mostree/bitvec.hpp"
#include "mostree/prf.hpp"

namespace mostree {

// f_{alpha,beta}: [2^domain_bits] -> F_2^out_bits; beta at alpha, 0 elsewhere.
struct PointFunction {
    uint64_t alpha = 0;
    BitVec beta;
    size_t domain_bits = 0;
};

struct DpfParseError : std::runtime_error {
    explicit DpfParseError(const std::string& m) : std::runtime_error("dpf: " + m) {}
};

// One evaluator's key of the two-key binary-tree construction: a root seed,
// one correction word per level, an output correction word, and the proof
// correction word that makes the two full-domain proof streams agree.
struct DpfKey {
    uint8_t evaluator = 0; // b in {0,1}
    uint8_t domain_bits = 0;
    uint16_t out_bits = 0;
    Key128 seed{};
    struct LevelCw {
        Key128 scw{};
        bool tl = false, tr = false;
    };
    std::vector<LevelCw> cw;
    BitVec final_cw;    // out_bits wide
    Digest256 proof_cw; // cs

    std::vector<uint8_t> serialize() const;
    static DpfKey parse(std::span<const uint8_t> blob);
    size_t bit_size() const;
};

std::pair<DpfKey, DpfKey> dpf_gen(const PointFunction& f, Rng& rng);

// Single-point evaluation (share of f(x)).
BitVec dpf_eval(const DpfKey& k, uint64_t x);

struct BatchEvalOut {
    std::vector<BitVec> shares; // 2^domain_bits entries of out_bits
    Digest256 proof;            // pi
};

// Full-domain evaluation plus the verification proof. The proof hashes the
// per-leaf states in order, so equal proofs mean the two expansions differ in
// at most one leaf, i.e. the keys encode some point function.
BatchEvalOut vdpf_batch_eval(const DpfKey& k);

} // namespace mostree
