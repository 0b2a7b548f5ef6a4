#pragma once

#include <deque>
#include <map>
#include <optional>
#include <span>

#include "mostree/bitvec.hpp"
#include "mostree/fault.hpp"
#include "mostree/gf2.hpp"
#include "mostree/prf.hpp"
#include "mostree/transport.hpp"

namespace mostree {

// One party's (3,2)-replicated share pair. The three share legs x_0,x_1,x_2
// XOR to the secret; leg x_i is held by P_i as `own` and by P_{i+1} as
// `prev`, so P_i stores (x_i, x_{i-1}).
struct RssShare {
    BitVec own, prev;

    RssShare() = default;
    RssShare(BitVec o, BitVec p) : own(std::move(o)), prev(std::move(p)) {}
    explicit RssShare(size_t width) : own(width), prev(width) {}

    size_t width() const { return own.len(); }

    RssShare& operator^=(const RssShare& o) {
        own ^= o.own;
        prev ^= o.prev;
        return *this;
    }
    friend RssShare operator^(RssShare a, const RssShare& b) { a ^= b; return a; }

    RssShare slice(size_t pos, size_t n) const {
        return RssShare(own.slice(pos, n), prev.slice(pos, n));
    }
    void paste(size_t pos, const RssShare& src) {
        own.paste(pos, src.own);
        prev.paste(pos, src.prev);
    }
    static RssShare concat(const RssShare& lo, const RssShare& hi) {
        return RssShare(BitVec::concat(lo.own, hi.own), BitVec::concat(lo.prev, hi.prev));
    }
    // Each bit expanded to k copies (local; linear over XOR).
    static RssShare fan_each(const RssShare& s, size_t k) {
        return RssShare(BitVec::fan_each(s.own, k), BitVec::fan_each(s.prev, k));
    }
    RssShare xor_permute(uint64_t delta) const {
        return RssShare(own.xor_permute(delta), prev.xor_permute(delta));
    }
    // Multiply by a public bit mask (bitwise) -- local.
    RssShare masked(const BitVec& mask) const {
        return RssShare(own & mask, prev & mask);
    }
};

// Verified multiplication triples, stored column-packed: column j is the
// bit a[j] with the k-bit word slice of b and c, satisfying
// c[jk..jk+k) = fan(a[j]) & b[jk..jk+k) after verification.
struct TripleBatch {
    RssShare a; // cols bits
    RssShare b; // cols*k bits
    RssShare c; // cols*k bits
    size_t k = 1;
    size_t cols = 0;
    size_t used = 0;
};

// Field triple over a check field: c = a*b.
struct FieldTriple {
    RssShare a, b, c;
};

struct TriplePools {
    std::map<size_t, std::deque<TripleBatch>> by_width;      // key: k
    std::map<size_t, std::deque<FieldTriple>> field_triples; // key: field width
    size_t available(size_t k) const;
    // Takes `cols` columns of width k; callers top up via ensure_triples.
    TripleBatch take(size_t k, size_t cols);
};

// PRF keys of the zero-sharing ring: `with_next` is shared with P_{i+1},
// `with_prev` with P_{i-1}.
struct PrfKeyRing {
    std::optional<Prf> with_next, with_prev;
    bool ready() const { return with_next && with_prev; }
};

// Per-party protocol engine: transport endpoint, PRF key ring, fault hooks,
// triple pools and the deferred zero-check accumulator. Single-threaded.
class Engine {
public:
    Engine(PartyId me, Transport& tr, uint64_t seed, std::optional<FaultSpec> fault = {});

    PartyId me() const { return me_; }
    Transport& tr() { return tr_; }
    Rng& rng() { return rng_; }
    FaultInjector& faults() { return faults_; }
    TriplePools& pools() { return pools_; }

    void set_phase(Phase p) { tr_.phase = p; }
    Phase phase() const { return tr_.phase; }

    // One-time PRF key exchange (Fig.-9 setup step).
    void setup_keyring();

    // Parameter-hash handshake: all parties must present identical bytes.
    void handshake(std::span<const uint8_t> params);

    // --- non-interactive derivations -------------------------------------
    RssShare rand_share(size_t width);
    BitVec zero_share(size_t width);

    // --- base subprotocols -----------------------------------------------
    BitVec open(const RssShare& x, uint16_t tag = TAG_OPEN);
    std::vector<BitVec> open_batch(std::span<const RssShare> xs, uint16_t tag = TAG_OPEN);
    BitVec coin(size_t width);
    // Uniform nonzero field element (resamples on zero).
    BitVec coin_field_nonzero(const FieldCtx& f);
    std::optional<BitVec> recon(const RssShare& x, PartyId to, uint16_t tag = TAG_RECON);
    // value is read at the dealer only; others pass nullptr.
    RssShare share_input(size_t width, PartyId dealer, const BitVec* value);
    std::vector<RssShare> share_input_batch(size_t width, PartyId dealer,
                                            std::span<const BitVec> values, size_t count);
    // Semi-honest multiplication, bitwise AND when field == nullptr. Additive
    // attack surface: the resharing message (site selects which model hook).
    RssShare mul_semi(const RssShare& x, const RssShare& y, const FieldCtx* field = nullptr,
                      FaultSite site = FaultSite::MulReshare);
    std::vector<RssShare> mul_semi_batch(std::span<const RssShare> xs,
                                         std::span<const RssShare> ys, const FieldCtx* field,
                                         FaultSite site = FaultSite::MulReshare);
    bool check_zero(const RssShare& x, const FieldCtx& f);

    // Dealer-model share conversion: a (2,2)-sharing dealt by `dealer`
    // becomes a consistent RSS sharing with zero communication. The dealer
    // passes both legs; evaluator dealer+1 passes leg0, dealer+2 passes leg1.
    RssShare t2r_convert(PartyId dealer, const BitVec* leg0, const BitVec* leg1, size_t width);

    // Public constant v as the sharing (0,0,v).
    RssShare const_share(const BitVec& v) const;
    void add_const_inplace(RssShare& x, const BitVec& c) const;

    // --- deferred zero checks (AND verification) ---------------------------
    void pending_push(RssShare supposed_zero);
    size_t pending_bits() const { return pending_bits_; }
    // Random-linear-combination check of everything pushed so far; aborts on
    // any nonzero. Coins are drawn fresh, after the checked values are fixed.
    void flush_pending();

private:
    friend struct EngineTest;
    PartyId me_;
    Transport& tr_;
    Rng rng_;
    FaultInjector faults_;
    PrfKeyRing ring_;
    TriplePools pools_;
    std::map<uint16_t, uint64_t> prf_ctr_; // lockstep counters for PRF sids
    std::vector<RssShare> pending_;
    size_t pending_bits_ = 0;

    uint64_t prf_counter(uint16_t tag) { return prf_ctr_[tag]++; }
};

// Serialization helpers (fixed little-endian layout).
void put_u32(std::vector<uint8_t>& out, uint32_t v);
void put_u64(std::vector<uint8_t>& out, uint64_t v);
uint32_t get_u32(std::span<const uint8_t> in, size_t& off);
uint64_t get_u64(std::span<const uint8_t> in, size_t& off);
void put_bits(std::vector<uint8_t>& out, const BitVec& v);          // raw, width known
BitVec get_bits(std::span<const uint8_t> in, size_t& off, size_t width);

} // namespace mostree
