#pragma once

#include "mostree/rss.hpp"

namespace mostree {

// Cut-and-choose parameters: buckets of `bucket` candidates, of which one
// survives; an extra 1/open_denom fraction is opened outright.
struct CutChooseParams {
    size_t bucket = 3;
    size_t open_denom = 4;
};

// Top up the pool of verified (bit, k-word) multiplication triples to at
// least `cols` columns. Runs under the os-preprocess phase label.
void ensure_triples(Engine& eng, size_t k, size_t cols, CutChooseParams params = {});

// Generate exactly `out_cols` verified columns into the pool.
void triple_gen(Engine& eng, size_t k, size_t out_cols, CutChooseParams params = {});

// z = x & y bitwise; every bit position is one verified AND (consumes that
// many width-1 triple columns). The sacrifice's zero-word is deferred to the
// engine's pending batch.
RssShare and_bits(Engine& eng, const RssShare& x, const RssShare& y);

// Products z[j*k..) = fan(bits[j]) & words[j*k..), one verified (bit,word)
// product per j. bits: n bits, words: n*k bits.
RssShare and_fan(Engine& eng, const RssShare& bits, const RssShare& words, size_t k);

// Shares of [idx == j] for a public j (complemented-difference AND-reduction).
RssShare eq_test(Engine& eng, const RssShare& idx, uint64_t j);

// All equality bits at once: out[j] = [idx == j] for j in [m], m = 2^idx.width().
// Same AND count (m per reduction level), one round per level.
RssShare eq_test_all(Engine& eng, const RssShare& idx, size_t m);

// Strict unsigned comparison x < t over k-bit words; LSB-up ripple with
// exactly 2k-1 verified ANDs.
RssShare lt_compare(Engine& eng, const RssShare& x, const RssShare& t);

// idx = r ^ b&(l^r); k verified ANDs (one fanned-bit product).
RssShare mux_index(Engine& eng, const RssShare& b, const RssShare& l, const RssShare& r);

// XOR_j x[j]&v[j]; n verified bit products folded locally.
RssShare inner_product_bits(Engine& eng, const RssShare& x, const RssShare& v);

// Feature selection: X is n packed k-bit words, v a (unit) bit vector of
// length n; returns the selected word. n verified word products.
RssShare select_word(Engine& eng, const RssShare& xwords, const RssShare& v, size_t k);

// --- field triples over a check field (used by the small-tree OS fallback) --
void ensure_field_triples(Engine& eng, const FieldPtr& f, size_t count,
                          CutChooseParams params = {});
FieldTriple take_field_triple(Engine& eng, const FieldPtr& f);

// Beaver multiplication with a verified triple: opens are cross-checked, the
// combination is local, so the product carries no additive-attack surface.
RssShare beaver_mul_field(Engine& eng, const RssShare& x, const RssShare& y,
                          const FieldTriple& t, const FieldCtx& f);

// XOR-fold n segments of k bits into one k-bit share (local).
RssShare fold_segments(const RssShare& packed, size_t k);

} // namespace mostree
