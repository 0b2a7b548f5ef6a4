#pragma once

#include "mostree/circuits.hpp"
#include "mostree/dpf.hpp"
#include "mostree/rss.hpp"

namespace mostree {

// RSS-shared array with 64-bit-aligned entry stride (fast row access).
struct SharedArray {
    RssShare data;
    size_t entry_bits = 0;
    size_t stride = 0;
    size_t count = 0;

    static SharedArray make(size_t entry_bits, size_t count) {
        SharedArray a;
        a.entry_bits = entry_bits;
        a.stride = (entry_bits + 63) & ~size_t(63);
        a.count = count;
        a.data = RssShare(a.stride * count);
        return a;
    }
    RssShare entry(size_t j) const { return data.slice(j * stride, entry_bits); }
    void set_entry(size_t j, const RssShare& e) { data.paste(j * stride, e); }
};

// Width of the check field used by the DPF-OS consistency checks: indices are
// embedded into F_2^{ell'} with ell' >= 2*ell_m + lambda (lambda = 40),
// rounded up to whole words.
size_t check_field_bits(size_t ell_m);

// --- pure-RSS oblivious selection -------------------------------------------

struct RssOsToken {
    RssShare rdx; // ell_m bits
    RssShare v;   // m bits, unit vector at rdx
    bool used = false;
};

// Offline: random index + unit vector via m equality tests (linear bytes).
RssOsToken rss_os_preprocess(Engine& eng, size_t m);

// Online: open delta = rdx^idx, rotate, one locally-summed inner product and
// a single resharing. idx width must be log2(arr.count).
RssShare rss_os_select(Engine& eng, const SharedArray& arr, const RssShare& idx,
                       RssOsToken& token);

// --- DPF-over-RSS oblivious selection ----------------------------------------

struct DpfOsToken {
    PartyId dealer;
    bool used = false;
    // evaluator view
    BitVec v_low;     // m bits: my additive share of the unit vector
    BitVec rdx_share; // ell_m bits
    // dealer view
    uint64_t rdx = 0;
    BitVec rdx_leg0, rdx_leg1;
};

struct DpfOsOptions {
    size_t direct_share_threshold = 64; // m <= threshold ships <v> directly
};

// Offline: dealer generates keys (or ships the vector for small m); the
// evaluators verify well-formedness (proof stream), beta = 1 and index
// consistency. Aborts on any check failure.
DpfOsToken dpf_os_preprocess(Engine& eng, size_t m, PartyId dealer,
                             DpfOsOptions opts = {});

// Online: three rotations, each reconstructing delta only to that rotation's
// two evaluators; one resharing at the end. tokens[i] must have dealer
// (i+2) mod 3 and be unused.
RssShare dpf_os_select(Engine& eng, const SharedArray& arr, const RssShare& idx,
                       std::array<DpfOsToken, 3>& tokens);

} // namespace mostree
