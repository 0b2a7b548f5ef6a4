#pragma once

#include "mostree/rss.hpp"

namespace mostree {

// SPDZ-like MAC key: a shared element of F_{2^ell}, never opened.
struct MacKey {
    RssShare alpha;
    FieldPtr field;
};

// A value and its shared tag with intended sigma = alpha * x.
struct AuthPair {
    RssShare x, sigma;
};

MacKey mac_keygen(Engine& eng, FieldPtr field);

// sigma = alpha * x via the semi-honest multiplication (additive attacks
// surface here and are caught by mac_check).
AuthPair mac_attach(Engine& eng, const RssShare& x, const MacKey& key);
std::vector<AuthPair> mac_attach_batch(Engine& eng, std::span<const RssShare> xs,
                                       const MacKey& key);

// Batched check: random coefficients over F\{0}, one masked opening, one
// zero test. Throws ProtocolAbort("mac-check") when the batch carries any
// additive error (except with probability ~1/|F|).
void mac_check(Engine& eng, std::span<const AuthPair> pairs, const MacKey& key);

} // namespace mostree
