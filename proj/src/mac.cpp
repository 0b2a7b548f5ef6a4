#include "mostree/mac.hpp"

namespace mostree {

MacKey mac_keygen(Engine& eng, FieldPtr field) {
    return MacKey{eng.rand_share(field->ell()), std::move(field)};
}

AuthPair mac_attach(Engine& eng, const RssShare& x, const MacKey& key) {
    RssShare sigma = eng.mul_semi(key.alpha, x, key.field.get(), FaultSite::MacAttach);
    return AuthPair{x, std::move(sigma)};
}

std::vector<AuthPair> mac_attach_batch(Engine& eng, std::span<const RssShare> xs,
                                       const MacKey& key) {
    std::vector<RssShare> alphas(xs.size(), key.alpha);
    auto sigmas = eng.mul_semi_batch(alphas, xs, key.field.get(), FaultSite::MacAttach);
    std::vector<AuthPair> out;
    out.reserve(xs.size());
    for (size_t i = 0; i < xs.size(); i++)
        out.push_back(AuthPair{xs[i], std::move(sigmas[i])});
    return out;
}

void mac_check(Engine& eng, std::span<const AuthPair> pairs, const MacKey& key) {
    const FieldCtx& f = *key.field;
    const size_t ell = f.ell();

    // fresh masked pair (r, sigma(r)) keeps the opened combination uniform
    RssShare r = eng.rand_share(ell);
    RssShare sigma_r = eng.mul_semi(key.alpha, r, &f);

    RssShare v = r, w = sigma_r;
    for (const AuthPair& p : pairs) {
        BitVec rho = eng.coin_field_nonzero(f);
        v.own ^= f.mul(rho, p.x.own);
        v.prev ^= f.mul(rho, p.x.prev);
        w.own ^= f.mul(rho, p.sigma.own);
        w.prev ^= f.mul(rho, p.sigma.prev);
    }
    BitVec v_open = eng.open(v);
    RssShare diff = w;
    diff.own ^= f.mul(v_open, key.alpha.own);
    diff.prev ^= f.mul(v_open, key.alpha.prev);
    if (!eng.check_zero(diff, f)) throw ProtocolAbort("mac-check");
}

} // namespace mostree
