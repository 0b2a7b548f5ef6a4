#include "mostree/oselect.hpp"

#include <cstring>

namespace mostree {

namespace {

size_t log2_exact(size_t m) {
    size_t lm = 0;
    while ((size_t(1) << lm) < m) lm++;
    if ((size_t(1) << lm) != m)
        throw std::invalid_argument("os: array length must be a power of two");
    return lm;
}

// piece ^= row_j of the leg for every set bit j of mask; rows are word-aligned.
void accumulate_rows(BitVec& piece, const BitVec& leg, const BitVec& mask, size_t stride) {
    const size_t words = stride / 64;
    uint64_t* dst = piece.data();
    const uint64_t* src = leg.data();
    for (size_t j = 0; j < mask.len(); j++) {
        if (!mask.bit(j)) continue;
        const uint64_t* row = src + j * words;
        for (size_t w = 0; w < words; w++) dst[w] ^= row[w];
    }
}

BitVec embed_u64(uint64_t v, size_t width) { return BitVec::from_u64(v, width); }

BitVec pad_to(const BitVec& v, size_t width) {
    BitVec out(width);
    out.paste(0, v);
    return out;
}

// Consistency checks for a directly-shared selection vector (small-m path),
// run by all three parties over the T2R-lifted sharings:
//   t: sum_j v[j] opens to 1 (excludes the zero vector, pins beta = 1)
//   s: rdx - sum_j j*v[j] opens to 0 (index consistent with the vector)
//   sketch: for public coins r_j, s_j the values z1 = sum r_j v_j,
//           z2 = sum s_j v_j, z3 = sum r_j s_j v_j satisfy z3 = z1*z2 only
//           for unit-or-zero vectors (except with probability 2/|F|).
void direct_share_checks(Engine& eng, const std::vector<RssShare>& v, const RssShare& rdx,
                         const FieldPtr& f) {
    const size_t m = v.size();
    const size_t ellp = f->ell();

    RssShare t_sh(ellp);
    RssShare s_sh = rdx;
    for (size_t j = 0; j < m; j++) {
        t_sh ^= v[j];
        RssShare jm(f->mul(embed_u64(j, ellp), v[j].own), f->mul(embed_u64(j, ellp), v[j].prev));
        s_sh ^= jm;
    }
    std::array<RssShare, 2> ts = {t_sh, s_sh};
    auto opened = eng.open_batch(ts);
    if (opened[0] != f->one() || !opened[1].is_zero()) throw ProtocolAbort("dpf-unit");

    BitVec coins = eng.coin(2 * m * ellp);
    RssShare z1(ellp), z2(ellp), z3(ellp);
    for (size_t j = 0; j < m; j++) {
        BitVec rj = coins.slice(j * ellp, ellp);
        BitVec sj = coins.slice((m + j) * ellp, ellp);
        BitVec rs = f->mul(rj, sj);
        z1.own ^= f->mul(rj, v[j].own);
        z1.prev ^= f->mul(rj, v[j].prev);
        z2.own ^= f->mul(sj, v[j].own);
        z2.prev ^= f->mul(sj, v[j].prev);
        z3.own ^= f->mul(rs, v[j].own);
        z3.prev ^= f->mul(rs, v[j].prev);
    }
    FieldTriple trip = take_field_triple(eng, f);
    RssShare prod = beaver_mul_field(eng, z1, z2, trip, *f);
    if (!eng.check_zero(z3 ^ prod, *f)) throw ProtocolAbort("dpf-sketch");
}

// Malformed-key classes for the adversary harness. Classes 5-7 change what
// the dealer generates; the rest mutate evaluator 1's key after generation.
struct KeyFault {
    int cls = 0;
    void mutate_function(PointFunction& f, uint64_t true_rdx, size_t ellp) const {
        switch (cls) {
            case 5: f.beta = BitVec(ellp); break;              // beta = 0
            case 6: f.beta = BitVec::from_u64(3, ellp); break; // beta = 3
            case 7: f.alpha = (true_rdx + 1) % (uint64_t(1) << f.domain_bits); break;
            default: break;
        }
    }
    void mutate_key(DpfKey& k, Rng& rng) const {
        switch (cls) {
            case 1: k.cw[0].scw[3] ^= 0x40; break;
            case 2: k.cw[k.cw.size() / 2].tl ^= true; break;
            case 3: k.cw.back().tr ^= true; break;
            case 4: k.final_cw.flip_bit(rng.below(k.out_bits)); break;
            case 9: k.seed[5] ^= 0x10; break;
            case 10: k.proof_cw[7] ^= 0x01; break;
            case 11: k.cw.back().scw = Key128{}; break;
            case 12:
                if (k.cw.size() >= 2) std::swap(k.cw[0].scw, k.cw[1].scw);
                else k.cw[0].scw[0] ^= 0x80;
                break;
            default: break;
        }
    }
    void mutate_blob(std::vector<uint8_t>& blob) const {
        if (cls == 8 && !blob.empty()) blob.pop_back(); // truncated key
    }
};

// Bind the shared key metadata into the proof so tampering with the output or
// proof correction word breaks proof equality deterministically.
Digest256 bind_proof(const DpfKey& k, const Digest256& pi) {
    Sha256 h;
    h.update_u64(k.domain_bits);
    h.update_u64(k.out_bits);
    auto fb = k.final_cw.to_bytes();
    h.update(fb);
    h.update(k.proof_cw);
    h.update(pi);
    return h.finish();
}

// Commit-then-open equality of the two evaluators' proofs.
bool proofs_equal(Engine& eng, PartyId peer, const Digest256& mine) {
    BitVec salt = eng.rng().bits(128);
    std::vector<uint8_t> opening(mine.begin(), mine.end());
    put_bits(opening, salt);
    auto commit = sha256(opening);
    eng.tr().send(peer, TAG_DPF_COMMIT, commit);
    auto peer_commit = eng.tr().recv(peer, TAG_DPF_COMMIT);
    eng.tr().send(peer, TAG_DPF_OPEN, opening);
    auto peer_opening = eng.tr().recv(peer, TAG_DPF_OPEN);
    if (peer_commit.size() != 32 || peer_opening.size() != opening.size())
        throw ProtocolAbort("dpf-verify");
    auto check = sha256(peer_opening);
    if (std::memcmp(check.data(), peer_commit.data(), 32) != 0)
        throw ProtocolAbort("dpf-verify");
    return std::memcmp(peer_opening.data(), mine.data(), 32) == 0;
}

} // namespace

size_t check_field_bits(size_t ell_m) {
    size_t need = std::max<size_t>(2 * ell_m + 40, 64);
    return (need + 63) & ~size_t(63);
}

RssOsToken rss_os_preprocess(Engine& eng, size_t m) {
    Phase saved = eng.phase();
    eng.set_phase(Phase::OsPreprocess);
    RssOsToken tok;
    if (m == 1) { // trivial domain: the unit vector is the constant 1
        tok.rdx = RssShare(0);
        tok.v = eng.const_share(BitVec::from_u64(1, 1));
        eng.set_phase(saved);
        return tok;
    }
    size_t lm = log2_exact(m);
    if (lm > 1) ensure_triples(eng, 1, m * (lm - 1));
    tok.rdx = eng.rand_share(lm);
    tok.v = eq_test_all(eng, tok.rdx, m);
    eng.flush_pending();
    eng.set_phase(saved);
    return tok;
}

RssShare rss_os_select(Engine& eng, const SharedArray& arr, const RssShare& idx,
                       RssOsToken& token) {
    if (token.used) throw std::logic_error("os: token reuse");
    token.used = true;
    const size_t w = arr.entry_bits;
    if (arr.count == 1) return arr.entry(0);
    size_t lm = log2_exact(arr.count);
    if (idx.width() != lm) throw std::invalid_argument("os: index width");

    BitVec delta = eng.open(token.rdx ^ idx);
    RssShare u = token.v.xor_permute(delta.to_u64());

    // (3,3) cross terms of sum_j T[j]*u[j], summed locally, one resharing
    BitVec piece(arr.stride);
    accumulate_rows(piece, arr.data.own, u.own, arr.stride);
    accumulate_rows(piece, arr.data.prev, u.own, arr.stride);
    accumulate_rows(piece, arr.data.own, u.prev, arr.stride);
    BitVec z_own = piece.slice(0, w);
    z_own ^= eng.zero_share(w);
    z_own ^= eng.faults().take(FaultSite::OsReshare, w);
    std::vector<uint8_t> payload;
    put_bits(payload, z_own);
    eng.tr().send(eng.me().next(), TAG_OS_RESHARE, payload);
    auto got = eng.tr().recv(eng.me().prev(), TAG_OS_RESHARE);
    size_t off = 0;
    BitVec z_prev = get_bits(got, off, w);
    return RssShare(std::move(z_own), std::move(z_prev));
}

DpfOsToken dpf_os_preprocess(Engine& eng, size_t m, PartyId dealer, DpfOsOptions opts) {
    Phase saved = eng.phase();
    eng.set_phase(Phase::OsPreprocess);
    DpfOsToken tok;
    tok.dealer = dealer;
    if (m == 1) {
        tok.v_low = BitVec::from_u64(1, 1); // unused: selection shortcuts
        eng.set_phase(saved);
        return tok;
    }
    const size_t lm = log2_exact(m);
    const size_t ellp = check_field_bits(lm);
    auto fchk = FieldCtx::get(ellp);
    const PartyId eval0 = dealer.next(), eval1 = dealer.prev();
    const bool keyed = m > opts.direct_share_threshold;
    const bool is_eval0 = eng.me() == eval0;

    if (eng.me() == dealer) {
        uint64_t rdx = eng.rng().below(m);
        BitVec leg0 = eng.rng().bits(lm);
        BitVec leg1 = leg0 ^ embed_u64(rdx, lm);
        // index-sharing attack: distributed legs encode rdx* != rdx
        leg1 ^= eng.faults().take(FaultSite::RdxShare, lm);
        KeyFault kf;
        if (eng.faults().armed(FaultSite::DpfKeyClass)) kf.cls = eng.faults().dpf_class();

        if (keyed) {
            PointFunction f{rdx, BitVec::from_u64(1, ellp), lm};
            kf.mutate_function(f, rdx, ellp);
            auto [k0, k1] = dpf_gen(f, eng.rng());
            kf.mutate_key(k1, eng.rng());
            auto blob0 = k0.serialize();
            auto blob1 = k1.serialize();
            kf.mutate_blob(blob1);
            std::vector<uint8_t> m0, m1;
            put_bits(m0, leg0);
            m0.insert(m0.end(), blob0.begin(), blob0.end());
            put_bits(m1, leg1);
            m1.insert(m1.end(), blob1.begin(), blob1.end());
            eng.tr().send(eval0, TAG_DPF_KEY, m0);
            eng.tr().send(eval1, TAG_DPF_KEY, m1);
        } else {
            std::vector<BitVec> vleg0(m), vleg1(m);
            for (size_t j = 0; j < m; j++) {
                vleg0[j] = eng.rng().bits(ellp);
                vleg1[j] = vleg0[j];
                if (j == rdx) vleg1[j] ^= fchk->one();
            }
            if (kf.cls == 5) vleg1[rdx] ^= fchk->one();               // vector of zeros
            if (kf.cls == 6) vleg1[rdx] ^= BitVec::from_u64(2, ellp); // beta = 3
            if (kf.cls == 7) {                                        // wrong position
                vleg1[rdx] ^= fchk->one();
                vleg1[(rdx + 1) % m] ^= fchk->one();
            }
            std::vector<uint8_t> m0, m1;
            put_bits(m0, leg0);
            put_bits(m1, leg1);
            for (size_t j = 0; j < m; j++) put_bits(m0, vleg0[j]);
            for (size_t j = 0; j < m; j++) put_bits(m1, vleg1[j]);
            eng.tr().send(eval0, TAG_DPF_KEY, m0);
            eng.tr().send(eval1, TAG_DPF_KEY, m1);

            std::vector<RssShare> v(m);
            for (size_t j = 0; j < m; j++)
                v[j] = eng.t2r_convert(dealer, &vleg0[j], &vleg1[j], ellp);
            BitVec rdx0p = pad_to(leg0, ellp), rdx1p = pad_to(leg1, ellp);
            RssShare rdxf = eng.t2r_convert(dealer, &rdx0p, &rdx1p, ellp);
            direct_share_checks(eng, v, rdxf, fchk);
        }
        tok.rdx = rdx;
        tok.rdx_leg0 = std::move(leg0);
        tok.rdx_leg1 = std::move(leg1);
        eng.set_phase(saved);
        return tok;
    }

    // evaluator side
    auto blob = eng.tr().recv(dealer, TAG_DPF_KEY);
    size_t off = 0;
    tok.rdx_share = get_bits(blob, off, lm);

    if (keyed) {
        DpfKey key;
        try {
            key = DpfKey::parse(std::span<const uint8_t>(blob).subspan(off));
        } catch (const DpfParseError&) {
            throw ProtocolAbort("dpf-parse");
        }
        if (key.domain_bits != lm || key.out_bits != ellp ||
            key.evaluator != (is_eval0 ? 0 : 1))
            throw ProtocolAbort("dpf-parse");
        auto ev = vdpf_batch_eval(key);
        Digest256 pi = bind_proof(key, ev.proof);
        PartyId peer = is_eval0 ? eval1 : eval0;
        if (!proofs_equal(eng, peer, pi)) throw ProtocolAbort("dpf-verify");

        // t = sum_j v[j] must be 1; s = rdx - sum_j j*v[j] must be 0
        BitVec t_sh(ellp), s_sh = pad_to(tok.rdx_share, ellp);
        for (size_t j = 0; j < m; j++) {
            t_sh ^= ev.shares[j];
            s_sh ^= fchk->mul(embed_u64(j, ellp), ev.shares[j]);
        }
        std::vector<uint8_t> ts;
        put_bits(ts, t_sh);
        put_bits(ts, s_sh);
        eng.tr().send(peer, TAG_DPF_UNIT, ts);
        auto peer_ts = eng.tr().recv(peer, TAG_DPF_UNIT);
        size_t o2 = 0;
        BitVec t = t_sh ^ get_bits(peer_ts, o2, ellp);
        BitVec s = s_sh ^ get_bits(peer_ts, o2, ellp);
        if (t != fchk->one() || !s.is_zero()) throw ProtocolAbort("dpf-unit");

        tok.v_low = BitVec(m);
        for (size_t j = 0; j < m; j++) tok.v_low.set_bit(j, ev.shares[j].bit(0));
    } else {
        std::vector<BitVec> myleg(m);
        for (size_t j = 0; j < m; j++) myleg[j] = get_bits(blob, off, ellp);
        if (off != blob.size()) throw ProtocolAbort("dpf-parse");
        std::vector<RssShare> v(m);
        for (size_t j = 0; j < m; j++)
            v[j] = eng.t2r_convert(dealer, is_eval0 ? &myleg[j] : nullptr,
                                   is_eval0 ? nullptr : &myleg[j], ellp);
        BitVec rdxp = pad_to(tok.rdx_share, ellp);
        RssShare rdxf = eng.t2r_convert(dealer, is_eval0 ? &rdxp : nullptr,
                                        is_eval0 ? nullptr : &rdxp, ellp);
        direct_share_checks(eng, v, rdxf, fchk);
        tok.v_low = BitVec(m);
        for (size_t j = 0; j < m; j++) tok.v_low.set_bit(j, myleg[j].bit(0));
    }
    eng.set_phase(saved);
    return tok;
}

RssShare dpf_os_select(Engine& eng, const SharedArray& arr, const RssShare& idx,
                       std::array<DpfOsToken, 3>& tokens) {
    const size_t w = arr.entry_bits;
    const size_t m = arr.count;
    if (m == 1) {
        for (auto& t : tokens) t.used = true;
        return arr.entry(0);
    }
    const size_t lm = log2_exact(m);
    if (idx.width() != lm) throw std::invalid_argument("os: index width");
    const size_t words = arr.stride / 64;

    BitVec piece(arr.stride);
    for (unsigned rot = 0; rot < 3; rot++) {
        DpfOsToken& tok = tokens[rot];
        if (tok.used) throw std::logic_error("os: token reuse");
        if (!(tok.dealer == PartyId((rot + 2) % 3)))
            throw std::logic_error("os: token dealer does not match rotation");
        tok.used = true;
        const PartyId pi = PartyId(rot), pi1 = PartyId((rot + 1) % 3);
        const PartyId dealer = tok.dealer;

        RssShare rdx = eng.t2r_convert(dealer,
                                       eng.me() == dealer ? &tok.rdx_leg0
                                       : eng.me() == pi   ? &tok.rdx_share
                                                          : nullptr,
                                       eng.me() == dealer ? &tok.rdx_leg1
                                       : eng.me() == pi1  ? &tok.rdx_share
                                                          : nullptr,
                                       lm);
        RssShare delta_sh = rdx ^ idx;
        // delta goes to the two evaluators only; the dealer would learn idx
        auto d0 = eng.recon(delta_sh, pi, TAG_RECON_DELTA);
        auto d1 = eng.recon(delta_sh, pi1, TAG_RECON_DELTA);
        if (eng.me() == dealer) continue;
        uint64_t delta = (eng.me() == pi ? *d0 : *d1).to_u64();

        // additive share of sum_j T_rot[j] * v[j ^ delta] over the leg this
        // pair holds in common (own for P_rot, prev for P_rot+1)
        const BitVec& leg = (eng.me() == pi) ? arr.data.own : arr.data.prev;
        const uint64_t* src = leg.data();
        uint64_t* dst = piece.data();
        for (size_t j = 0; j < m; j++) {
            if (!tok.v_low.bit(j ^ delta)) continue;
            const uint64_t* row = src + j * words;
            for (size_t ww = 0; ww < words; ww++) dst[ww] ^= row[ww];
        }
    }

    BitVec z_own = piece.slice(0, w);
    z_own ^= eng.zero_share(w);
    z_own ^= eng.faults().take(FaultSite::OsReshare, w);
    std::vector<uint8_t> payload;
    put_bits(payload, z_own);
    eng.tr().send(eng.me().next(), TAG_OS_RESHARE, payload);
    auto got = eng.tr().recv(eng.me().prev(), TAG_OS_RESHARE);
    size_t off = 0;
    BitVec z_prev = get_bits(got, off, w);
    return RssShare(std::move(z_own), std::move(z_prev));
}

} // namespace mostree
