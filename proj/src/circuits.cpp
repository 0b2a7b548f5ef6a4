#include "mostree/circuits.hpp"

#include <map>

namespace mostree {

namespace {

// Fused verified-AND round: resharing message and both sacrifice opens travel
// in two frames per party. Returns z = x&y with the sacrifice zero-word
// pushed onto the pending batch.
//
// bits: n columns, words/z: n*k bits. Triple columns must match (n, k).
RssShare and_core(Engine& eng, const RssShare& bits, const RssShare& words, size_t k,
                  const TripleBatch& t) {
    const size_t n = bits.width();
    const size_t wk = words.width();
    Transport& tr = eng.tr();
    PartyId me = eng.me();

    RssShare xf = RssShare::fan_each(bits, k);
    BitVec cross = (xf.own & words.own) ^ (xf.prev & words.own) ^ (xf.own & words.prev);
    cross ^= eng.zero_share(wk);
    cross ^= eng.faults().take(FaultSite::MulReshare, wk);

    RssShare e_sh = bits ^ t.a;   // n bits
    RssShare f_sh = words ^ t.b;  // n*k bits

    // own-leg open copies may be tampered by a corrupt party
    BitVec ef_own = BitVec::concat(e_sh.own, f_sh.own);
    ef_own ^= eng.faults().take(FaultSite::OpenShare, n + wk);

    std::vector<uint8_t> to_next, to_prev;
    put_bits(to_next, cross);
    put_bits(to_next, e_sh.prev);
    put_bits(to_next, f_sh.prev);
    put_bits(to_prev, ef_own.slice(0, n));
    put_bits(to_prev, ef_own.slice(n, wk));
    tr.send(me.next(), TAG_AND_NEXT, to_next);
    tr.send(me.prev(), TAG_AND_PREV, to_prev);

    auto fp = tr.recv(me.prev(), TAG_AND_NEXT); // prev's cross + leg(i+1) copies
    auto fn = tr.recv(me.next(), TAG_AND_PREV); // next's own legs = leg(i+1) copies
    size_t o1 = 0, o2 = 0;
    BitVec z_prev = get_bits(fp, o1, wk);
    BitVec e_cp1 = get_bits(fp, o1, n);
    BitVec f_cp1 = get_bits(fp, o1, wk);
    BitVec e_cp2 = get_bits(fn, o2, n);
    BitVec f_cp2 = get_bits(fn, o2, wk);
    if (e_cp1 != e_cp2 || f_cp1 != f_cp2) throw ProtocolAbort("open-mismatch");

    BitVec e = e_sh.own ^ e_sh.prev ^ e_cp1; // public
    BitVec f = f_sh.own ^ f_sh.prev ^ f_cp1; // public
    RssShare z(std::move(cross), std::move(z_prev));

    // w = ef + f*a + e*b + c + z; zero iff the product carries no error
    BitVec ef = BitVec::fan_each(e, k);
    RssShare w = z ^ t.c;
    w ^= RssShare::fan_each(t.a, k).masked(f);
    w ^= t.b.masked(ef);
    eng.add_const_inplace(w, ef & f);
    eng.pending_push(std::move(w));
    return z;
}

RssShare gather_cols(const RssShare& s, std::span<const uint32_t> idx, size_t k) {
    RssShare out(idx.size() * k);
    for (size_t i = 0; i < idx.size(); i++)
        out.paste(i * k, s.slice(idx[i] * k, k));
    return out;
}

} // namespace

void triple_gen(Engine& eng, size_t k, size_t out_cols, CutChooseParams p) {
    if (out_cols == 0) return;
    const size_t bucket = p.bucket;
    // candidates: out*bucket bucketed + ~1/open_denom of the total opened
    size_t n_cand = out_cols * bucket;
    size_t n_open = (n_cand + p.open_denom - 2) / (p.open_denom - 1);
    n_cand += n_open;

    RssShare a = eng.rand_share(n_cand);
    RssShare b = eng.rand_share(n_cand * k);
    RssShare af = RssShare::fan_each(a, k);
    RssShare c = eng.mul_semi(af, b, nullptr, FaultSite::TripleC);

    // public shuffle: the adversary commits to its candidates first
    BitVec permseed = eng.coin(64);
    Rng prng(permseed.to_u64());
    std::vector<uint32_t> perm(n_cand);
    for (uint32_t i = 0; i < n_cand; i++) perm[i] = i;
    for (size_t i = n_cand; i > 1; i--) std::swap(perm[i - 1], perm[prng.below(i)]);

    // open the first n_open columns and check them in the clear
    std::span<const uint32_t> open_idx(perm.data(), n_open);
    std::array<RssShare, 3> opened_shares = {gather_cols(a, open_idx, 1),
                                             gather_cols(b, open_idx, k),
                                             gather_cols(c, open_idx, k)};
    auto opened = eng.open_batch(opened_shares);
    const BitVec& oa = opened[0];
    for (size_t i = 0; i < n_open; i++) {
        BitVec want = opened[1].slice(i * k, k) & BitVec::fan_bit(oa.bit(i), k);
        if (opened[2].slice(i * k, k) != want) throw ProtocolAbort("triple-open");
    }

    // bucketed sacrifice: the first column of each bucket survives, checked
    // against the rest
    size_t n_buckets = out_cols;
    std::vector<uint32_t> first(n_buckets);
    std::vector<uint32_t> rest((bucket - 1) * n_buckets);
    for (size_t bi = 0; bi < n_buckets; bi++) {
        first[bi] = perm[n_open + bi * bucket];
        for (size_t s = 1; s < bucket; s++)
            rest[bi * (bucket - 1) + s - 1] = perm[n_open + bi * bucket + s];
    }
    RssShare a1(rest.size()), b1(rest.size() * k);
    RssShare a2(rest.size()), b2(rest.size() * k), c2(rest.size() * k), c1(rest.size() * k);
    for (size_t i = 0; i < rest.size(); i++) {
        uint32_t fi = first[i / (bucket - 1)];
        a1.paste(i, a.slice(fi, 1));
        b1.paste(i * k, b.slice(fi * k, k));
        c1.paste(i * k, c.slice(fi * k, k));
        a2.paste(i, a.slice(rest[i], 1));
        b2.paste(i * k, b.slice(rest[i] * k, k));
        c2.paste(i * k, c.slice(rest[i] * k, k));
    }
    std::array<RssShare, 2> efs = {a1 ^ a2, b1 ^ b2};
    auto ef = eng.open_batch(efs);
    const BitVec& e = ef[0];
    const BitVec& f = ef[1];
    BitVec efk = BitVec::fan_each(e, k);
    RssShare w = c1 ^ c2;
    w ^= RssShare::fan_each(a2, k).masked(f);
    w ^= b2.masked(efk);
    eng.add_const_inplace(w, efk & f);
    eng.pending_push(std::move(w));

    TripleBatch out;
    out.k = k;
    out.cols = n_buckets;
    out.a = gather_cols(a, first, 1);
    out.b = gather_cols(b, first, k);
    out.c = gather_cols(c, first, k);
    eng.pools().by_width[k].push_back(std::move(out));
}

void ensure_triples(Engine& eng, size_t k, size_t cols, CutChooseParams p) {
    size_t have = eng.pools().available(k);
    if (have >= cols) return;
    Phase saved = eng.phase();
    eng.set_phase(Phase::OsPreprocess);
    triple_gen(eng, k, cols - have, p);
    eng.flush_pending();
    eng.set_phase(saved);
}

RssShare and_bits(Engine& eng, const RssShare& x, const RssShare& y) {
    ensure_triples(eng, 1, x.width());
    TripleBatch t = eng.pools().take(1, x.width());
    return and_core(eng, x, y, 1, t);
}

RssShare and_fan(Engine& eng, const RssShare& bits, const RssShare& words, size_t k) {
    ensure_triples(eng, k, bits.width());
    TripleBatch t = eng.pools().take(k, bits.width());
    return and_core(eng, bits, words, k, t);
}

RssShare eq_test(Engine& eng, const RssShare& idx, uint64_t j) {
    const size_t lm = idx.width();
    // acc = AND_q not(idx_q ^ j_q)
    RssShare acc = idx.slice(0, 1);
    eng.add_const_inplace(acc, BitVec::from_u64((j & 1) ^ 1, 1));
    for (size_t q = 1; q < lm; q++) {
        RssShare hq = idx.slice(q, 1);
        eng.add_const_inplace(hq, BitVec::from_u64(((j >> q) & 1) ^ 1, 1));
        acc = and_bits(eng, acc, hq);
    }
    return acc;
}

RssShare eq_test_all(Engine& eng, const RssShare& idx, size_t m) {
    const size_t lm = idx.width();
    if (m != (size_t(1) << lm)) throw std::invalid_argument("eq_test_all: m != 2^idx.width");
    auto plane = [&](size_t q) {
        // plane[j] = not(idx_q ^ bit_q(j)) = idx_q ^ not(bit_q(j))
        RssShare pl = RssShare::fan_each(idx.slice(q, 1), m);
        BitVec mask(m);
        for (size_t j = 0; j < m; j++)
            if (((j >> q) & 1) == 0) mask.set_bit(j, true);
        eng.add_const_inplace(pl, mask);
        return pl;
    };
    RssShare acc = plane(0);
    for (size_t q = 1; q < lm; q++) acc = and_bits(eng, acc, plane(q));
    return acc;
}

RssShare lt_compare(Engine& eng, const RssShare& x, const RssShare& t) {
    const size_t k = x.width();
    if (t.width() != k) throw std::invalid_argument("lt_compare: width mismatch");
    const BitVec one = BitVec::from_u64(1, 1);
    // lt(0) = !x_0 & t_0 ; lt(i) = (!x_i & t_i) ^ (!(x_i^t_i) & lt(i-1))
    RssShare nx = x.slice(0, 1);
    eng.add_const_inplace(nx, one);
    RssShare lt = and_bits(eng, nx, t.slice(0, 1));
    for (size_t i = 1; i < k; i++) {
        RssShare xi = x.slice(i, 1), ti = t.slice(i, 1);
        RssShare nxi = xi;
        eng.add_const_inplace(nxi, one);
        RssShare d = and_bits(eng, nxi, ti);
        RssShare e = xi ^ ti;
        eng.add_const_inplace(e, one);
        lt = d ^ and_bits(eng, e, lt);
    }
    return lt;
}

RssShare mux_index(Engine& eng, const RssShare& b, const RssShare& l, const RssShare& r) {
    RssShare diff = l ^ r;
    RssShare z = and_fan(eng, b, diff, diff.width());
    return r ^ z;
}

RssShare inner_product_bits(Engine& eng, const RssShare& x, const RssShare& v) {
    RssShare z = and_bits(eng, x, v);
    RssShare out(1);
    for (size_t i = 0; i < z.width(); i++) {
        if (z.own.bit(i)) out.own.flip_bit(0);
        if (z.prev.bit(i)) out.prev.flip_bit(0);
    }
    return out;
}

RssShare fold_segments(const RssShare& packed, size_t k) {
    RssShare out(k);
    for (size_t pos = 0; pos < packed.width(); pos += k) {
        out.own ^= packed.own.slice(pos, k);
        out.prev ^= packed.prev.slice(pos, k);
    }
    return out;
}

RssShare select_word(Engine& eng, const RssShare& xwords, const RssShare& v, size_t k) {
    RssShare prods = and_fan(eng, v, xwords, k);
    return fold_segments(prods, k);
}

// --- field triples ----------------------------------------------------------

void ensure_field_triples(Engine& eng, const FieldPtr& f, size_t count, CutChooseParams p) {
    auto& dq = eng.pools().field_triples[f->ell()];
    if (dq.size() >= count) return;
    Phase saved = eng.phase();
    eng.set_phase(Phase::OsPreprocess);
    size_t need = count - dq.size();
    const size_t bucket = p.bucket;
    size_t n_cand = need * bucket;
    size_t n_open = (n_cand + p.open_denom - 2) / (p.open_denom - 1);
    n_cand += n_open;
    const size_t ell = f->ell();

    std::vector<RssShare> a(n_cand), b(n_cand), c(n_cand);
    for (size_t i = 0; i < n_cand; i++) {
        a[i] = eng.rand_share(ell);
        b[i] = eng.rand_share(ell);
    }
    c = eng.mul_semi_batch(a, b, f.get(), FaultSite::TripleC);

    BitVec permseed = eng.coin(64);
    Rng prng(permseed.to_u64());
    std::vector<uint32_t> perm(n_cand);
    for (uint32_t i = 0; i < n_cand; i++) perm[i] = i;
    for (size_t i = n_cand; i > 1; i--) std::swap(perm[i - 1], perm[prng.below(i)]);

    std::vector<RssShare> open_list;
    for (size_t i = 0; i < n_open; i++) {
        open_list.push_back(a[perm[i]]);
        open_list.push_back(b[perm[i]]);
        open_list.push_back(c[perm[i]]);
    }
    auto opened = eng.open_batch(open_list);
    for (size_t i = 0; i < n_open; i++) {
        if (f->mul(opened[3 * i], opened[3 * i + 1]) != opened[3 * i + 2])
            throw ProtocolAbort("triple-open");
    }

    // sacrifice: check the first triple of each bucket with the others
    std::vector<RssShare> ef_list;
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    for (size_t bi = 0; bi < need; bi++) {
        uint32_t fi = perm[n_open + bi * bucket];
        for (size_t s = 1; s < bucket; s++) {
            uint32_t si = perm[n_open + bi * bucket + s];
            pairs.emplace_back(fi, si);
            ef_list.push_back(a[fi] ^ a[si]);
            ef_list.push_back(b[fi] ^ b[si]);
        }
    }
    auto efo = eng.open_batch(ef_list);
    for (size_t i = 0; i < pairs.size(); i++) {
        auto [fi, si] = pairs[i];
        const BitVec& e = efo[2 * i];
        const BitVec& fb = efo[2 * i + 1];
        RssShare w = c[fi] ^ c[si];
        w.own = w.own ^ f->mul(fb, a[si].own) ^ f->mul(e, b[si].own);
        w.prev = w.prev ^ f->mul(fb, a[si].prev) ^ f->mul(e, b[si].prev);
        eng.add_const_inplace(w, f->mul(e, fb));
        BitVec wv = eng.open(w, TAG_CHECK_OPEN);
        if (!wv.is_zero()) throw ProtocolAbort("triple-sacrifice");
    }
    for (size_t bi = 0; bi < need; bi++) {
        uint32_t fi = perm[n_open + bi * bucket];
        dq.push_back(FieldTriple{a[fi], b[fi], c[fi]});
    }
    eng.set_phase(saved);
}

FieldTriple take_field_triple(Engine& eng, const FieldPtr& f) {
    ensure_field_triples(eng, f, 1);
    auto& dq = eng.pools().field_triples[f->ell()];
    FieldTriple t = std::move(dq.front());
    dq.pop_front();
    return t;
}

RssShare beaver_mul_field(Engine& eng, const RssShare& x, const RssShare& y,
                          const FieldTriple& t, const FieldCtx& f) {
    std::array<RssShare, 2> efs = {x ^ t.a, y ^ t.b};
    auto ef = eng.open_batch(efs);
    const BitVec& e = ef[0];
    const BitVec& fb = ef[1];
    RssShare z = t.c;
    z.own = z.own ^ f.mul(fb, t.a.own) ^ f.mul(e, t.b.own);
    z.prev = z.prev ^ f.mul(fb, t.a.prev) ^ f.mul(e, t.b.prev);
    eng.add_const_inplace(z, f.mul(e, fb));
    return z;
}

} // namespace mostree
