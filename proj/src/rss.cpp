#include "mostree/rss.hpp"

#include <cstring>

namespace mostree {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    size_t n = out.size();
    out.resize(n + 4);
    std::memcpy(out.data() + n, &v, 4);
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    size_t n = out.size();
    out.resize(n + 8);
    std::memcpy(out.data() + n, &v, 8);
}

uint32_t get_u32(std::span<const uint8_t> in, size_t& off) {
    if (off + 4 > in.size()) throw ProtocolAbort("malformed-message");
    uint32_t v;
    std::memcpy(&v, in.data() + off, 4);
    off += 4;
    return v;
}

uint64_t get_u64(std::span<const uint8_t> in, size_t& off) {
    if (off + 8 > in.size()) throw ProtocolAbort("malformed-message");
    uint64_t v;
    std::memcpy(&v, in.data() + off, 8);
    off += 8;
    return v;
}

void put_bits(std::vector<uint8_t>& out, const BitVec& v) {
    auto b = v.to_bytes();
    out.insert(out.end(), b.begin(), b.end());
}

BitVec get_bits(std::span<const uint8_t> in, size_t& off, size_t width) {
    size_t nb = (width + 7) / 8;
    if (off + nb > in.size()) throw ProtocolAbort("malformed-message");
    BitVec v = BitVec::from_bytes(in.subspan(off, nb), width);
    off += nb;
    return v;
}

size_t TriplePools::available(size_t k) const {
    auto it = by_width.find(k);
    if (it == by_width.end()) return 0;
    size_t n = 0;
    for (const auto& b : it->second) n += b.cols - b.used;
    return n;
}

TripleBatch TriplePools::take(size_t k, size_t cols) {
    TripleBatch out;
    out.k = k;
    out.cols = cols;
    out.a = RssShare(cols);
    out.b = RssShare(cols * k);
    out.c = RssShare(cols * k);
    auto& dq = by_width[k];
    size_t got = 0;
    while (got < cols) {
        if (dq.empty()) throw std::logic_error("triple pool underflow");
        TripleBatch& f = dq.front();
        size_t n = std::min(cols - got, f.cols - f.used);
        out.a.paste(got, f.a.slice(f.used, n));
        out.b.paste(got * k, f.b.slice(f.used * k, n * k));
        out.c.paste(got * k, f.c.slice(f.used * k, n * k));
        f.used += n;
        got += n;
        if (f.used == f.cols) dq.pop_front();
    }
    return out;
}

Engine::Engine(PartyId me, Transport& tr, uint64_t seed, std::optional<FaultSpec> fault)
    : me_(me), tr_(tr), rng_(seed), faults_(me, std::move(fault)) {}

void Engine::setup_keyring() {
    Key128 mine = rng_.key128();
    tr_.send(me_.prev(), TAG_KEYRING, std::span<const uint8_t>(mine.data(), mine.size()));
    auto got = tr_.recv(me_.next(), TAG_KEYRING);
    if (got.size() != 16) throw ProtocolAbort("keyring");
    Key128 theirs;
    std::memcpy(theirs.data(), got.data(), 16);
    ring_.with_prev.emplace(mine);
    ring_.with_next.emplace(theirs);
}

void Engine::handshake(std::span<const uint8_t> params) {
    auto d = sha256(params);
    tr_.send(me_.next(), TAG_HANDSHAKE, d);
    tr_.send(me_.prev(), TAG_HANDSHAKE, d);
    auto a = tr_.recv(me_.prev(), TAG_HANDSHAKE);
    auto b = tr_.recv(me_.next(), TAG_HANDSHAKE);
    if (a.size() != d.size() || b.size() != d.size() ||
        std::memcmp(a.data(), d.data(), d.size()) != 0 ||
        std::memcmp(b.data(), d.data(), d.size()) != 0)
        throw ConfigError("parameter hash mismatch between parties");
}

namespace {
constexpr uint16_t kPrfRand = 1000;
constexpr uint16_t kPrfZero = 1001;
}

RssShare Engine::rand_share(size_t width) {
    if (!ring_.ready()) throw std::logic_error("keyring not set up");
    uint64_t c = prf_counter(kPrfRand);
    return RssShare(ring_.with_next->bits(kPrfRand, c, width),
                    ring_.with_prev->bits(kPrfRand, c, width));
}

BitVec Engine::zero_share(size_t width) {
    if (!ring_.ready()) throw std::logic_error("keyring not set up");
    uint64_t c = prf_counter(kPrfZero);
    return ring_.with_prev->bits(kPrfZero, c, width) ^ ring_.with_next->bits(kPrfZero, c, width);
}

BitVec Engine::open(const RssShare& x, uint16_t tag) {
    std::array<RssShare, 1> xs{x};
    return open_batch(xs, tag)[0];
}

std::vector<BitVec> Engine::open_batch(std::span<const RssShare> xs, uint16_t tag) {
    size_t total = 0;
    for (const auto& x : xs) total += x.width();
    // to prev: own legs (these complete prev's missing share); to next: prev legs
    std::vector<uint8_t> to_prev, to_next;
    for (const auto& x : xs) put_bits(to_prev, x.own);
    for (const auto& x : xs) put_bits(to_next, x.prev);
    BitVec e = faults_.take(FaultSite::OpenShare, total);
    if (!e.is_zero()) {
        // flip bits of the own-leg copies
        size_t bitpos = 0, byteoff = 0;
        for (const auto& x : xs) {
            for (size_t i = 0; i < x.width(); i++)
                if (e.bit(bitpos + i)) to_prev[byteoff + i / 8] ^= (uint8_t)(1u << (i % 8));
            bitpos += x.width();
            byteoff += (x.width() + 7) / 8;
        }
    }
    tr_.send(me_.prev(), tag, to_prev);
    tr_.send(me_.next(), tag, to_next);
    auto from_next = tr_.recv(me_.next(), tag); // next's own legs = leg (i+1)
    auto from_prev = tr_.recv(me_.prev(), tag); // prev's prev legs = leg (i+1)
    std::vector<BitVec> out;
    out.reserve(xs.size());
    size_t offa = 0, offb = 0;
    for (const auto& x : xs) {
        BitVec a = get_bits(from_next, offa, x.width());
        BitVec b = get_bits(from_prev, offb, x.width());
        if (a != b) throw ProtocolAbort("open-mismatch");
        out.push_back(x.own ^ x.prev ^ a);
    }
    if (offa != from_next.size() || offb != from_prev.size()) throw ProtocolAbort("open-malformed");
    return out;
}

BitVec Engine::coin(size_t width) {
    return open(rand_share(width));
}

BitVec Engine::coin_field_nonzero(const FieldCtx& f) {
    for (;;) {
        BitVec v = coin(f.ell());
        if (!v.is_zero()) return v;
    }
}

std::optional<BitVec> Engine::recon(const RssShare& x, PartyId to, uint16_t tag) {
    if (me_ == to) {
        auto a = tr_.recv(to.next(), tag);
        auto b = tr_.recv(to.prev(), tag);
        size_t o1 = 0, o2 = 0;
        BitVec va = get_bits(a, o1, x.width());
        BitVec vb = get_bits(b, o2, x.width());
        if (va != vb) throw ProtocolAbort("recon-mismatch");
        return x.own ^ x.prev ^ va;
    }
    // P_{to+1} holds the missing leg as own, P_{to+2} as prev.
    BitVec leg = (me_ == to.next()) ? x.own : x.prev;
    leg ^= faults_.take(FaultSite::ReconShare, x.width());
    std::vector<uint8_t> payload;
    put_bits(payload, leg);
    tr_.send(to, tag, payload);
    return std::nullopt;
}

RssShare Engine::share_input(size_t width, PartyId dealer, const BitVec* value) {
    std::array<BitVec, 1> vals;
    if (me_ == dealer) vals[0] = *value;
    return share_input_batch(width, dealer, std::span<const BitVec>(vals.data(), 1), 1)[0];
}

std::vector<RssShare> Engine::share_input_batch(size_t width, PartyId dealer,
                                                std::span<const BitVec> values, size_t count) {
    std::vector<RssShare> rs;
    rs.reserve(count);
    for (size_t i = 0; i < count; i++) rs.push_back(rand_share(width));

    // reconstruct the masks to the dealer
    if (me_ == dealer) {
        std::vector<BitVec> r(count);
        auto a = tr_.recv(dealer.next(), TAG_RECON);
        auto b = tr_.recv(dealer.prev(), TAG_RECON);
        size_t o1 = 0, o2 = 0;
        for (size_t i = 0; i < count; i++) {
            BitVec va = get_bits(a, o1, width);
            BitVec vb = get_bits(b, o2, width);
            if (va != vb) throw ProtocolAbort("recon-mismatch");
            r[i] = rs[i].own ^ rs[i].prev ^ va;
        }
        std::vector<uint8_t> deltas;
        for (size_t i = 0; i < count; i++) put_bits(deltas, values[i] ^ r[i]);
        std::vector<uint8_t> deltas2 = deltas;
        BitVec e = faults_.take(FaultSite::ShareDelta, width);
        if (!e.is_zero()) { // inconsistent broadcast: corrupt the copy sent to next
            for (size_t i = 0; i < width; i++)
                if (e.bit(i)) deltas2[i / 8] ^= (uint8_t)(1u << (i % 8));
        }
        tr_.send(dealer.next(), TAG_SHARE_DELTA, deltas2);
        tr_.send(dealer.prev(), TAG_SHARE_DELTA, deltas);
        size_t off = 0;
        for (size_t i = 0; i < count; i++) {
            BitVec d = get_bits(deltas, off, width);
            add_const_inplace(rs[i], d);
        }
    } else {
        std::vector<uint8_t> leg;
        for (size_t i = 0; i < count; i++)
            put_bits(leg, me_ == dealer.next() ? rs[i].own : rs[i].prev);
        tr_.send(dealer, TAG_RECON, leg);
        auto deltas = tr_.recv(dealer, TAG_SHARE_DELTA);
        // cross-check the broadcast with the other non-dealer
        PartyId other = (dealer.next() == me_) ? dealer.prev() : dealer.next();
        auto echo = sha256(deltas);
        tr_.send(other, TAG_SHARE_ECHO, echo);
        auto got = tr_.recv(other, TAG_SHARE_ECHO);
        if (got.size() != echo.size() || std::memcmp(got.data(), echo.data(), echo.size()) != 0)
            throw ProtocolAbort("share-delta-mismatch");
        size_t off = 0;
        for (size_t i = 0; i < count; i++) {
            BitVec d = get_bits(deltas, off, width);
            add_const_inplace(rs[i], d);
        }
        if (off != deltas.size()) throw ProtocolAbort("share-malformed");
    }
    return rs;
}

RssShare Engine::mul_semi(const RssShare& x, const RssShare& y, const FieldCtx* field,
                          FaultSite site) {
    std::array<RssShare, 1> xs{x}, ys{y};
    return mul_semi_batch(xs, ys, field, site)[0];
}

std::vector<RssShare> Engine::mul_semi_batch(std::span<const RssShare> xs,
                                             std::span<const RssShare> ys, const FieldCtx* field,
                                             FaultSite site) {
    auto prod = [&](const BitVec& a, const BitVec& b) {
        return field ? field->mul(a, b) : (a & b);
    };
    std::vector<BitVec> zown;
    std::vector<uint8_t> payload;
    zown.reserve(xs.size());
    for (size_t i = 0; i < xs.size(); i++) {
        const RssShare& x = xs[i];
        const RssShare& y = ys[i];
        BitVec t = prod(x.own, y.own) ^ prod(x.prev, y.own) ^ prod(x.own, y.prev);
        t ^= zero_share(x.width());
        t ^= faults_.take(site, x.width());
        put_bits(payload, t);
        zown.push_back(std::move(t));
    }
    tr_.send(me_.next(), TAG_MUL, payload);
    auto from_prev = tr_.recv(me_.prev(), TAG_MUL);
    std::vector<RssShare> out;
    out.reserve(xs.size());
    size_t off = 0;
    for (size_t i = 0; i < xs.size(); i++) {
        BitVec zprev = get_bits(from_prev, off, xs[i].width());
        out.emplace_back(std::move(zown[i]), std::move(zprev));
    }
    if (off != from_prev.size()) throw ProtocolAbort("mul-malformed");
    return out;
}

bool Engine::check_zero(const RssShare& x, const FieldCtx& f) {
    RssShare r = rand_share(f.ell());
    RssShare w = mul_semi(x, r, &f);
    BitVec v = open(w, TAG_CHECK_OPEN);
    return v.is_zero();
}

RssShare Engine::t2r_convert(PartyId dealer, const BitVec* leg0, const BitVec* leg1,
                             size_t width) {
    RssShare out(width);
    if (me_ == dealer) {
        out.own = *leg0;
        out.prev = *leg1;
    } else if (me_ == dealer.next()) { // holds additive share 0
        out.prev = *leg0;
    } else { // dealer.prev(), holds additive share 1
        out.own = *leg1;
    }
    return out;
}

RssShare Engine::const_share(const BitVec& v) const {
    RssShare s(v.len());
    add_const_inplace(s, v);
    return s;
}

void Engine::add_const_inplace(RssShare& x, const BitVec& c) const {
    // constant folded into leg 0, held by P0 (own) and P1 (prev)
    if (me_.v == 0) x.own ^= c;
    else if (me_.v == 1) x.prev ^= c;
}

void Engine::pending_push(RssShare supposed_zero) {
    pending_bits_ += supposed_zero.width();
    pending_.push_back(std::move(supposed_zero));
}

void Engine::flush_pending() {
    if (pending_.empty()) return;
    BitVec seed = coin(128);
    Key128 k{};
    auto sb = seed.to_bytes();
    std::memcpy(k.data(), sb.data(), std::min<size_t>(16, sb.size()));
    Prf prf(k);

    RssShare acc(64);
    uint64_t ctr = 0;
    std::vector<uint8_t> buf;
    for (const RssShare& s : pending_) {
        buf.resize(s.width() * 8);
        prf.bytes(2, ctr++, buf);
        for (size_t i = 0; i < s.width(); i++) {
            uint64_t m;
            std::memcpy(&m, buf.data() + 8 * i, 8);
            if (s.own.bit(i)) acc.own.data()[0] ^= m;
            if (s.prev.bit(i)) acc.prev.data()[0] ^= m;
        }
    }
    pending_.clear();
    pending_bits_ = 0;
    BitVec v = open(acc, TAG_CHECK_OPEN);
    if (!v.is_zero()) throw ProtocolAbort("and-verify");
}

} // namespace mostree
