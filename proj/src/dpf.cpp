#include "mostree/dpf.hpp"

#include <cstring>

namespace mostree {

namespace {

inline bool lsb(const Key128& s) { return s[0] & 1; }

inline Key128 clear_lsb(Key128 s) {
    s[0] &= 0xFE;
    return s;
}

inline Key128 xor_key(const Key128& a, const Key128& b) {
    Key128 o;
    for (int i = 0; i < 16; i++) o[i] = a[i] ^ b[i];
    return o;
}

struct Node {
    Key128 s{};
    bool t = false;
};

// one PRG doubling with the level correction applied under the control bit
inline void descend(const Node& in, const DpfKey::LevelCw& cw, Node& left, Node& right) {
    Key128 l, r;
    prg::double_seed(in.s.data(), l.data(), r.data());
    left.t = lsb(l);
    right.t = lsb(r);
    left.s = clear_lsb(l);
    right.s = clear_lsb(r);
    if (in.t) {
        left.s = xor_key(left.s, cw.scw);
        right.s = xor_key(right.s, cw.scw);
        left.t ^= cw.tl;
        right.t ^= cw.tr;
    }
}

BitVec convert_out(const Key128& s, size_t out_bits) {
    std::vector<uint8_t> buf((out_bits + 7) / 8);
    prg::convert(s.data(), buf);
    return BitVec::from_bytes(buf, out_bits);
}

// leaf binding hash: position, seed and control bit
Digest256 leaf_hash(uint64_t x, const Node& n) {
    Sha256 h;
    h.update_u64(x);
    h.update(std::span<const uint8_t>(n.s.data(), n.s.size()));
    uint8_t t = n.t ? 1 : 0;
    h.update(std::span<const uint8_t>(&t, 1));
    return h.finish();
}

inline Digest256 xor_digest(Digest256 a, const Digest256& b) {
    for (size_t i = 0; i < a.size(); i++) a[i] ^= b[i];
    return a;
}

} // namespace

std::pair<DpfKey, DpfKey> dpf_gen(const PointFunction& f, Rng& rng) {
    if (f.domain_bits == 0 || f.domain_bits > 63)
        throw std::invalid_argument("dpf_gen: domain_bits out of range");
    if (f.alpha >> f.domain_bits)
        throw std::invalid_argument("dpf_gen: alpha outside the domain");
    const size_t n = f.domain_bits;

    DpfKey k0, k1;
    k0.evaluator = 0;
    k1.evaluator = 1;
    k0.domain_bits = k1.domain_bits = (uint8_t)n;
    k0.out_bits = k1.out_bits = (uint16_t)f.beta.len();
    k0.seed = rng.key128();
    k1.seed = rng.key128();
    k0.seed[0] &= 0xFE;
    k1.seed[0] &= 0xFE;

    Node a{k0.seed, false}, b{k1.seed, true}; // control bits differ at the root
    for (size_t lvl = 0; lvl < n; lvl++) {
        bool bit = (f.alpha >> (n - 1 - lvl)) & 1;
        Key128 l0, r0, l1, r1;
        prg::double_seed(a.s.data(), l0.data(), r0.data());
        prg::double_seed(b.s.data(), l1.data(), r1.data());
        // correction keeps the lose-side seeds identical and the keep-side
        // control bits complementary
        Key128 lose0 = bit ? l0 : r0, lose1 = bit ? l1 : r1;
        DpfKey::LevelCw cw;
        cw.scw = clear_lsb(xor_key(lose0, lose1));
        bool tl0 = lsb(l0), tl1 = lsb(l1), tr0 = lsb(r0), tr1 = lsb(r1);
        cw.tl = tl0 ^ tl1 ^ bit ^ 1;
        cw.tr = tr0 ^ tr1 ^ bit;
        k0.cw.push_back(cw);
        k1.cw.push_back(cw);

        Node na, nb;
        Key128 keep0 = bit ? r0 : l0, keep1 = bit ? r1 : l1;
        bool tkeep0 = bit ? tr0 : tl0, tkeep1 = bit ? tr1 : tl1;
        bool tkcw = bit ? cw.tr : cw.tl;
        na.s = clear_lsb(keep0);
        nb.s = clear_lsb(keep1);
        if (a.t) na.s = xor_key(na.s, cw.scw);
        if (b.t) nb.s = xor_key(nb.s, cw.scw);
        na.t = tkeep0 ^ (a.t && tkcw);
        nb.t = tkeep1 ^ (b.t && tkcw);
        a = na;
        b = nb;
    }
    // output correction: shares at alpha must XOR to beta
    BitVec w0 = convert_out(a.s, f.beta.len());
    BitVec w1 = convert_out(b.s, f.beta.len());
    k0.final_cw = k1.final_cw = w0 ^ w1 ^ f.beta;
    // proof correction: the two leaf hashes at alpha must cancel
    Digest256 h0 = leaf_hash(f.alpha, a), h1 = leaf_hash(f.alpha, b);
    k0.proof_cw = k1.proof_cw = xor_digest(h0, h1);
    return {std::move(k0), std::move(k1)};
}

namespace {
Node eval_path(const DpfKey& k, uint64_t x) {
    Node cur{k.seed, k.evaluator == 1};
    for (size_t lvl = 0; lvl < k.domain_bits; lvl++) {
        Node l, r;
        descend(cur, k.cw[lvl], l, r);
        cur = ((x >> (k.domain_bits - 1 - lvl)) & 1) ? r : l;
    }
    return cur;
}
} // namespace

BitVec dpf_eval(const DpfKey& k, uint64_t x) {
    if (x >> k.domain_bits) throw std::invalid_argument("dpf_eval: x outside the domain");
    Node leaf = eval_path(k, x);
    BitVec w = convert_out(leaf.s, k.out_bits);
    if (leaf.t) w ^= k.final_cw;
    return w;
}

BatchEvalOut vdpf_batch_eval(const DpfKey& k) {
    const size_t n = k.domain_bits;
    const size_t m = size_t(1) << n;
    std::vector<Node> level{Node{k.seed, k.evaluator == 1}};
    level.reserve(m);
    for (size_t lvl = 0; lvl < n; lvl++) {
        std::vector<Node> next(level.size() * 2);
        for (size_t i = 0; i < level.size(); i++)
            descend(level[i], k.cw[lvl], next[2 * i], next[2 * i + 1]);
        level = std::move(next);
    }
    BatchEvalOut out;
    out.shares.reserve(m);
    Sha256 stream;
    for (size_t x = 0; x < m; x++) {
        BitVec w = convert_out(level[x].s, k.out_bits);
        if (level[x].t) w ^= k.final_cw;
        out.shares.push_back(std::move(w));
        Digest256 p = leaf_hash(x, level[x]);
        if (level[x].t) p = xor_digest(p, k.proof_cw);
        stream.update(p);
    }
    out.proof = stream.finish();
    return out;
}

std::vector<uint8_t> DpfKey::serialize() const {
    std::vector<uint8_t> out;
    out.push_back(1); // version
    out.push_back(evaluator);
    out.push_back(domain_bits);
    out.push_back((uint8_t)(out_bits & 0xFF));
    out.push_back((uint8_t)(out_bits >> 8));
    out.insert(out.end(), seed.begin(), seed.end());
    for (const auto& c : cw) {
        out.insert(out.end(), c.scw.begin(), c.scw.end());
        out.push_back((uint8_t)(c.tl | (c.tr << 1)));
    }
    auto fb = final_cw.to_bytes();
    out.insert(out.end(), fb.begin(), fb.end());
    out.insert(out.end(), proof_cw.begin(), proof_cw.end());
    return out;
}

DpfKey DpfKey::parse(std::span<const uint8_t> blob) {
    size_t need = 5;
    if (blob.size() < need) throw DpfParseError("truncated header");
    if (blob[0] != 1) throw DpfParseError("bad version");
    DpfKey k;
    k.evaluator = blob[1];
    k.domain_bits = blob[2];
    k.out_bits = (uint16_t)(blob[3] | (blob[4] << 8));
    if (k.evaluator > 1 || k.domain_bits == 0 || k.domain_bits > 63 || k.out_bits == 0)
        throw DpfParseError("bad parameters");
    size_t off = 5;
    size_t fb = ((size_t)k.out_bits + 7) / 8;
    need = off + 16 + k.domain_bits * 17 + fb + 32;
    if (blob.size() != need) throw DpfParseError("bad length");
    std::memcpy(k.seed.data(), blob.data() + off, 16);
    off += 16;
    for (size_t i = 0; i < k.domain_bits; i++) {
        LevelCw c;
        std::memcpy(c.scw.data(), blob.data() + off, 16);
        off += 16;
        uint8_t flags = blob[off++];
        if (flags & ~3u) throw DpfParseError("bad flags");
        c.tl = flags & 1;
        c.tr = flags & 2;
        k.cw.push_back(c);
    }
    k.final_cw = BitVec::from_bytes(blob.subspan(off, fb), k.out_bits);
    off += fb;
    std::memcpy(k.proof_cw.data(), blob.data() + off, 32);
    return k;
}

size_t DpfKey::bit_size() const {
    return serialize().size() * 8;
}

} // namespace mostree
