#include "mostree/gf2.hpp"

#include <cstdio>
#include <map>
#include <mutex>
#include <set>

namespace mostree {

namespace {

// Carry-less 64x64 -> 128 multiply, 4-bit windows.
inline void clmul64(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
    uint64_t tl[16], th[16];
    tl[0] = 0; th[0] = 0;
    tl[1] = a; th[1] = 0;
    for (int i = 2; i < 16; i += 2) {
        th[i] = (th[i / 2] << 1) | (tl[i / 2] >> 63);
        tl[i] = tl[i / 2] << 1;
        th[i + 1] = th[i];
        tl[i + 1] = tl[i] ^ a;
    }
    hi = 0; lo = 0;
    for (int nib = 15; nib >= 0; nib--) {
        hi = (hi << 4) | (lo >> 60);
        lo <<= 4;
        unsigned idx = (b >> (4 * nib)) & 15;
        lo ^= tl[idx];
        hi ^= th[idx];
    }
}

// Schoolbook carry-less product (na, nb words) into out (na+nb words).
void clmul_vec(const uint64_t* a, size_t na, const uint64_t* b, size_t nb,
               std::vector<uint64_t>& out) {
    out.assign(na + nb, 0);
    for (size_t i = 0; i < na; i++) {
        if (!a[i]) continue;
        for (size_t j = 0; j < nb; j++) {
            if (!b[j]) continue;
            uint64_t hi, lo;
            clmul64(a[i], b[j], hi, lo);
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
}

// xor chunk (bit p of chunk lands at absolute position pos+p) into v.
// pos may be negative when the low bits of chunk are known zero.
inline void xor_shifted(std::vector<uint64_t>& v, uint64_t chunk, long pos) {
    if (!chunk) return;
    if (pos >= 0) {
        size_t wi = (size_t)pos >> 6, sh = (size_t)pos & 63;
        if (wi < v.size()) v[wi] ^= chunk << sh;
        if (sh && wi + 1 < v.size()) v[wi + 1] ^= chunk >> (64 - sh);
    } else {
        v[0] ^= chunk >> (-pos);
    }
}

using WPoly = std::vector<uint64_t>;

int wdeg(const WPoly& p) {
    for (size_t i = p.size(); i-- > 0;)
        if (p[i]) return (int)(i * 64 + 63 - __builtin_clzll(p[i]));
    return -1;
}

// In-place reduction of v modulo f (degree df, any density): each 64-bit
// chunk of coefficients above df is folded down with one carry-less multiply
// by g = f - X^df.
void wreduce(WPoly& v, const WPoly& g, int df) {
    const size_t gw = g.size();
    for (size_t wi = v.size(); wi-- > 0;) {
        long base = (long)wi * 64;
        if (base + 63 < df) break;
        for (;;) {
            uint64_t chunk = v[wi];
            if (base < df) chunk &= ~((1ULL << (df - base)) - 1);
            if (!chunk) break;
            v[wi] ^= chunk;
            long s = base - df;
            for (size_t j = 0; j < gw; j++) {
                if (!g[j]) continue;
                uint64_t hi, lo;
                clmul64(chunk, g[j], hi, lo);
                xor_shifted(v, lo, s + (long)j * 64);
                xor_shifted(v, hi, s + (long)j * 64 + 64);
            }
        }
    }
}

WPoly to_words(const BitVec& b) {
    WPoly w(b.word_count());
    for (size_t i = 0; i < w.size(); i++) w[i] = b.word(i);
    if (w.empty()) w.push_back(0);
    return w;
}

BitVec from_words(const WPoly& w, size_t len) {
    BitVec out(len);
    size_t n = std::min(w.size(), out.word_count());
    std::memcpy(out.data(), w.data(), n * 8);
    if (len & 63) out.data()[out.word_count() - 1] &= (1ULL << (len & 63)) - 1;
    return out;
}

WPoly g_of(const WPoly& f, int df) {
    WPoly g = f;
    g[(size_t)df >> 6] &= ~(1ULL << (df & 63));
    while (g.size() > 1 && g.back() == 0) g.pop_back();
    return g;
}

const uint16_t* spread_table() {
    static uint16_t tab[256];
    static std::once_flag once;
    std::call_once(once, [] {
        for (unsigned b = 0; b < 256; b++) {
            uint16_t s = 0;
            for (int i = 0; i < 8; i++)
                if (b & (1u << i)) s |= (uint16_t)(1u << (2 * i));
            tab[b] = s;
        }
    });
    return tab;
}

// a(X)^2 = a(X^2): interleave zeros between coefficients.
WPoly wsqr(const WPoly& a) {
    const uint16_t* tab = spread_table();
    WPoly out(a.size() * 2, 0);
    for (size_t i = 0; i < a.size(); i++) {
        uint64_t w = a[i];
        uint64_t lo = (uint64_t)tab[w & 0xff] | ((uint64_t)tab[(w >> 8) & 0xff] << 16) |
                      ((uint64_t)tab[(w >> 16) & 0xff] << 32) |
                      ((uint64_t)tab[(w >> 24) & 0xff] << 48);
        uint64_t hi = (uint64_t)tab[(w >> 32) & 0xff] | ((uint64_t)tab[(w >> 40) & 0xff] << 16) |
                      ((uint64_t)tab[(w >> 48) & 0xff] << 32) |
                      ((uint64_t)tab[(w >> 56) & 0xff] << 48);
        out[2 * i] = lo;
        out[2 * i + 1] = hi;
    }
    return out;
}

WPoly wmod(WPoly a, const WPoly& f) {
    int df = wdeg(f);
    WPoly g = g_of(f, df);
    wreduce(a, g, df);
    a.resize(std::max<size_t>(1, ((size_t)df + 63) / 64));
    return a;
}

WPoly wgcd(WPoly a, WPoly b) {
    while (wdeg(b) >= 0) {
        WPoly r = wmod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

std::once_flag toy_warn_flag;

} // namespace

namespace poly {

int degree(const BitVec& p) {
    return wdeg(to_words(p));
}

BitVec mod(const BitVec& a, const BitVec& f) {
    int df = wdeg(to_words(f));
    WPoly r = wmod(to_words(a), to_words(f));
    return from_words(r, df > 0 ? (size_t)df : 1);
}

BitVec gcd(BitVec a, BitVec b) {
    WPoly g = wgcd(to_words(a), to_words(b));
    int d = wdeg(g);
    return from_words(g, d >= 0 ? (size_t)d + 1 : 1);
}

BitVec mulmod(const BitVec& a, const BitVec& b, const BitVec& f) {
    WPoly prod;
    clmul_vec(a.data(), a.word_count(), b.data(), b.word_count(), prod);
    WPoly r = wmod(std::move(prod), to_words(f));
    int df = wdeg(to_words(f));
    return from_words(r, (size_t)df);
}

bool is_irreducible(const BitVec& fb) {
    WPoly f = to_words(fb);
    int n = wdeg(f);
    if (n < 1) return false;
    if (!(f[0] & 1)) return n == 1; // divisible by X unless f = X
    if (n == 1) return true;

    std::set<int> primes;
    int m = n;
    for (int p = 2; p * p <= m; p++)
        while (m % p == 0) { primes.insert(p); m /= p; }
    if (m > 1) primes.insert(m);
    std::set<int> checkpoints;
    for (int p : primes) checkpoints.insert(n / p);

    WPoly g = g_of(f, n);
    size_t words = ((size_t)n + 63) / 64;
    WPoly x(words, 0);
    x[0] = 2;
    WPoly u = x;
    std::vector<WPoly> mid; // u at each checkpoint, gcd-checked only if the
                            // cheap end condition holds
    for (int i = 1; i <= n; i++) {
        WPoly s = wsqr(u);
        wreduce(s, g, n);
        s.resize(words);
        u = std::move(s);
        if (checkpoints.count(i)) mid.push_back(u);
    }
    if (u != x) return false;
    for (const WPoly& ui : mid) {
        WPoly diff = ui;
        diff[0] ^= 2;
        if (wdeg(wgcd(f, diff)) != 0) return false;
    }
    return true;
}

} // namespace poly

BitVec find_irreducible(size_t ell) {
    if (ell < 2) throw std::invalid_argument("find_irreducible: ell must be >= 2");
    auto make = [&](std::initializer_list<size_t> exps) {
        BitVec f(ell + 1);
        f.set_bit(ell, true);
        f.set_bit(0, true);
        for (size_t e : exps) f.set_bit(e, true);
        return f;
    };
    for (size_t a = 1; a < ell; a++) {
        BitVec f = make({a});
        if (poly::is_irreducible(f)) return f;
    }
    for (size_t c = 3; c < ell; c++)
        for (size_t b = 2; b < c; b++)
            for (size_t a = 1; a < b; a++) {
                BitVec f = make({a, b, c});
                if (poly::is_irreducible(f)) return f;
            }
    // Dense fallback, ascending over odd-weight low parts. Unreached for any
    // width that has an irreducible trinomial or pentanomial.
    for (uint64_t v = 3;; v += 2) {
        if (__builtin_popcountll(v) % 2 == 0) continue;
        BitVec f(ell + 1);
        f.set_bit(ell, true);
        for (int i = 0; i < 63; i++)
            if ((v >> i) & 1) f.set_bit((size_t)i, true);
        if (poly::is_irreducible(f)) return f;
        if (v > (1ULL << 40)) throw std::runtime_error("find_irreducible: search exhausted");
    }
}

FieldCtx::FieldCtx(size_t ell, BitVec modulus) : ell_(ell), modulus_(std::move(modulus)) {
    low_words_ = g_of(to_words(modulus_), (int)ell_);
}

std::shared_ptr<const FieldCtx> FieldCtx::get(size_t ell) {
    static std::mutex mu;
    static std::map<size_t, std::shared_ptr<const FieldCtx>> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(ell);
    if (it != cache.end()) return it->second;
    if (ell < 40) {
        std::call_once(toy_warn_flag, [] {
            std::fprintf(stderr,
                         "mostree: WARNING: field width below 40 bits gives weak error "
                         "detection; acceptable for tests only\n");
        });
    }
    auto ctx = std::shared_ptr<const FieldCtx>(new FieldCtx(ell, find_irreducible(ell)));
    cache.emplace(ell, ctx);
    return ctx;
}

std::shared_ptr<const FieldCtx> FieldCtx::with_modulus(const BitVec& f) {
    int d = poly::degree(f);
    if (d < 2) throw std::invalid_argument("FieldCtx: modulus degree must be >= 2");
    if (!poly::is_irreducible(f)) throw std::invalid_argument("FieldCtx: modulus is reducible");
    return std::shared_ptr<const FieldCtx>(new FieldCtx((size_t)d, f.slice(0, (size_t)d + 1)));
}

BitVec FieldCtx::mul(const BitVec& a, const BitVec& b) const {
    if (a.len() != ell_ || b.len() != ell_)
        throw std::invalid_argument("gf2: operand width != field width");
    std::vector<uint64_t> prod;
    clmul_vec(a.data(), a.word_count(), b.data(), b.word_count(), prod);
    wreduce(prod, low_words_, (int)ell_);
    BitVec out(ell_);
    std::memcpy(out.data(), prod.data(), std::min(prod.size(), out.word_count()) * 8);
    return out;
}

} // namespace mostree
