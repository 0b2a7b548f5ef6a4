#include "mostree/prf.hpp"

#include <cstring>
#include <stdexcept>

#include <openssl/evp.h>
#include <openssl/sha.h>

namespace mostree {

namespace {

EVP_CIPHER_CTX* make_aes_ctx(const uint8_t key[16]) {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx || EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key, nullptr) != 1)
        throw std::runtime_error("prf: AES init failed");
    EVP_CIPHER_CTX_set_padding(ctx, 0);
    return ctx;
}

inline void aes_block(EVP_CIPHER_CTX* ctx, const uint8_t in[16], uint8_t out[16]) {
    int outl = 0;
    if (EVP_EncryptUpdate(ctx, out, &outl, in, 16) != 1 || outl != 16)
        throw std::runtime_error("prf: AES block failed");
}

} // namespace

Prf::Prf(const Key128& key) : ctx_(make_aes_ctx(key.data())) {}

Prf::~Prf() {
    if (ctx_) EVP_CIPHER_CTX_free((EVP_CIPHER_CTX*)ctx_);
}

Prf::Prf(Prf&& o) noexcept : ctx_(o.ctx_) { o.ctx_ = nullptr; }

Prf& Prf::operator=(Prf&& o) noexcept {
    if (this != &o) {
        if (ctx_) EVP_CIPHER_CTX_free((EVP_CIPHER_CTX*)ctx_);
        ctx_ = o.ctx_;
        o.ctx_ = nullptr;
    }
    return *this;
}

void Prf::bytes(uint64_t tweak, uint64_t counter, std::span<uint8_t> out) const {
    uint8_t in[16], blk[16];
    std::memcpy(in, &tweak, 8);
    size_t off = 0;
    uint32_t blkidx = 0;
    while (off < out.size()) {
        uint64_t lo = counter ^ ((uint64_t)blkidx << 48);
        std::memcpy(in + 8, &lo, 8);
        aes_block((EVP_CIPHER_CTX*)ctx_, in, blk);
        size_t n = std::min<size_t>(16, out.size() - off);
        std::memcpy(out.data() + off, blk, n);
        off += n;
        blkidx++;
    }
}

BitVec Prf::bits(uint64_t tweak, uint64_t counter, size_t width) const {
    std::vector<uint8_t> buf((width + 7) / 8);
    bytes(tweak, counter, buf);
    return BitVec::from_bytes(buf, width);
}

Rng::Rng(uint64_t seed)
    : prf_([&] {
          Key128 k{};
          std::memcpy(k.data(), &seed, 8);
          uint64_t mixed = seed * 0x9e3779b97f4a7c15ULL + 0xd1b54a32d192ed03ULL;
          std::memcpy(k.data() + 8, &mixed, 8);
          return k;
      }()) {}

uint64_t Rng::next_u64() {
    uint8_t buf[8];
    prf_.bytes(0, ctr_++, buf);
    uint64_t v;
    std::memcpy(&v, buf, 8);
    return v;
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do { v = next_u64(); } while (v >= lim);
    return v % n;
}

BitVec Rng::bits(size_t width) {
    return prf_.bits(1, ctr_++, width);
}

void Rng::bytes(std::span<uint8_t> out) {
    prf_.bytes(1, ctr_++, out);
}

Key128 Rng::key128() {
    Key128 k;
    bytes(std::span<uint8_t>(k.data(), k.size()));
    return k;
}

namespace prg {

namespace {
// Arbitrary fixed constants; the MMO hashes only need distinct fixed keys.
const Key128 kKeyLeft = {0x4d, 0x4f, 0x53, 0x54, 0x52, 0x45, 0x45, 0x00,
                         0x70, 0x72, 0x67, 0x2d, 0x6c, 0x65, 0x66, 0x74};
const Key128 kKeyRight = {0x4d, 0x4f, 0x53, 0x54, 0x52, 0x45, 0x45, 0x01,
                          0x70, 0x72, 0x67, 0x2d, 0x72, 0x67, 0x68, 0x74};
const Key128 kKeyConv = {0x4d, 0x4f, 0x53, 0x54, 0x52, 0x45, 0x45, 0x02,
                         0x70, 0x72, 0x67, 0x2d, 0x63, 0x6f, 0x6e, 0x76};

EVP_CIPHER_CTX* tl_ctx(const Key128& key) {
    thread_local struct Holder {
        EVP_CIPHER_CTX* left = nullptr;
        EVP_CIPHER_CTX* right = nullptr;
        EVP_CIPHER_CTX* conv = nullptr;
        ~Holder() {
            if (left) EVP_CIPHER_CTX_free(left);
            if (right) EVP_CIPHER_CTX_free(right);
            if (conv) EVP_CIPHER_CTX_free(conv);
        }
    } h;
    EVP_CIPHER_CTX** slot = key == kKeyLeft ? &h.left : key == kKeyRight ? &h.right : &h.conv;
    if (!*slot) *slot = make_aes_ctx(key.data());
    return *slot;
}
} // namespace

void double_seed(const uint8_t seed[16], uint8_t left[16], uint8_t right[16]) {
    aes_block(tl_ctx(kKeyLeft), seed, left);
    aes_block(tl_ctx(kKeyRight), seed, right);
    for (int i = 0; i < 16; i++) {
        left[i] ^= seed[i];
        right[i] ^= seed[i];
    }
}

void convert(const uint8_t seed[16], std::span<uint8_t> out) {
    EVP_CIPHER_CTX* ctx = tl_ctx(kKeyConv);
    uint8_t in[16], blk[16];
    size_t off = 0;
    uint32_t i = 0;
    while (off < out.size()) {
        std::memcpy(in, seed, 16);
        in[0] ^= (uint8_t)i;
        in[1] ^= (uint8_t)(i >> 8);
        in[2] ^= (uint8_t)(i >> 16);
        aes_block(ctx, in, blk);
        size_t n = std::min<size_t>(16, out.size() - off);
        for (size_t j = 0; j < n; j++) out[off + j] = blk[j] ^ in[j];
        off += n;
        i++;
    }
}

} // namespace prg

Digest256 sha256(std::span<const uint8_t> data) {
    Digest256 d;
    SHA256(data.data(), data.size(), d.data());
    return d;
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex((EVP_MD_CTX*)ctx_, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: init failed");
}

Sha256::~Sha256() {
    if (ctx_) EVP_MD_CTX_free((EVP_MD_CTX*)ctx_);
}

void Sha256::update(std::span<const uint8_t> data) {
    if (EVP_DigestUpdate((EVP_MD_CTX*)ctx_, data.data(), data.size()) != 1)
        throw std::runtime_error("sha256: update failed");
}

void Sha256::update_u64(uint64_t v) {
    uint8_t buf[8];
    std::memcpy(buf, &v, 8);
    update(buf);
}

Digest256 Sha256::finish() {
    Digest256 d;
    unsigned len = 0;
    if (EVP_DigestFinal_ex((EVP_MD_CTX*)ctx_, d.data(), &len) != 1 || len != 32)
        throw std::runtime_error("sha256: final failed");
    return d;
}

} // namespace mostree
