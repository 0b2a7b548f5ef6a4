#pragma once

#include <cstdint>
#include <cstddef>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace mostree {

// Variable-width bit vector over 64-bit words, bit 0 = LSB of word 0.
// Addition is bitwise XOR. All arithmetic preserves the length; bits above
// len() are kept zero (class invariant).
class BitVec {
public:
    BitVec() : len_(0) {}
    explicit BitVec(size_t len) : w_((len + 63) / 64, 0), len_(len) {}

    static BitVec from_u64(uint64_t v, size_t len) {
        BitVec b(len);
        if (!b.w_.empty()) b.w_[0] = v;
        b.trim();
        return b;
    }

    static BitVec from_bytes(std::span<const uint8_t> bytes, size_t len) {
        BitVec b(len);
        size_t need = (len + 7) / 8;
        if (bytes.size() < need) need = bytes.size();
        std::memcpy(b.w_.data(), bytes.data(), need);
        b.trim();
        return b;
    }

    static BitVec ones(size_t len) {
        BitVec b(len);
        for (auto& w : b.w_) w = ~0ULL;
        b.trim();
        return b;
    }

    size_t len() const { return len_; }
    size_t word_count() const { return w_.size(); }
    bool empty() const { return len_ == 0; }

    uint64_t word(size_t i) const { return i < w_.size() ? w_[i] : 0; }
    uint64_t* data() { return w_.data(); }
    const uint64_t* data() const { return w_.data(); }

    bool bit(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
    void set_bit(size_t i, bool v) {
        uint64_t m = 1ULL << (i & 63);
        if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
    }
    void flip_bit(size_t i) { w_[i >> 6] ^= 1ULL << (i & 63); }

    bool is_zero() const {
        for (uint64_t w : w_) if (w) return false;
        return true;
    }

    uint64_t to_u64() const { return w_.empty() ? 0 : w_[0]; }

    BitVec& operator^=(const BitVec& o) {
        for (size_t i = 0; i < w_.size() && i < o.w_.size(); i++) w_[i] ^= o.w_[i];
        trim();
        return *this;
    }
    friend BitVec operator^(BitVec a, const BitVec& b) { a ^= b; return a; }

    BitVec& operator&=(const BitVec& o) {
        for (size_t i = 0; i < w_.size(); i++) w_[i] &= (i < o.w_.size() ? o.w_[i] : 0);
        return *this;
    }
    friend BitVec operator&(BitVec a, const BitVec& b) { a &= b; return a; }

    bool operator==(const BitVec& o) const { return len_ == o.len_ && w_ == o.w_; }
    bool operator!=(const BitVec& o) const { return !(*this == o); }

    // Bits [pos, pos+n) as a new vector.
    BitVec slice(size_t pos, size_t n) const {
        BitVec out(n);
        for (size_t i = 0; i < n; i++)
            if (bit(pos + i)) out.set_bit(i, true);
        return out;
    }

    // Overwrite bits [pos, pos+src.len()) with src.
    void paste(size_t pos, const BitVec& src) {
        for (size_t i = 0; i < src.len(); i++) set_bit(pos + i, src.bit(i));
    }

    // src repeated bit-by-bit: each input bit expanded to k copies.
    static BitVec fan_each(const BitVec& src, size_t k) {
        BitVec out(src.len() * k);
        for (size_t i = 0; i < src.len(); i++) {
            if (!src.bit(i)) continue;
            for (size_t j = 0; j < k; j++) out.set_bit(i * k + j, true);
        }
        return out;
    }

    // Single bit replicated to width k.
    static BitVec fan_bit(bool b, size_t k) {
        return b ? ones(k) : BitVec(k);
    }

    // out[j] = in[j ^ delta]; len must be a power of two and delta < len.
    BitVec xor_permute(uint64_t delta) const {
        BitVec out(len_);
        for (size_t j = 0; j < len_; j++)
            if (bit(j ^ delta)) out.set_bit(j, true);
        return out;
    }

    size_t popcount() const {
        size_t c = 0;
        for (uint64_t w : w_) c += (size_t)__builtin_popcountll(w);
        return c;
    }

    std::vector<uint8_t> to_bytes() const {
        std::vector<uint8_t> out((len_ + 7) / 8);
        std::memcpy(out.data(), w_.data(), out.size());
        return out;
    }

    // Concatenation: other appended above this vector's bits.
    static BitVec concat(const BitVec& lo, const BitVec& hi) {
        BitVec out(lo.len() + hi.len());
        out.paste(0, lo);
        out.paste(lo.len(), hi);
        return out;
    }

    std::string to_hex() const {
        static const char* d = "0123456789abcdef";
        std::string s;
        auto bytes = to_bytes();
        for (auto it = bytes.rbegin(); it != bytes.rend(); ++it) {
            s.push_back(d[*it >> 4]);
            s.push_back(d[*it & 0xf]);
        }
        return s.empty() ? "0" : s;
    }

private:
    void trim() {
        if (len_ & 63) {
            uint64_t mask = (1ULL << (len_ & 63)) - 1;
            if (!w_.empty()) w_.back() &= mask;
        }
    }

    std::vector<uint64_t> w_;
    size_t len_;
};

} // namespace mostree
