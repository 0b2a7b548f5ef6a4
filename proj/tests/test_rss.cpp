#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>

#include "mostree/runner.hpp"

using namespace mostree;

namespace {

// Reconstruct a value from all three parties' share pairs and check Def.-2.1
// style pairwise consistency (each leg agrees between its two holders).
struct Collected {
    BitVec legs[3];
    bool consistent = true;
    BitVec value() const { return legs[0] ^ legs[1] ^ legs[2]; }
};

class ShareCollector {
public:
    void put(PartyId p, const RssShare& s) {
        std::lock_guard<std::mutex> lk(mu_);
        shares_[p.v] = s;
        count_++;
    }
    Collected get() const {
        Collected c;
        for (int i = 0; i < 3; i++) {
            // leg i: P_i own, P_{i+1} prev
            c.legs[i] = shares_[i].own;
            if (shares_[(i + 1) % 3].prev != shares_[i].own) c.consistent = false;
        }
        return c;
    }

private:
    mutable std::mutex mu_;
    RssShare shares_[3];
    int count_ = 0;
};

} // namespace

TEST_CASE("rand_share reconstructs consistently and distinct sids differ") {
    ShareCollector c1, c2;
    auto res = run_parties([&](Engine& eng) {
        RssShare a = eng.rand_share(32);
        RssShare b = eng.rand_share(32);
        c1.put(eng.me(), a);
        c2.put(eng.me(), b);
    });
    REQUIRE(res.completed());
    auto a = c1.get(), b = c2.get();
    CHECK(a.consistent);
    CHECK(b.consistent);
    CHECK(a.value() != b.value());
}

TEST_CASE("open returns the secret; public constants open to themselves") {
    auto res = run_parties([&](Engine& eng) {
        RssShare x = eng.const_share(BitVec::from_u64(0x2A, 8));
        BitVec v = eng.open(x);
        if (v.to_u64() != 0x2A) throw std::runtime_error("open wrong");
        RssShare r = eng.rand_share(16);
        BitVec rv = eng.open(r);
        BitVec rv2 = eng.coin(16); // coin = rand + open
        (void)rv;
        (void)rv2;
    });
    CHECK(res.completed());
}

TEST_CASE("open aborts when a corrupt party flips a transmitted share") {
    RunOptions opts;
    opts.fault = FaultSpec{FaultSite::OpenShare, PartyId(1), BitVec::from_u64(1, 8), 0};
    auto res = run_parties(
        [&](Engine& eng) {
            RssShare x = eng.const_share(BitVec::from_u64(0x55, 8));
            (void)eng.open(x);
        },
        opts);
    CHECK(!res.completed());
    CHECK(res.abort_site() == "open-mismatch");
}

TEST_CASE("coin agrees across parties and is bit-balanced") {
    std::array<std::vector<uint64_t>, 3> seen;
    auto res = run_parties([&](Engine& eng) {
        for (int i = 0; i < 1000; i++) {
            BitVec v = eng.coin(16);
            seen[eng.me().v].push_back(v.to_u64());
        }
    });
    REQUIRE(res.completed());
    CHECK(seen[0] == seen[1]);
    CHECK(seen[1] == seen[2]);
    // per-bit balance within 5 sigma
    for (int b = 0; b < 16; b++) {
        int ones = 0;
        for (uint64_t v : seen[0]) ones += (v >> b) & 1;
        CHECK(std::abs(ones - 500) < 79);
    }
}

TEST_CASE("recon delivers only to the target, cross-checked") {
    std::atomic<int> got{0};
    auto res = run_parties([&](Engine& eng) {
        RssShare x = eng.const_share(BitVec::from_u64(0xBEEF, 16));
        auto v = eng.recon(x, PartyId(2));
        if (eng.me().v == 2) {
            if (!v || v->to_u64() != 0xBEEF) throw std::runtime_error("recon wrong");
            got++;
        } else if (v) {
            throw std::runtime_error("non-target learned value");
        }
    });
    REQUIRE(res.completed());
    CHECK(got == 1);
}

TEST_CASE("recon aborts on a lying sender") {
    RunOptions opts;
    opts.fault = FaultSpec{FaultSite::ReconShare, PartyId(0), BitVec::from_u64(2, 16), 0};
    auto res = run_parties(
        [&](Engine& eng) {
            RssShare x = eng.const_share(BitVec::from_u64(0xBEEF, 16));
            (void)eng.recon(x, PartyId(2));
        },
        opts);
    CHECK(!res.completed());
    CHECK(res.abort_site() == "recon-mismatch");
}

TEST_CASE("share_input then open is the identity") {
    auto res = run_parties([&](Engine& eng) {
        BitVec secret = BitVec::from_u64(0x1234, 16);
        RssShare x = eng.share_input(16, PartyId(1), eng.me().v == 1 ? &secret : nullptr);
        BitVec v = eng.open(x);
        if (v.to_u64() != 0x1234) throw std::runtime_error("share/open mismatch");
        BitVec zero(16);
        RssShare z = eng.share_input(16, PartyId(0), eng.me().v == 0 ? &zero : nullptr);
        if (!eng.open(z).is_zero()) throw std::runtime_error("zero share mismatch");
    });
    CHECK(res.completed());
}

TEST_CASE("share_input aborts when dealer equivocates on delta") {
    RunOptions opts;
    opts.fault = FaultSpec{FaultSite::ShareDelta, PartyId(1), BitVec::from_u64(4, 16), 0};
    auto res = run_parties(
        [&](Engine& eng) {
            BitVec secret = BitVec::from_u64(7, 16);
            (void)eng.share_input(16, PartyId(1), eng.me().v == 1 ? &secret : nullptr);
        },
        opts);
    CHECK(!res.completed());
    CHECK(res.abort_site() == "share-delta-mismatch");
}

TEST_CASE("zero_share legs always cancel and vary by sid") {
    ShareCollector zc;
    std::array<BitVec, 3> z1, z2;
    auto res = run_parties([&](Engine& eng) {
        z1[eng.me().v] = eng.zero_share(64);
        z2[eng.me().v] = eng.zero_share(64);
    });
    REQUIRE(res.completed());
    CHECK((z1[0] ^ z1[1] ^ z1[2]).is_zero());
    CHECK((z2[0] ^ z2[1] ^ z2[2]).is_zero());
    CHECK(z1[0] != z2[0]);
}

TEST_CASE("mul_semi: bit truth table and additive fault contract") {
    // honest bit products
    auto res = run_parties([&](Engine& eng) {
        for (int xa = 0; xa < 2; xa++)
            for (int yb = 0; yb < 2; yb++) {
                RssShare x = eng.const_share(BitVec::from_u64(xa, 1));
                RssShare y = eng.const_share(BitVec::from_u64(yb, 1));
                RssShare z = eng.mul_semi(x, y);
                if (eng.open(z).to_u64() != (uint64_t)(xa & yb))
                    throw std::runtime_error("bit mul wrong");
            }
    });
    CHECK(res.completed());

    // injected fault e: opens to x*y ^ e (Lemma-2.1 shape), still consistent
    ShareCollector c;
    RunOptions opts;
    opts.fault = FaultSpec{FaultSite::MulReshare, PartyId(2), BitVec::from_u64(0b101, 8), 0};
    auto res2 = run_parties(
        [&](Engine& eng) {
            RssShare x = eng.const_share(BitVec::from_u64(0xFF, 8));
            RssShare y = eng.const_share(BitVec::from_u64(0x0F, 8));
            RssShare z = eng.mul_semi(x, y);
            c.put(eng.me(), z);
            BitVec v = eng.open(z);
            if (v.to_u64() != (0x0FULL ^ 0b101))
                throw std::runtime_error("additive attack shape wrong");
        },
        opts);
    CHECK(res2.completed());
    CHECK(c.get().consistent);
}

TEST_CASE("mul_semi over a field matches gf_mul of opened inputs") {
    auto f = FieldCtx::get(16);
    std::atomic<int> checked{0};
    auto res = run_parties([&](Engine& eng) {
        for (int i = 0; i < 1000; i++) {
            RssShare x = eng.rand_share(16), y = eng.rand_share(16);
            RssShare z = eng.mul_semi(x, y, f.get());
            BitVec xv = eng.open(x), yv = eng.open(y), zv = eng.open(z);
            if (zv != f->mul(xv, yv)) throw std::runtime_error("field mul mismatch");
            checked++;
        }
    });
    CHECK(res.completed());
    CHECK(checked == 3000);
}

TEST_CASE("check_zero: true on zero, false on nonzero whp, abort on tamper") {
    auto f8 = FieldCtx::get(8);
    std::atomic<int> false_pass{0};
    auto res = run_parties([&](Engine& eng) {
        RssShare z = eng.const_share(BitVec(8));
        if (!eng.check_zero(z, *f8)) throw std::runtime_error("zero rejected");
        int fp = 0;
        for (int i = 0; i < 2000; i++) {
            RssShare x = eng.const_share(BitVec::from_u64(1 + (i % 255), 8));
            if (eng.check_zero(x, *f8)) fp++;
        }
        if (eng.me().v == 0) false_pass = fp;
    });
    REQUIRE(res.completed());
    // analytic rate 1/256 per trial; 2000 trials -> mean ~7.8
    CHECK(false_pass < 30);

    RunOptions opts;
    opts.fault = FaultSpec{FaultSite::OpenShare, PartyId(0), BitVec::from_u64(1, 8), 0};
    auto res2 = run_parties(
        [&](Engine& eng) {
            RssShare z = eng.const_share(BitVec(8));
            if (eng.check_zero(z, *f8)) throw std::runtime_error("should have aborted");
        },
        opts);
    CHECK(!res2.completed());
}

TEST_CASE("t2r conversion: opens to the dealt secret with zero bytes moved") {
    ShareCollector c;
    auto res = run_parties([&](Engine& eng) {
        // dealer P2 deals additive legs of 0xAB; P0 holds leg0, P1 holds leg1
        BitVec leg0 = BitVec::from_u64(0x5C, 8);
        BitVec leg1 = leg0 ^ BitVec::from_u64(0xAB, 8);
        uint64_t before = eng.tr().stats.sent_all();
        RssShare x;
        switch (eng.me().v) {
            case 2: x = eng.t2r_convert(PartyId(2), &leg0, &leg1, 8); break;
            case 0: x = eng.t2r_convert(PartyId(2), &leg0, nullptr, 8); break;
            default: x = eng.t2r_convert(PartyId(2), nullptr, &leg1, 8); break;
        }
        if (eng.tr().stats.sent_all() != before)
            throw std::runtime_error("t2r moved bytes");
        c.put(eng.me(), x);
        BitVec v = eng.open(x);
        if (v.to_u64() != 0xAB) throw std::runtime_error("t2r wrong value");
    });
    REQUIRE(res.completed());
    CHECK(c.get().consistent);
}

TEST_CASE("rss linear ops preserve consistency over random circuits") {
    ShareCollector c;
    auto res = run_parties([&](Engine& eng) {
        Rng rng(99);
        RssShare acc = eng.rand_share(32);
        for (int depth = 0; depth < 5; depth++) {
            RssShare r = eng.rand_share(32);
            switch (rng.below(3)) {
                case 0: acc = acc ^ r; break;
                case 1: eng.add_const_inplace(acc, rng.bits(32)); break;
                default: acc = eng.mul_semi(acc, r); break;
            }
        }
        c.put(eng.me(), acc);
    });
    REQUIRE(res.completed());
    CHECK(c.get().consistent);
}

TEST_CASE("pending zero batch: passes when clean, aborts on any nonzero") {
    auto res = run_parties([&](Engine& eng) {
        for (int i = 0; i < 10; i++) eng.pending_push(eng.const_share(BitVec(17)));
        eng.flush_pending();
    });
    CHECK(res.completed());

    auto res2 = run_parties([&](Engine& eng) {
        for (int i = 0; i < 10; i++) eng.pending_push(eng.const_share(BitVec(17)));
        BitVec bad(17);
        bad.set_bit(13, true);
        eng.pending_push(eng.const_share(bad));
        eng.flush_pending();
    });
    CHECK(!res2.completed());
    CHECK(res2.abort_site() == "and-verify");
}

TEST_CASE("reconstructed rand_share samples are bit-balanced") {
    std::vector<uint64_t> vals;
    std::mutex mu;
    auto res = run_parties([&](Engine& eng) {
        for (int i = 0; i < 1000; i++) {
            RssShare r = eng.rand_share(32);
            BitVec v = eng.open(r);
            if (eng.me().v == 0) {
                std::lock_guard<std::mutex> lk(mu);
                vals.push_back(v.to_u64());
            }
        }
    });
    REQUIRE(res.completed());
    for (int b = 0; b < 32; b++) {
        int ones = 0;
        for (uint64_t v : vals) ones += (v >> b) & 1;
        CHECK(std::abs(ones - 500) < 79); // 5 sigma
    }
}
