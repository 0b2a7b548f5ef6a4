#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mostree/prf.hpp"

namespace mostree {

struct PartyId {
    uint8_t v = 0;
    PartyId() = default;
    explicit constexpr PartyId(unsigned i) : v((uint8_t)i) {}
    PartyId next() const { return PartyId((v + 1u) % 3u); }
    PartyId prev() const { return PartyId((v + 2u) % 3u); }
    bool operator==(const PartyId&) const = default;
};

enum class Phase : uint8_t { Setup = 0, OsPreprocess = 1, Online = 2 };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Setup: return "setup";
        case Phase::OsPreprocess: return "os-preprocess";
        default: return "online";
    }
}

// Protocol step tags. A frame's session id is (tag, counter); counters are
// per (tag, directed channel) sequence numbers folded with the channel index
// so (tag, counter) pairs are never reused within a run.
enum Tag : uint16_t {
    TAG_KEYRING = 1,
    TAG_HANDSHAKE = 2,
    TAG_OPEN = 3,
    TAG_MUL = 4,
    TAG_RECON = 5,
    TAG_SHARE_DELTA = 6,
    TAG_SHARE_ECHO = 7,
    TAG_AND_NEXT = 8,
    TAG_AND_PREV = 9,
    TAG_CHECK_OPEN = 10,
    TAG_DPF_KEY = 11,
    TAG_DPF_COMMIT = 12,
    TAG_DPF_OPEN = 13,
    TAG_DPF_UNIT = 14,
    TAG_OS_RESHARE = 15,
    TAG_RECON_DELTA = 16,
    TAG_RECON_RESULT = 17,
    TAG_RESHARE_X = 18,
    TAG_APP = 19,
};

// 4-byte LE payload length, 2-byte tag, 8-byte counter, 1-byte sender.
constexpr size_t kFrameHeaderBytes = 15;

struct Frame {
    uint16_t tag = 0;
    uint64_t counter = 0;
    PartyId sender;
    std::vector<uint8_t> payload;
};

std::vector<uint8_t> encode_frame(const Frame& f);

struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& m) : std::runtime_error("transport: " + m) {}
};

// A detected protocol deviation; carries the check site that fired.
struct ProtocolAbort : std::runtime_error {
    explicit ProtocolAbort(std::string site_)
        : std::runtime_error("protocol abort at " + site_), site(std::move(site_)) {}
    std::string site;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error("config: " + m) {}
};

// Byte accounting per phase and peer; header bytes included.
struct ChannelStats {
    uint64_t sent_bytes[3][3] = {};   // [phase][peer]
    uint64_t recv_bytes[3][3] = {};
    uint64_t frames_sent[3][3] = {};
    uint64_t frames_recv[3][3] = {};
    uint64_t rounds = 0; // frames received

    uint64_t sent_total(Phase p) const {
        auto i = (size_t)p;
        return sent_bytes[i][0] + sent_bytes[i][1] + sent_bytes[i][2];
    }
    uint64_t recv_total(Phase p) const {
        auto i = (size_t)p;
        return recv_bytes[i][0] + recv_bytes[i][1] + recv_bytes[i][2];
    }
    uint64_t sent_all() const {
        return sent_total(Phase::Setup) + sent_total(Phase::OsPreprocess) + sent_total(Phase::Online);
    }
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(PartyId to, uint16_t tag, std::span<const uint8_t> payload) = 0;
    virtual std::vector<uint8_t> recv(PartyId from, uint16_t tag) = 0;

    ChannelStats stats;
    Phase phase = Phase::Setup;

protected:
    // seq[tag][peer] for each direction; folded into the wire counter as
    // counter = seq * 9 + src * 3 + dst.
    uint64_t next_send_counter(uint16_t tag, PartyId src, PartyId dst) {
        uint64_t seq = send_seq_[key(tag, dst)]++;
        return seq * 9 + src.v * 3 + dst.v;
    }
    uint64_t next_recv_counter(uint16_t tag, PartyId src, PartyId dst) {
        uint64_t seq = recv_seq_[key(tag, src)]++;
        return seq * 9 + src.v * 3 + dst.v;
    }

private:
    static uint32_t key(uint16_t tag, PartyId peer) { return ((uint32_t)tag << 2) | peer.v; }
    std::unordered_map<uint32_t, uint64_t> send_seq_, recv_seq_;
};

// Record of every frame that crossed the in-process network.
struct TranscriptEntry {
    PartyId src, dst;
    uint16_t tag;
    uint64_t counter;
    uint32_t payload_bytes;
};

class Transcript {
public:
    void add(const TranscriptEntry& e, std::span<const uint8_t> frame_bytes) {
        std::lock_guard<std::mutex> lk(mu_);
        entries_.push_back(e);
        auto& s = streams_[e.src.v][e.dst.v];
        s.insert(s.end(), frame_bytes.begin(), frame_bytes.end());
    }
    std::vector<TranscriptEntry> entries() const {
        std::lock_guard<std::mutex> lk(mu_);
        return entries_;
    }
    Digest256 digest() const {
        std::lock_guard<std::mutex> lk(mu_);
        Sha256 h;
        for (int s = 0; s < 3; s++)
            for (int d = 0; d < 3; d++) {
                h.update_u64(((uint64_t)s << 32) | (uint64_t)d);
                h.update_u64(streams_[s][d].size());
                h.update(streams_[s][d]);
            }
        return h.finish();
    }

private:
    mutable std::mutex mu_;
    std::vector<TranscriptEntry> entries_;
    std::vector<uint8_t> streams_[3][3];
};

class LocalTransport;

// Three-party in-process network: bounded FIFO queue per directed pair.
class LocalNetwork {
public:
    explicit LocalNetwork(size_t capacity = 65536, bool record = false);
    ~LocalNetwork();

    LocalTransport& endpoint(PartyId p);
    // Mark a party dead: its outgoing queues close (peers' recv fails after
    // drain) and its incoming queues become sinks so peers never block.
    void party_failed(PartyId p);

    Transcript* transcript() { return record_ ? &transcript_ : nullptr; }

private:
    friend class LocalTransport;
    struct Queue {
        std::mutex mu;
        std::condition_variable cv;
        std::deque<Frame> q;
        bool closed = false;
        bool sink = false;
    };
    Queue& chan(PartyId src, PartyId dst) { return chans_[src.v][dst.v]; }

    Queue chans_[3][3];
    size_t capacity_;
    bool record_;
    Transcript transcript_;
    std::vector<std::unique_ptr<LocalTransport>> endpoints_;
};

class LocalTransport : public Transport {
public:
    LocalTransport(LocalNetwork& net, PartyId me) : net_(net), me_(me) {}
    void send(PartyId to, uint16_t tag, std::span<const uint8_t> payload) override;
    std::vector<uint8_t> recv(PartyId from, uint16_t tag) override;

    // Generous guard against deadlocking a test run on a protocol bug.
    std::chrono::milliseconds recv_timeout{120000};

private:
    LocalNetwork& net_;
    PartyId me_;
};

} // namespace mostree
