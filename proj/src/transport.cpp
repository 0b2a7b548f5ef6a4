#include "mostree/transport.hpp"

#include <chrono>
#include <cstring>

namespace mostree {

std::vector<uint8_t> encode_frame(const Frame& f) {
    std::vector<uint8_t> out(kFrameHeaderBytes + f.payload.size());
    uint32_t len = (uint32_t)f.payload.size();
    std::memcpy(out.data(), &len, 4);
    std::memcpy(out.data() + 4, &f.tag, 2);
    std::memcpy(out.data() + 6, &f.counter, 8);
    out[14] = f.sender.v;
    std::memcpy(out.data() + kFrameHeaderBytes, f.payload.data(), f.payload.size());
    return out;
}

LocalNetwork::LocalNetwork(size_t capacity, bool record)
    : capacity_(capacity), record_(record) {
    for (unsigned i = 0; i < 3; i++)
        endpoints_.push_back(std::make_unique<LocalTransport>(*this, PartyId(i)));
}

LocalNetwork::~LocalNetwork() = default;

LocalTransport& LocalNetwork::endpoint(PartyId p) { return *endpoints_[p.v]; }

void LocalNetwork::party_failed(PartyId p) {
    for (unsigned other = 0; other < 3; other++) {
        if (other == p.v) continue;
        {
            auto& out = chan(p, PartyId(other));
            std::lock_guard<std::mutex> lk(out.mu);
            out.closed = true;
            out.cv.notify_all();
        }
        {
            auto& in = chan(PartyId(other), p);
            std::lock_guard<std::mutex> lk(in.mu);
            in.sink = true;
            in.cv.notify_all();
        }
    }
}

void LocalTransport::send(PartyId to, uint16_t tag, std::span<const uint8_t> payload) {
    Frame f;
    f.tag = tag;
    f.counter = next_send_counter(tag, me_, to);
    f.sender = me_;
    f.payload.assign(payload.begin(), payload.end());

    size_t wire = kFrameHeaderBytes + payload.size();
    stats.sent_bytes[(size_t)phase][to.v] += wire;
    stats.frames_sent[(size_t)phase][to.v]++;

    if (auto* t = net_.transcript()) {
        TranscriptEntry e{me_, to, tag, f.counter, (uint32_t)payload.size()};
        t->add(e, encode_frame(f));
    }

    auto& q = net_.chan(me_, to);
    std::unique_lock<std::mutex> lk(q.mu);
    q.cv.wait(lk, [&] { return q.sink || q.q.size() < net_.capacity_; });
    if (q.sink) return; // peer is gone; frame dropped, caller fails on its next recv
    q.q.push_back(std::move(f));
    q.cv.notify_all();
}

std::vector<uint8_t> LocalTransport::recv(PartyId from, uint16_t tag) {
    auto& q = net_.chan(from, me_);
    Frame f;
    {
        std::unique_lock<std::mutex> lk(q.mu);
        bool ok = q.cv.wait_for(lk, recv_timeout, [&] { return !q.q.empty() || q.closed; });
        if (!ok) throw TransportError("recv timeout");
        if (q.q.empty()) throw TransportError("channel closed");
        f = std::move(q.q.front());
        q.q.pop_front();
        q.cv.notify_all();
    }
    uint64_t expect = next_recv_counter(tag, from, me_);
    if (f.tag != tag || f.counter != expect || !(f.sender == from))
        throw ProtocolAbort("session-mismatch");

    size_t wire = kFrameHeaderBytes + f.payload.size();
    stats.recv_bytes[(size_t)phase][from.v] += wire;
    stats.frames_recv[(size_t)phase][from.v]++;
    stats.rounds++;
    return std::move(f.payload);
}

} // namespace mostree
