#pragma once

#include <functional>
#include <optional>
#include <thread>

#include "mostree/rss.hpp"

namespace mostree {

// Outcome of driving three engines over an in-process network.
struct PartyOutcome {
    bool ok = true;
    std::string error;      // what() of the escaped exception
    std::string abort_site; // set when a ProtocolAbort escaped
};

struct RunResult {
    std::array<PartyOutcome, 3> party;
    std::array<ChannelStats, 3> stats;
    Digest256 transcript_digest{};
    std::vector<TranscriptEntry> transcript;

    bool completed() const { return party[0].ok && party[1].ok && party[2].ok; }
    // First protocol-abort site seen at any party (transport fallout ignored
    // when a real abort exists).
    std::string abort_site() const {
        for (const auto& p : party)
            if (!p.abort_site.empty()) return p.abort_site;
        for (const auto& p : party)
            if (!p.ok) return p.error;
        return "";
    }
};

struct RunOptions {
    uint64_t seed = 1;
    bool record_transcript = false;
    std::optional<FaultSpec> fault;
    bool setup_keyring = true;
};

// Runs fn(engine) on three threads over a LocalNetwork. Each party's seed is
// derived from (opts.seed, party). A party whose function throws is marked
// failed and its channels close, unblocking the others.
inline RunResult run_parties(const std::function<void(Engine&)>& fn, RunOptions opts = {}) {
    LocalNetwork net(65536, opts.record_transcript);
    RunResult res;
    std::array<std::thread, 3> threads;
    for (unsigned p = 0; p < 3; p++) {
        threads[p] = std::thread([&, p] {
            std::optional<FaultSpec> fault;
            if (opts.fault && opts.fault->party.v == p) fault = opts.fault;
            Engine eng(PartyId(p), net.endpoint(PartyId(p)),
                       opts.seed * 1000003ULL + 17 * p + 1, fault);
            try {
                if (opts.setup_keyring) eng.setup_keyring();
                fn(eng);
            } catch (const ProtocolAbort& e) {
                res.party[p].ok = false;
                res.party[p].error = e.what();
                res.party[p].abort_site = e.site;
                net.party_failed(PartyId(p));
            } catch (const std::exception& e) {
                res.party[p].ok = false;
                res.party[p].error = e.what();
                net.party_failed(PartyId(p));
            }
            res.stats[p] = net.endpoint(PartyId(p)).stats;
        });
    }
    for (auto& t : threads) t.join();
    if (auto* tr = net.transcript()) {
        res.transcript_digest = tr->digest();
        res.transcript = tr->entries();
    }
    return res;
}

} // namespace mostree
