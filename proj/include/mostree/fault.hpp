#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mostree/bitvec.hpp"
#include "mostree/transport.hpp"

namespace mostree {

// Every adversarial deviation the protocol models. A corrupt party deviates
// at exactly one site per run (single-corruption model).
enum class FaultSite : uint8_t {
    MulReshare,   // additive error on the multiplication resharing message
    OsReshare,    // additive error on the oblivious-selection resharing
    MacAttach,    // additive error inside the MAC-generation multiplication
    OpenShare,    // flipped share copy during an open
    ReconShare,   // flipped share sent during a reconstruction
    ShareDelta,   // dealer broadcasts inconsistent delta in share_input
    DpfKeyClass,  // dealer distributes a malformed DPF key (class index)
    RdxShare,     // dealer shares rdx* != rdx alongside the DPF keys
    TripleC,      // corrupt candidate triple before cut-and-choose
};

const char* fault_site_name(FaultSite s);
std::optional<FaultSite> fault_site_from_name(const std::string& name);

struct FaultSpec {
    FaultSite site = FaultSite::MulReshare;
    PartyId party;
    BitVec value;            // error bits; resized to the op width when applied
    uint64_t occurrence = 0; // which invocation of the site fires (0-based)
    int dpf_class = 0;       // malformed-key class for DpfKeyClass
};

class FaultInjector {
public:
    FaultInjector(PartyId me, std::optional<FaultSpec> spec)
        : me_(me), spec_(std::move(spec)) {}

    // Error to add at this site, zero when the site is not armed. Counting of
    // occurrences happens per site regardless of arming so `occurrence`
    // selects an invocation deterministically.
    BitVec take(FaultSite site, size_t width) {
        if (!armed(site)) return BitVec(width);
        BitVec e(width);
        for (size_t i = 0; i < spec_->value.len() && i < width; i++)
            if (spec_->value.bit(i)) e.set_bit(i, true);
        if (e.is_zero() && !spec_->value.is_zero() && width > 0)
            e.set_bit(0, true); // keep a requested nonzero error nonzero
        return e;
    }

    bool armed(FaultSite site) {
        if (!spec_ || spec_->site != site || !(spec_->party == me_)) return false;
        return counters_[(size_t)site]++ == spec_->occurrence;
    }

    int dpf_class() const { return spec_ ? spec_->dpf_class : 0; }
    const std::optional<FaultSpec>& spec() const { return spec_; }

private:
    PartyId me_;
    std::optional<FaultSpec> spec_;
    uint64_t counters_[16] = {};
};

} // namespace mostree
