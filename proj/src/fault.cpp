#include "mostree/fault.hpp"

namespace mostree {

const char* fault_site_name(FaultSite s) {
    switch (s) {
        case FaultSite::MulReshare: return "mul-reshare";
        case FaultSite::OsReshare: return "os-reshare";
        case FaultSite::MacAttach: return "mac-attach";
        case FaultSite::OpenShare: return "open-share";
        case FaultSite::ReconShare: return "recon-share";
        case FaultSite::ShareDelta: return "share-delta";
        case FaultSite::DpfKeyClass: return "dpf-key-class";
        case FaultSite::RdxShare: return "rdx-share";
        case FaultSite::TripleC: return "triple-c";
    }
    return "?";
}

std::optional<FaultSite> fault_site_from_name(const std::string& name) {
    for (int i = 0; i <= (int)FaultSite::TripleC; i++) {
        auto s = (FaultSite)i;
        if (name == fault_site_name(s)) return s;
    }
    return std::nullopt;
}

} // namespace mostree
