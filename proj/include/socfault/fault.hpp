#pragma once

#include "socfault/events.hpp"
#include "socfault/memory.hpp"
#include "socfault/mmu.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>

namespace socfault {

struct FL1iParams {
    u64 target_paddr_word = 0;
    u32 xor_mask = 0;
};

struct FMmuParams {
    u64 table_shift_bytes = 0;
    u64 zero_lo = 0; // inclusive vaddr bounds of pages remapped to 0x0
    u64 zero_hi = 0;
    u64 shift_delta = 0; // bytes added to every walked translation
    u64 pte_corrupt_mask = ~0ull;
};

struct FL2Params {
    enum class Variant : u8 { F1, F2 };
    enum class Path : u8 { DramToL2, L1dToL2 };
    u64 range_lo = 0; // inclusive beat-address range
    u64 range_hi = 0;
    i64 beat_delta = 0; // signed multiple of 16
    Variant variant = Variant::F1;
    Path path = Path::DramToL2;
};

/// One armed fault per run, mirroring one pulse per bench trial. The window
/// is relative to the cycle at which TRIG executed; a jitter draw shifts it
/// and a Bernoulli draw decides whether the shot couples at all.
struct FaultSpec {
    FaultModel model = FaultModel::F_L1I_FILL;
    i64 window_start = 0;
    i64 window_end = 0;
    u32 jitter_sigma = 0;
    double success_ratio = 1.0;
    u64 seed = 1;
    i64 min_offset = 700; // bench latency floor, in cycles after TRIG

    FL1iParams l1i;
    FMmuParams mmu;
    FL2Params l2;
};

void to_json(nlohmann::json& j, const FaultSpec& spec);
void from_json(const nlohmann::json& j, FaultSpec& spec);

class FaultEngine : public BeatInterceptor, public WalkInterceptor {
public:
    void attach(MemorySystem* mem, Mmu* mmu, EventLog* log) {
        mem_ = mem;
        mmu_ = mmu;
        log_ = log;
    }

    /// Draws jitter and the coupling Bernoulli from the spec seed.
    /// Throws if a spec is already armed or the spec is malformed.
    void arm(const FaultSpec& spec);
    void disarm();

    bool armed() const { return armed_.has_value(); }
    bool fired() const { return fired_; }
    const std::optional<FaultSpec>& spec() const { return armed_; }
    /// Window after jitter and the latency floor, relative to trigger.
    std::pair<i64, i64> effective_window() const { return {eff_start_, eff_end_}; }

    void set_trigger(u64 cycle) { trigger_cycle_ = cycle; }
    /// Forensic mode: the probe drives execution with injection suppressed.
    void set_suppressed(bool v) { suppressed_ = v; }

    void on_beat(BeatTransfer& beat) override;
    void on_walk(const WalkEvent& ev, u64 cycle) override;

private:
    bool may_fire(u64 cycle) const;
    void record_mutation(u64 cycle, u64 location, u64 before, u64 after, const std::string& note);
    void apply_mmu_corruption(u64 cycle);

    std::optional<FaultSpec> armed_;
    bool fired_ = false;
    bool success_ = false;
    bool suppressed_ = false;
    i64 eff_start_ = 0;
    i64 eff_end_ = 0;
    std::optional<u64> trigger_cycle_;

    MemorySystem* mem_ = nullptr;
    Mmu* mmu_ = nullptr;
    EventLog* log_ = nullptr;
};

} // namespace socfault
