#pragma once

#include "socfault/memory.hpp"

#include <optional>
#include <unordered_map>

namespace socfault {

enum class MacPolicy : u8 { Off, JIT, Proactive };

const char* mac_policy_name(MacPolicy p);

struct MacConfig {
    u64 key = 0x0102030405060708ull;
    MacPolicy policy = MacPolicy::Off;
    u32 check_cost_cycles = 3;
    bool level_l1 = true;
    bool level_l2 = true;
    bool level_dram = true;
};

/// Keyed 64-bit tag over a 16-byte block, bound to its physical address:
///   s = key; for w in [paddr, d0, d1]: s = mix64(s ^ w)
/// with d0/d1 the little-endian halves of the block.
u64 mac_tag(u64 key, u64 paddr, const u8 block[kBeatBytes]);

struct VerifyOutcome {
    enum class Status : u8 { Ok, Recovered, Alarm };
    Status status = Status::Ok;
    Level recovered_from = Level::DRAM;
    u32 checks_performed = 0;
    u64 cycles_added = 0;
};

struct MacMetrics {
    u64 checks = 0;
    u64 mismatches = 0;
    u64 recoveries = 0;
    u64 alarms = 0;
    u64 cycles_added = 0;
};

/// Per-level tag stores plus the two verification policies.
///
/// Tags ride with beats: an install stores, for every beat, the source
/// level's tag of the *intended* block at the beat's *applied* address, so
/// displaced-but-unmodified data is caught by the address binding.
class MacEngine {
public:
    MacEngine(const MacConfig& cfg, MemorySystem& mem);

    const MacConfig& config() const { return cfg_; }
    bool enabled() const { return cfg_.policy != MacPolicy::Off; }
    const MacMetrics& metrics() const { return metrics_; }

    /// Tags every DRAM block. Call after loading images/tables.
    void generate_all_dram();

    /// Clears per-run detection state (alarm flag, first outcome).
    void begin_run();

    bool alarm_pending() const { return alarm_pending_; }
    u64 take_pending_cycles();
    const std::optional<VerifyOutcome>& first_nonok() const { return first_nonok_; }

    /// Policy JIT: verify the L1 blocks delivering [paddr, paddr+width).
    VerifyOutcome verify_consumption(Level l1_level, u64 paddr, u32 width);

    // --- MemorySystem hooks ---
    void on_line_installed(Level dst, const FillTrace& trace);
    void on_line_invalidated(Level lv, u64 line_paddr);
    void on_store(u64 paddr, u32 width);
    void on_stale_line_forced(Level lv, u64 line_paddr);

    std::optional<u64> stored_tag(Level lv, u64 block_paddr) const;
    std::string metrics_json() const;

    /// Sorted-content digest, for probe purity checks.
    u64 state_digest() const;

private:
    struct L1Entry {
        u64 tag = 0;
        bool verified = false;
    };

    bool level_enabled(Level lv) const;
    void set_tag(Level lv, u64 block_paddr, std::optional<u64> tag);
    u32 check_block(Level lv, u64 block_paddr, bool& matched,
                    std::array<u8, kBeatBytes>* data_out);
    void charge(u32 checks);

    MacConfig cfg_;
    MemorySystem& mem_;
    std::unordered_map<u64, L1Entry> l1i_, l1d_;
    std::unordered_map<u64, u64> l2_;
    std::vector<u64> dram_tags_;
    bool dram_generated_ = false;

    MacMetrics metrics_;
    bool alarm_pending_ = false;
    u64 pending_cycles_ = 0;
    std::optional<VerifyOutcome> first_nonok_;
};

} // namespace socfault
