#pragma once

#include "socfault/events.hpp"
#include "socfault/memory.hpp"

#include <string>
#include <vector>

namespace socfault {

// 64-bit PTE: metadata in the most and least significant bits, output page
// frame in between.
//   bits 63..60  memory-type nibble (0x4 = normal cacheable)
//   bits 47..16  output frame base
//   bit 4 C, bit 3 X, bit 2 W, bit 1 R, bit 0 VALID
inline constexpr u64 kPteOutputMask = 0x0000FFFFFFFF0000ull;
inline constexpr u64 kPteValid = 1ull << 0;
inline constexpr u64 kPteR = 1ull << 1;
inline constexpr u64 kPteW = 1ull << 2;
inline constexpr u64 kPteX = 1ull << 3;
inline constexpr u64 kPteC = 1ull << 4;
inline constexpr u64 kPteTypeNormal = 0x4ull << 60;
inline constexpr u64 kParFault = 1ull << 0;
inline constexpr u64 kParAttrMask = 0x1Eull;

constexpr u64 make_pte(u64 frame) {
    return kPteTypeNormal | (frame & kPteOutputMask) | kPteC | kPteX | kPteW | kPteR | kPteValid;
}

struct MmuConfig {
    bool enabled = true;
    u64 table_base = 0x20000;
    u64 page_bytes = 65536;
    u32 utlb_entries = 8;
    u32 l2tlb_entries = 64;
};

/// Table-structure arithmetic, full scale or desk scale.
/// One PTD covers 8192 pages of 64 KiB (512 MiB).
struct PageTableLayout {
    u64 page_bytes = 65536;
    u64 entries_per_ptd = 8192;

    u64 total_entries(u64 mem_bytes) const { return mem_bytes / page_bytes; }
    u64 ptd_count(u64 mem_bytes) const {
        u64 n = total_entries(mem_bytes);
        return (n + entries_per_ptd - 1) / entries_per_ptd;
    }
    u64 table_bytes(u64 mem_bytes) const { return total_entries(mem_bytes) * 8; }
};

enum class TranslationSource : u8 { UTlb, L2Tlb, Walk };
enum class TranslationFault : u8 { None, Unmapped, Permission };

struct TranslationResult {
    u64 paddr = 0;
    u8 attrs = 0; // PTE bits 1..4
    TranslationSource source = TranslationSource::Walk;
    TranslationFault fault = TranslationFault::None;
    u32 latency = 0;

    bool ok() const { return fault == TranslationFault::None; }
};

enum class MappingClass : u8 { Identity, Zero, Shifted, Fault };

const char* mapping_class_name(MappingClass c);

struct MappingRecord {
    u64 vpage;
    u64 ppage;
    MappingClass cls;
    i64 delta; // for Shifted
};

/// Fault-engine hook for page-table walks.
class WalkInterceptor {
public:
    virtual ~WalkInterceptor() = default;
    virtual void on_walk(const WalkEvent& ev, u64 cycle) = 0;
};

class Mmu {
public:
    Mmu(const MmuConfig& cfg, MemorySystem& mem);

    void set_log(EventLog* log) { log_ = log; }
    void set_walk_interceptor(WalkInterceptor* hook) { walk_hook_ = hook; }

    const MmuConfig& config() const { return cfg_; }

    /// Writes an identity-mapped table into DRAM and resets the walk base.
    void build_identity_map();

    TranslationResult translate(u64 vaddr, AccessKind intent, u64 cycle);

    /// Clears the TLBs. After an MMU fault the software invalidation is no
    /// longer effective and only the unified level is actually cleared.
    void tlbi_all();

    /// Query-only translation: consults the TLBs but never fills them, and
    /// walks through the probe path. Returns a PAR word.
    u64 at_query(u64 vaddr) const;

    std::vector<MappingRecord> classify_mapping(u64 vaddr_lo, u64 vaddr_hi, u64 stride) const;
    static std::string render_mapping_report(const std::vector<MappingRecord>& records);

    u64 walk_base() const { return walk_base_; }
    void set_walk_base(u64 base) { walk_base_ = base; }
    bool sw_invalidate_effective() const { return sw_invalidate_effective_; }
    void set_sw_invalidate_effective(bool v) { sw_invalidate_effective_ = v; }
    u64 pte_paddr_of(u64 vaddr) const { return walk_base_ + (vaddr / cfg_.page_bytes) * 8; }

    u64 state_digest() const;

private:
    struct TlbEntry {
        u64 vpage = 0;
        u64 ppage = 0;
        u8 attrs = 0;
        bool valid = false;
    };
    struct TlbArray {
        std::vector<TlbEntry> entries;
        u32 cursor = 0;

        const TlbEntry* lookup(u64 vpage) const;
        void fill(u64 vpage, u64 ppage, u8 attrs);
        void clear();
    };

    struct WalkResult {
        u64 pte = 0;
        u64 pte_paddr = 0;
        bool in_range = false;
        u32 latency = 0;
    };
    WalkResult walk(u64 vaddr, u64 cycle, bool probe) const;

    MmuConfig cfg_;
    MemorySystem& mem_;
    EventLog* log_ = nullptr;
    WalkInterceptor* walk_hook_ = nullptr;

    TlbArray utlb_i_, utlb_d_, l2tlb_;
    u64 walk_base_;
    bool sw_invalidate_effective_ = true;
};

} // namespace socfault
