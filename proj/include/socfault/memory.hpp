#pragma once

#include "socfault/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace socfault {

class EventLog;
class MacEngine;

struct CacheConfig {
    u32 size_bytes;
    u32 line_bytes = kLineBytes;
    u32 ways;
    u32 latency_cycles;
};

struct MemConfig {
    u64 dram_bytes = 16ull << 20;
    CacheConfig l1i{16 << 10, kLineBytes, 2, 1};
    CacheConfig l1d{16 << 10, kLineBytes, 4, 1};
    CacheConfig l2{512 << 10, kLineBytes, 16, 10};
    u32 dram_latency = 100;
};

struct CacheLine {
    u64 tag = 0;
    bool valid = false;
    bool dirty = false;
    std::array<u8, kLineBytes> data{};
    u64 last_fill_cycle = 0;
};

struct BeatTransfer {
    enum class Dir : u8 { Fill, Evict };
    Dir direction;
    Level src;
    Level dst;
    u64 beat_paddr; // intended target, 16-byte aligned
    std::array<u8, kBeatBytes> data;
    u64 cycle;
    // Interceptors edit these; they start equal to the intended values.
    u64 applied_paddr;
    std::array<u8, kBeatBytes> applied_data;
};

struct BeatRecord {
    u64 intended_paddr;
    u64 applied_paddr;
    std::array<u8, kBeatBytes> intended_data;
    std::array<u8, kBeatBytes> applied_data;
    u64 cycle;
    bool dropped = false;
};

struct FillTrace {
    BeatTransfer::Dir direction = BeatTransfer::Dir::Fill;
    Level src = Level::DRAM;
    Level dst = Level::L2;
    u64 line_paddr = 0;
    std::vector<BeatRecord> beats;

    bool mutated() const {
        for (const auto& b : beats)
            if (b.dropped || b.applied_paddr != b.intended_paddr ||
                b.applied_data != b.intended_data)
                return true;
        return false;
    }
};

/// Fault-engine hook: sees every beat before it is applied.
class BeatInterceptor {
public:
    virtual ~BeatInterceptor() = default;
    virtual void on_beat(BeatTransfer& beat) = 0;
};

enum class AccessKind : u8 { IFetch, Load, Store };

struct AccessResult {
    u64 data = 0; // loaded value (zero-extended); unused for stores
    Level hit_level = Level::L1I;
    u32 latency = 0;
    bool bus_error = false;
};

/// DRAM plus L1I/L1D/L2 with 64-byte lines moved as 4 beats of 16 bytes.
/// Write-back, write-allocate; deterministic round-robin replacement.
class MemorySystem {
public:
    explicit MemorySystem(const MemConfig& cfg);

    void set_interceptor(BeatInterceptor* hook) { interceptor_ = hook; }
    void set_mac(MacEngine* mac) { mac_ = mac; }
    void set_log(EventLog* log) { log_ = log; }

    const MemConfig& config() const { return cfg_; }
    u64 dram_size() const { return dram_.size(); }

    AccessResult access(AccessKind kind, u64 paddr, u32 width, u64 cycle, u64 store_value = 0);

    void ic_iallu();
    void dc_civac(u64 paddr);
    void clean_invalidate_all();
    /// Targeted L1I drop, used by the probe to make injected code fetchable
    /// without disturbing the rest of the instruction cache.
    void invalidate_l1i_line(u64 paddr);

    /// Data viewpoint: per byte, L1D if resident, else L2, else DRAM.
    /// Never allocates or mutates. Out-of-range throws std::out_of_range.
    std::vector<u8> probe_read(u64 paddr, u64 len) const;

    /// Direct DRAM writes, used for image and page-table loading.
    void load_bytes(u64 paddr, const u8* data, u64 len);
    void write_dram_u64(u64 paddr, u64 value);
    u64 read_dram_u64(u64 paddr) const;
    const std::vector<u8>& dram() const { return dram_; }

    // --- inspection (no allocation, no latency) ---
    const CacheLine* find_line(Level lv, u64 line_paddr) const;
    bool peek_block(Level lv, u64 block_paddr, u8 out[kBeatBytes]) const;
    /// Overwrites resident bytes without touching valid/dirty flags.
    void poke_block(Level lv, u64 block_paddr, const u8 in[kBeatBytes]);
    /// Corrupt a word everywhere it is currently resident (fault-model use).
    void corrupt_word_everywhere(u64 paddr, u64 value);
    /// F2 incoherence: make L1D hold the current DRAM copy of a line,
    /// valid and clean, regardless of what L2 holds.
    void force_stale_l1d_line(u64 line_paddr);

    /// `LEVEL set way tag V D hex64bytes` for every valid line.
    std::string dump_cache_state(Level lv) const;
    std::string dump_all_caches() const;

    /// Content digest of one level (tags/flags/data; no timestamps).
    u64 state_digest(Level lv) const;

private:
    struct CacheArray {
        CacheConfig cc;
        u32 sets;
        std::vector<CacheLine> lines; // sets * ways
        std::vector<u32> rr;          // per-set round-robin cursor

        CacheLine& at(u32 set, u32 way) { return lines[static_cast<std::size_t>(set) * cc.ways + way]; }
        const CacheLine& at(u32 set, u32 way) const {
            return lines[static_cast<std::size_t>(set) * cc.ways + way];
        }
        u32 set_of(u64 line_paddr) const {
            return static_cast<u32>((line_paddr / kLineBytes) % sets);
        }
        u64 tag_of(u64 line_paddr) const { return (line_paddr / kLineBytes) / sets; }
        u64 line_paddr_of(u32 set, u32 way) const {
            return (at(set, way).tag * sets + set) * kLineBytes;
        }
        CacheLine* find(u64 line_paddr);
        const CacheLine* find(u64 line_paddr) const;
    };

    CacheArray& array_for(Level lv);
    const CacheArray& array_for(Level lv) const;

    void check_range(u64 paddr, u64 len) const;

    /// Ensures the line is valid in the L1 chosen by `kind`, filling L2 and
    /// L1 as needed. Returns the deepest level touched.
    Level ensure_line(AccessKind kind, u64 line_paddr, u64 cycle);

    /// Moves one line of data into `dst` via 4 intercepted beats.
    void transfer_line(Level dst, Level src, BeatTransfer::Dir dir, u64 line_paddr,
                       const std::array<u8, kLineBytes>& payload, bool install_dirty, u64 cycle);

    CacheLine& victim_for(Level lv, u64 line_paddr, u64 cycle);
    void evict(Level lv, u32 set, u32 way, u64 cycle);
    void invalidate_line(Level lv, u32 set, u32 way);
    std::array<u8, kLineBytes> read_line_at(Level lv, u64 line_paddr) const;
    void write_dram_line(u64 line_paddr, const std::array<u8, kLineBytes>& data, u64 cycle);

    MemConfig cfg_;
    std::vector<u8> dram_;
    CacheArray l1i_, l1d_, l2_;
    BeatInterceptor* interceptor_ = nullptr;
    MacEngine* mac_ = nullptr;
    EventLog* log_ = nullptr;
};

} // namespace socfault
