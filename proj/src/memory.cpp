#include "socfault/memory.hpp"

#include "socfault/events.hpp"
#include "socfault/integrity.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace socfault {

namespace {

u64 line_base(u64 paddr) { return paddr & ~static_cast<u64>(kLineBytes - 1); }

void validate(const CacheConfig& cc, const char* name) {
    if (cc.line_bytes != kLineBytes)
        throw std::invalid_argument(std::string(name) + ": line_bytes must be 64");
    if (cc.line_bytes % kBeatBytes != 0)
        throw std::invalid_argument(std::string(name) + ": line not beat-divisible");
    if (cc.ways == 0 || cc.size_bytes % (cc.line_bytes * cc.ways) != 0)
        throw std::invalid_argument(std::string(name) + ": size not divisible by line*ways");
}

} // namespace

CacheLine* MemorySystem::CacheArray::find(u64 line_paddr) {
    u32 set = set_of(line_paddr);
    u64 tag = tag_of(line_paddr);
    for (u32 w = 0; w < cc.ways; ++w) {
        CacheLine& l = at(set, w);
        if (l.valid && l.tag == tag)
            return &l;
    }
    return nullptr;
}

const CacheLine* MemorySystem::CacheArray::find(u64 line_paddr) const {
    return const_cast<CacheArray*>(this)->find(line_paddr);
}

MemorySystem::MemorySystem(const MemConfig& cfg) : cfg_(cfg) {
    validate(cfg.l1i, "l1i");
    validate(cfg.l1d, "l1d");
    validate(cfg.l2, "l2");
    if (cfg.dram_bytes == 0 || cfg.dram_bytes % kLineBytes != 0)
        throw std::invalid_argument("dram_bytes must be a positive multiple of 64");
    dram_.assign(cfg.dram_bytes, 0);
    auto init = [](CacheArray& arr, const CacheConfig& cc) {
        arr.cc = cc;
        arr.sets = cc.size_bytes / (cc.line_bytes * cc.ways);
        arr.lines.assign(static_cast<std::size_t>(arr.sets) * cc.ways, CacheLine{});
        arr.rr.assign(arr.sets, 0);
    };
    init(l1i_, cfg.l1i);
    init(l1d_, cfg.l1d);
    init(l2_, cfg.l2);
}

MemorySystem::CacheArray& MemorySystem::array_for(Level lv) {
    switch (lv) {
    case Level::L1I: return l1i_;
    case Level::L1D: return l1d_;
    case Level::L2: return l2_;
    default: throw std::logic_error("no cache array for DRAM");
    }
}

const MemorySystem::CacheArray& MemorySystem::array_for(Level lv) const {
    return const_cast<MemorySystem*>(this)->array_for(lv);
}

void MemorySystem::check_range(u64 paddr, u64 len) const {
    if (paddr > dram_.size() || len > dram_.size() - paddr)
        throw std::out_of_range("address 0x" + hex(paddr).substr(2) + " outside DRAM");
}

std::array<u8, kLineBytes> MemorySystem::read_line_at(Level lv, u64 line_paddr) const {
    std::array<u8, kLineBytes> out{};
    if (lv == Level::DRAM) {
        std::memcpy(out.data(), dram_.data() + line_paddr, kLineBytes);
        return out;
    }
    const CacheLine* l = array_for(lv).find(line_paddr);
    if (!l)
        throw std::logic_error("read_line_at: line not resident");
    return l->data;
}

void MemorySystem::write_dram_line(u64 line_paddr, const std::array<u8, kLineBytes>& data,
                                   u64 cycle) {
    transfer_line(Level::DRAM, Level::L2, BeatTransfer::Dir::Evict, line_paddr, data, false, cycle);
}

void MemorySystem::invalidate_line(Level lv, u32 set, u32 way) {
    CacheArray& arr = array_for(lv);
    CacheLine& l = arr.at(set, way);
    if (!l.valid)
        return;
    u64 line_paddr = arr.line_paddr_of(set, way);
    l.valid = false;
    l.dirty = false;
    if (mac_)
        mac_->on_line_invalidated(lv, line_paddr);
}

void MemorySystem::evict(Level lv, u32 set, u32 way, u64 cycle) {
    CacheArray& arr = array_for(lv);
    CacheLine& l = arr.at(set, way);
    if (!l.valid)
        return;
    u64 line_paddr = arr.line_paddr_of(set, way);
    if (l.dirty) {
        if (lv == Level::L1D)
            transfer_line(Level::L2, Level::L1D, BeatTransfer::Dir::Evict, line_paddr, l.data, true,
                          cycle);
        else if (lv == Level::L2)
            write_dram_line(line_paddr, l.data, cycle);
    }
    invalidate_line(lv, set, way);
}

CacheLine& MemorySystem::victim_for(Level lv, u64 line_paddr, u64 cycle) {
    CacheArray& arr = array_for(lv);
    u32 set = arr.set_of(line_paddr);
    for (u32 w = 0; w < arr.cc.ways; ++w)
        if (!arr.at(set, w).valid)
            return arr.at(set, w);
    u32 victim = arr.rr[set];
    arr.rr[set] = (arr.rr[set] + 1) % arr.cc.ways;
    evict(lv, set, victim, cycle);
    return arr.at(set, victim);
}

void MemorySystem::transfer_line(Level dst, Level src, BeatTransfer::Dir dir, u64 line_paddr,
                                 const std::array<u8, kLineBytes>& payload, bool install_dirty,
                                 u64 cycle) {
    FillTrace trace;
    trace.direction = dir;
    trace.src = src;
    trace.dst = dst;
    trace.line_paddr = line_paddr;

    std::array<u8, kLineBytes> buffer = payload;
    bool deviated = false;

    for (u32 k = 0; k < kBeatsPerLine; ++k) {
        BeatTransfer beat;
        beat.direction = dir;
        beat.src = src;
        beat.dst = dst;
        beat.beat_paddr = line_paddr + static_cast<u64>(k) * kBeatBytes;
        std::memcpy(beat.data.data(), payload.data() + k * kBeatBytes, kBeatBytes);
        beat.cycle = cycle + k;
        beat.applied_paddr = beat.beat_paddr;
        beat.applied_data = beat.data;

        if (interceptor_)
            interceptor_->on_beat(beat);

        BeatRecord rec;
        rec.intended_paddr = beat.beat_paddr;
        rec.applied_paddr = beat.applied_paddr;
        rec.intended_data = beat.data;
        rec.applied_data = beat.applied_data;
        rec.cycle = beat.cycle;

        if (beat.applied_paddr >= line_paddr && beat.applied_paddr < line_paddr + kLineBytes) {
            std::memcpy(buffer.data() + (beat.applied_paddr - line_paddr),
                        beat.applied_data.data(), kBeatBytes);
        } else if (dst == Level::DRAM) {
            std::memcpy(dram_.data() + beat.applied_paddr, beat.applied_data.data(), kBeatBytes);
        } else {
            // Beat displaced into a different line of the destination array.
            CacheLine* foreign = array_for(dst).find(line_base(beat.applied_paddr));
            if (foreign) {
                std::memcpy(foreign->data.data() + (beat.applied_paddr % kLineBytes),
                            beat.applied_data.data(), kBeatBytes);
                if (dst != Level::L1I)
                    foreign->dirty = true;
                deviated = true;
            } else {
                rec.dropped = true;
            }
        }
        trace.beats.push_back(rec);
    }

    if (dst == Level::DRAM) {
        // Beats aimed inside the line were accumulated into the buffer.
        std::memcpy(dram_.data() + line_paddr, buffer.data(), kLineBytes);
    } else {
        CacheArray& arr = array_for(dst);
        CacheLine* existing = arr.find(line_paddr);
        CacheLine& line = existing ? *existing : victim_for(dst, line_paddr, cycle);
        line.tag = arr.tag_of(line_paddr);
        line.data = buffer;
        line.last_fill_cycle = cycle;
        bool content_deviates = buffer != payload;
        line.dirty = dst == Level::L1I ? false : (install_dirty || content_deviates);
        line.valid = true; // only after all beats have been applied
        (void)deviated;
    }

    if (mac_)
        mac_->on_line_installed(dst, trace);
    if (log_)
        log_->push(cycle, FillEvent{trace});
}

Level MemorySystem::ensure_line(AccessKind kind, u64 line_paddr, u64 cycle) {
    CacheArray& l1 = kind == AccessKind::IFetch ? l1i_ : l1d_;
    Level l1lv = kind == AccessKind::IFetch ? Level::L1I : Level::L1D;
    if (l1.find(line_paddr))
        return l1lv;

    Level deepest = Level::L2;
    u64 l1_fill_cycle = cycle;
    if (!l2_.find(line_paddr)) {
        transfer_line(Level::L2, Level::DRAM, BeatTransfer::Dir::Fill, line_paddr,
                      read_line_at(Level::DRAM, line_paddr), false, cycle);
        deepest = Level::DRAM;
        l1_fill_cycle = cycle + kBeatsPerLine;
    }
    transfer_line(l1lv, Level::L2, BeatTransfer::Dir::Fill, line_paddr,
                  read_line_at(Level::L2, line_paddr), false, l1_fill_cycle);
    return deepest;
}

AccessResult MemorySystem::access(AccessKind kind, u64 paddr, u32 width, u64 cycle,
                                  u64 store_value) {
    AccessResult res;
    if (width != 4 && width != 8)
        throw std::invalid_argument("access width must be 4 or 8");
    if (paddr > dram_.size() || width > dram_.size() - paddr) {
        if (log_)
            log_->push(cycle, BusErrorEvent{paddr});
        res.bus_error = true;
        return res;
    }

    CacheArray& l1 = kind == AccessKind::IFetch ? l1i_ : l1d_;
    Level l1lv = kind == AccessKind::IFetch ? Level::L1I : Level::L1D;

    Level deepest = l1lv;
    u64 first_line = line_base(paddr);
    u64 last_line = line_base(paddr + width - 1);
    for (u64 lp = first_line; lp <= last_line; lp += kLineBytes) {
        Level touched = ensure_line(kind, lp, cycle);
        if (static_cast<u8>(touched) > static_cast<u8>(deepest))
            deepest = touched;
    }

    res.hit_level = deepest;
    switch (deepest) {
    case Level::L1I:
    case Level::L1D: res.latency = l1.cc.latency_cycles; break;
    case Level::L2: res.latency = l2_.cc.latency_cycles; break;
    case Level::DRAM: res.latency = cfg_.dram_latency; break;
    }

    if (kind == AccessKind::Store) {
        for (u32 i = 0; i < width; ++i) {
            u64 a = paddr + i;
            CacheLine* l = l1.find(line_base(a));
            l->data[a % kLineBytes] = static_cast<u8>(store_value >> (8 * i));
            l->dirty = true;
        }
        if (mac_)
            mac_->on_store(paddr, width);
        return res;
    }

    u64 v = 0;
    for (u32 i = 0; i < width; ++i) {
        u64 a = paddr + i;
        CacheLine* l = l1.find(line_base(a));
        v |= static_cast<u64>(l->data[a % kLineBytes]) << (8 * i);
    }
    res.data = v;
    return res;
}

void MemorySystem::invalidate_l1i_line(u64 paddr) {
    u64 lp = line_base(paddr);
    if (l1i_.find(lp)) {
        u32 set = l1i_.set_of(lp);
        u64 tag = l1i_.tag_of(lp);
        for (u32 w = 0; w < l1i_.cc.ways; ++w)
            if (l1i_.at(set, w).valid && l1i_.at(set, w).tag == tag)
                invalidate_line(Level::L1I, set, w);
    }
}

void MemorySystem::ic_iallu() {
    for (u32 s = 0; s < l1i_.sets; ++s)
        for (u32 w = 0; w < l1i_.cc.ways; ++w)
            invalidate_line(Level::L1I, s, w);
}

void MemorySystem::dc_civac(u64 paddr) {
    u64 lp = line_base(paddr);
    if (CacheLine* l = l1d_.find(lp)) {
        if (l->dirty)
            transfer_line(Level::L2, Level::L1D, BeatTransfer::Dir::Evict, lp, l->data, true, 0);
        u32 set = l1d_.set_of(lp);
        for (u32 w = 0; w < l1d_.cc.ways; ++w)
            if (&l1d_.at(set, w) == l)
                invalidate_line(Level::L1D, set, w);
    }
    if (CacheLine* l = l2_.find(lp)) {
        if (l->dirty)
            write_dram_line(lp, l->data, 0);
        u32 set = l2_.set_of(lp);
        for (u32 w = 0; w < l2_.cc.ways; ++w)
            if (&l2_.at(set, w) == l)
                invalidate_line(Level::L2, set, w);
    }
}

void MemorySystem::clean_invalidate_all() {
    for (u32 s = 0; s < l1d_.sets; ++s)
        for (u32 w = 0; w < l1d_.cc.ways; ++w)
            evict(Level::L1D, s, w, 0);
    for (u32 s = 0; s < l2_.sets; ++s)
        for (u32 w = 0; w < l2_.cc.ways; ++w)
            evict(Level::L2, s, w, 0);
    ic_iallu();
}

std::vector<u8> MemorySystem::probe_read(u64 paddr, u64 len) const {
    check_range(paddr, len);
    std::vector<u8> out(len);
    for (u64 i = 0; i < len; ++i) {
        u64 a = paddr + i;
        u64 lp = line_base(a);
        if (const CacheLine* l = l1d_.find(lp))
            out[i] = l->data[a % kLineBytes];
        else if (const CacheLine* l2l = l2_.find(lp))
            out[i] = l2l->data[a % kLineBytes];
        else
            out[i] = dram_[a];
    }
    return out;
}

void MemorySystem::load_bytes(u64 paddr, const u8* data, u64 len) {
    check_range(paddr, len);
    std::memcpy(dram_.data() + paddr, data, len);
}

void MemorySystem::write_dram_u64(u64 paddr, u64 value) {
    check_range(paddr, 8);
    for (u32 i = 0; i < 8; ++i)
        dram_[paddr + i] = static_cast<u8>(value >> (8 * i));
}

u64 MemorySystem::read_dram_u64(u64 paddr) const {
    check_range(paddr, 8);
    u64 v = 0;
    for (u32 i = 0; i < 8; ++i)
        v |= static_cast<u64>(dram_[paddr + i]) << (8 * i);
    return v;
}

const CacheLine* MemorySystem::find_line(Level lv, u64 line_paddr) const {
    if (lv == Level::DRAM)
        return nullptr;
    return array_for(lv).find(line_base(line_paddr));
}

bool MemorySystem::peek_block(Level lv, u64 block_paddr, u8 out[kBeatBytes]) const {
    if (lv == Level::DRAM) {
        if (block_paddr + kBeatBytes > dram_.size())
            return false;
        std::memcpy(out, dram_.data() + block_paddr, kBeatBytes);
        return true;
    }
    const CacheLine* l = array_for(lv).find(line_base(block_paddr));
    if (!l)
        return false;
    std::memcpy(out, l->data.data() + (block_paddr % kLineBytes), kBeatBytes);
    return true;
}

void MemorySystem::poke_block(Level lv, u64 block_paddr, const u8 in[kBeatBytes]) {
    if (lv == Level::DRAM) {
        std::memcpy(dram_.data() + block_paddr, in, kBeatBytes);
        return;
    }
    CacheLine* l = array_for(lv).find(line_base(block_paddr));
    if (!l)
        throw std::logic_error("poke_block: line not resident");
    std::memcpy(l->data.data() + (block_paddr % kLineBytes), in, kBeatBytes);
}

void MemorySystem::corrupt_word_everywhere(u64 paddr, u64 value) {
    write_dram_u64(paddr, value);
    u64 lp = line_base(paddr);
    for (Level lv : {Level::L1I, Level::L1D, Level::L2}) {
        CacheArray& arr = array_for(lv);
        if (CacheLine* l = arr.find(lp)) {
            for (u32 i = 0; i < 8; ++i)
                l->data[paddr % kLineBytes + i] = static_cast<u8>(value >> (8 * i));
        }
    }
}

void MemorySystem::force_stale_l1d_line(u64 line_paddr) {
    u64 lp = line_base(line_paddr);
    std::array<u8, kLineBytes> fresh{};
    std::memcpy(fresh.data(), dram_.data() + lp, kLineBytes);
    CacheLine* existing = l1d_.find(lp);
    CacheLine& line = existing ? *existing : victim_for(Level::L1D, lp, 0);
    line.tag = l1d_.tag_of(lp);
    line.data = fresh;
    line.valid = true;
    line.dirty = false;
    if (mac_)
        mac_->on_stale_line_forced(Level::L1D, lp);
}

std::string MemorySystem::dump_cache_state(Level lv) const {
    const CacheArray& arr = array_for(lv);
    std::ostringstream out;
    char buf[64];
    for (u32 s = 0; s < arr.sets; ++s) {
        for (u32 w = 0; w < arr.cc.ways; ++w) {
            const CacheLine& l = arr.at(s, w);
            if (!l.valid)
                continue;
            std::snprintf(buf, sizeof buf, "%s %u %u 0x%llx %d %d ", level_name(lv), s, w,
                          static_cast<unsigned long long>(l.tag), l.valid ? 1 : 0, l.dirty ? 1 : 0);
            out << buf << hex_bytes(l.data.data(), l.data.size()) << "\n";
        }
    }
    return out.str();
}

std::string MemorySystem::dump_all_caches() const {
    return dump_cache_state(Level::L1I) + dump_cache_state(Level::L1D) +
           dump_cache_state(Level::L2);
}

u64 MemorySystem::state_digest(Level lv) const {
    if (lv == Level::DRAM) {
        Fnv1a h;
        h.add(dram_.data(), dram_.size());
        return h.value();
    }
    const CacheArray& arr = array_for(lv);
    Fnv1a h;
    for (u32 s = 0; s < arr.sets; ++s) {
        for (u32 w = 0; w < arr.cc.ways; ++w) {
            const CacheLine& l = arr.at(s, w);
            if (!l.valid)
                continue;
            h.add_u32(s);
            h.add_u32(w);
            h.add_u64(l.tag);
            h.add_u8(l.dirty ? 1 : 0);
            h.add(l.data.data(), l.data.size());
        }
    }
    return h.value();
}

} // namespace socfault
