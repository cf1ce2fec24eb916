#include "socfault/mmu.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace socfault {

const char* mapping_class_name(MappingClass c) {
    switch (c) {
    case MappingClass::Identity: return "IDENTITY";
    case MappingClass::Zero: return "ZERO";
    case MappingClass::Shifted: return "SHIFTED";
    case MappingClass::Fault: return "FAULT";
    }
    return "?";
}

const Mmu::TlbEntry* Mmu::TlbArray::lookup(u64 vpage) const {
    for (const auto& e : entries)
        if (e.valid && e.vpage == vpage)
            return &e;
    return nullptr;
}

void Mmu::TlbArray::fill(u64 vpage, u64 ppage, u8 attrs) {
    for (auto& e : entries) {
        if (e.valid && e.vpage == vpage) {
            e.ppage = ppage;
            e.attrs = attrs;
            return;
        }
    }
    for (u32 i = 0; i < entries.size(); ++i) {
        if (!entries[i].valid) {
            entries[i] = {vpage, ppage, attrs, true};
            return;
        }
    }
    entries[cursor] = {vpage, ppage, attrs, true};
    cursor = (cursor + 1) % entries.size();
}

void Mmu::TlbArray::clear() {
    for (auto& e : entries)
        e.valid = false;
    cursor = 0;
}

Mmu::Mmu(const MmuConfig& cfg, MemorySystem& mem)
    : cfg_(cfg), mem_(mem), walk_base_(cfg.table_base) {
    utlb_i_.entries.resize(cfg.utlb_entries);
    utlb_d_.entries.resize(cfg.utlb_entries);
    l2tlb_.entries.resize(cfg.l2tlb_entries);
}

void Mmu::build_identity_map() {
    if (!cfg_.enabled)
        return;
    u64 mem_size = mem_.dram_size();
    if (mem_size % cfg_.page_bytes != 0)
        throw std::invalid_argument("mem size not a multiple of the page size");
    u64 entries = mem_size / cfg_.page_bytes;
    if (cfg_.table_base + entries * 8 > mem_size)
        throw std::invalid_argument("page table region exceeds memory");
    for (u64 n = 0; n < entries; ++n)
        mem_.write_dram_u64(cfg_.table_base + n * 8, make_pte(n * cfg_.page_bytes));
    walk_base_ = cfg_.table_base;
    sw_invalidate_effective_ = true;
    utlb_i_.clear();
    utlb_d_.clear();
    l2tlb_.clear();
}

Mmu::WalkResult Mmu::walk(u64 vaddr, u64 cycle, bool probe) const {
    WalkResult wr;
    wr.pte_paddr = walk_base_ + (vaddr / cfg_.page_bytes) * 8;
    if (wr.pte_paddr + 8 > mem_.dram_size())
        return wr; // walk lands outside memory: translation fault
    wr.in_range = true;
    if (probe) {
        auto bytes = mem_.probe_read(wr.pte_paddr, 8);
        for (u32 i = 0; i < 8; ++i)
            wr.pte |= static_cast<u64>(bytes[i]) << (8 * i);
    } else {
        // PTE words live in memory and travel the data path like any load.
        auto res = const_cast<MemorySystem&>(mem_).access(AccessKind::Load, wr.pte_paddr, 8, cycle);
        wr.pte = res.data;
        wr.latency = res.latency;
    }
    return wr;
}

TranslationResult Mmu::translate(u64 vaddr, AccessKind intent, u64 cycle) {
    TranslationResult tr;
    if (!cfg_.enabled) {
        tr.paddr = vaddr;
        tr.attrs = kParAttrMask;
        return tr;
    }
    u64 vpage = vaddr / cfg_.page_bytes * cfg_.page_bytes;
    u64 offset = vaddr % cfg_.page_bytes;

    auto permission_ok = [&](u8 attrs) {
        switch (intent) {
        case AccessKind::IFetch: return (attrs & kPteX) != 0;
        case AccessKind::Load: return (attrs & kPteR) != 0;
        case AccessKind::Store: return (attrs & kPteW) != 0;
        }
        return false;
    };
    auto finish = [&](u64 ppage, u8 attrs, TranslationSource src) {
        tr.source = src;
        tr.attrs = attrs;
        if (!permission_ok(attrs)) {
            tr.fault = TranslationFault::Permission;
            return tr;
        }
        tr.paddr = ppage | offset;
        return tr;
    };

    TlbArray& utlb = intent == AccessKind::IFetch ? utlb_i_ : utlb_d_;
    if (const TlbEntry* e = utlb.lookup(vpage))
        return finish(e->ppage, e->attrs, TranslationSource::UTlb);
    if (const TlbEntry* e = l2tlb_.lookup(vpage)) {
        utlb.fill(vpage, e->ppage, e->attrs);
        return finish(e->ppage, e->attrs, TranslationSource::L2Tlb);
    }

    WalkResult wr = walk(vaddr, cycle, false);
    tr.latency = wr.latency;
    bool valid = wr.in_range && (wr.pte & kPteValid);
    if (log_)
        log_->push(cycle, WalkEvent{vaddr, wr.pte_paddr, wr.pte, !valid});
    if (walk_hook_)
        walk_hook_->on_walk(WalkEvent{vaddr, wr.pte_paddr, wr.pte, !valid}, cycle);
    if (!valid) {
        tr.fault = TranslationFault::Unmapped;
        tr.source = TranslationSource::Walk;
        return tr;
    }
    u64 ppage = wr.pte & kPteOutputMask;
    u8 attrs = static_cast<u8>(wr.pte & kParAttrMask);
    l2tlb_.fill(vpage, ppage, attrs);
    utlb.fill(vpage, ppage, attrs);
    return finish(ppage, attrs, TranslationSource::Walk);
}

void Mmu::tlbi_all() {
    l2tlb_.clear();
    if (sw_invalidate_effective_) {
        utlb_i_.clear();
        utlb_d_.clear();
    }
}

u64 Mmu::at_query(u64 vaddr) const {
    if (!cfg_.enabled)
        return (vaddr / cfg_.page_bytes * cfg_.page_bytes) | kParAttrMask;
    u64 vpage = vaddr / cfg_.page_bytes * cfg_.page_bytes;
    if (const TlbEntry* e = utlb_d_.lookup(vpage))
        return e->ppage | e->attrs;
    if (const TlbEntry* e = l2tlb_.lookup(vpage))
        return e->ppage | e->attrs;
    WalkResult wr = walk(vaddr, 0, true);
    if (!wr.in_range || !(wr.pte & kPteValid))
        return kParFault;
    return (wr.pte & kPteOutputMask) | (wr.pte & kParAttrMask);
}

std::vector<MappingRecord> Mmu::classify_mapping(u64 vaddr_lo, u64 vaddr_hi, u64 stride) const {
    if (stride == 0)
        stride = cfg_.page_bytes;
    if (vaddr_lo % stride != 0)
        throw std::invalid_argument("classify_mapping: range not page-aligned");
    std::vector<MappingRecord> out;
    for (u64 v = vaddr_lo; v < vaddr_hi; v += stride) {
        u64 par = at_query(v);
        MappingRecord rec{v, 0, MappingClass::Fault, 0};
        if (!(par & kParFault)) {
            rec.ppage = par & kPteOutputMask;
            if (rec.ppage == v)
                rec.cls = MappingClass::Identity;
            else if (rec.ppage == 0)
                rec.cls = MappingClass::Zero;
            else {
                rec.cls = MappingClass::Shifted;
                rec.delta = static_cast<i64>(rec.ppage) - static_cast<i64>(v);
            }
        }
        out.push_back(rec);
    }
    return out;
}

std::string Mmu::render_mapping_report(const std::vector<MappingRecord>& records) {
    std::ostringstream out;
    char buf[96];
    for (const auto& r : records) {
        if (r.cls == MappingClass::Fault) {
            std::snprintf(buf, sizeof buf, "0x%08llx -> ---------- FAULT",
                          static_cast<unsigned long long>(r.vpage));
        } else if (r.cls == MappingClass::Shifted) {
            std::snprintf(buf, sizeof buf, "0x%08llx -> 0x%08llx SHIFTED(%+lld)",
                          static_cast<unsigned long long>(r.vpage),
                          static_cast<unsigned long long>(r.ppage),
                          static_cast<long long>(r.delta));
        } else {
            std::snprintf(buf, sizeof buf, "0x%08llx -> 0x%08llx %s",
                          static_cast<unsigned long long>(r.vpage),
                          static_cast<unsigned long long>(r.ppage), mapping_class_name(r.cls));
        }
        out << buf << "\n";
    }
    return out.str();
}

u64 Mmu::state_digest() const {
    Fnv1a h;
    auto add = [&h](const TlbArray& arr) {
        for (const auto& e : arr.entries) {
            h.add_u8(e.valid ? 1 : 0);
            h.add_u64(e.vpage);
            h.add_u64(e.ppage);
            h.add_u8(e.attrs);
        }
        h.add_u32(arr.cursor);
    };
    add(utlb_i_);
    add(utlb_d_);
    add(l2tlb_);
    h.add_u64(walk_base_);
    h.add_u8(sw_invalidate_effective_ ? 1 : 0);
    return h.value();
}

} // namespace socfault
