#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "socfault/events.hpp"
#include "socfault/mmu.hpp"

using namespace socfault;

namespace {

struct Rig {
    MemConfig mem_cfg;
    MmuConfig mmu_cfg;
    MemorySystem mem;
    Mmu mmu;

    Rig() : mem_cfg{make_mem_cfg()}, mmu_cfg{}, mem(mem_cfg), mmu(mmu_cfg, mem) {
        mmu.build_identity_map();
    }
    static MemConfig make_mem_cfg() {
        MemConfig cfg;
        cfg.dram_bytes = 16ull << 20;
        return cfg;
    }
};

} // namespace

TEST_CASE("table layout arithmetic, full scale and desk scale") {
    PageTableLayout layout;
    // full scale: 3 PTDs of 8192 pages of 64 KiB each
    u64 full = 3ull * 8192 * 65536;
    CHECK(layout.ptd_count(full) == 3);
    CHECK(layout.entries_per_ptd == 8192);
    CHECK(layout.total_entries(full) == 3 * 8192);
    // desk scale: 16 MiB -> 256 entries in a single PTD
    CHECK(layout.total_entries(16ull << 20) == 256);
    CHECK(layout.ptd_count(16ull << 20) == 1);
    CHECK(layout.table_bytes(16ull << 20) == 2048);
}

TEST_CASE("identity map: every page translates to itself") {
    Rig rig;
    auto tr = rig.mmu.translate(0x80000, AccessKind::Load, 0);
    CHECK(tr.ok());
    CHECK(tr.paddr == 0x80000);
    CHECK(tr.source == TranslationSource::Walk);

    auto tr2 = rig.mmu.translate(0x80008, AccessKind::Load, 1);
    CHECK(tr2.paddr == 0x80008);
    CHECK(tr2.source == TranslationSource::UTlb);

    // PTE word format: metadata nibbles at both ends, frame in the middle
    u64 pte = rig.mem.read_dram_u64(rig.mmu_cfg.table_base + 8 * 8);
    CHECK((pte & kPteOutputMask) == 0x80000);
    CHECK((pte & kPteValid) != 0);
    CHECK((pte >> 60) == 0x4);
}

TEST_CASE("table region placement is validated") {
    MemConfig cfg;
    cfg.dram_bytes = 1 << 20; // table would not fit at this base
    MmuConfig mmu_cfg;
    mmu_cfg.table_base = (1 << 20) - 64;
    MemorySystem mem(cfg);
    Mmu mmu(mmu_cfg, mem);
    CHECK_THROWS_AS(mmu.build_identity_map(), std::invalid_argument);
}

TEST_CASE("lookup order uTLB -> L2TLB -> walk") {
    Rig rig;
    CHECK(rig.mmu.translate(0x30000, AccessKind::Load, 0).source == TranslationSource::Walk);
    CHECK(rig.mmu.translate(0x30000, AccessKind::Load, 1).source == TranslationSource::UTlb);

    // An ifetch of the same page misses the I-side uTLB but hits L2TLB.
    CHECK(rig.mmu.translate(0x30000, AccessKind::IFetch, 2).source == TranslationSource::L2Tlb);
    CHECK(rig.mmu.translate(0x30000, AccessKind::IFetch, 3).source == TranslationSource::UTlb);

    rig.mmu.tlbi_all();
    CHECK(rig.mmu.translate(0x30000, AccessKind::Load, 4).source == TranslationSource::Walk);
}

TEST_CASE("TLB presence never changes the translation, only the source") {
    Rig rig;
    for (u64 v : {0x12344ull, 0x56788ull, 0xABCD0ull}) {
        auto walk = rig.mmu.translate(v, AccessKind::Load, 0);
        auto hit = rig.mmu.translate(v, AccessKind::Load, 1);
        CHECK(walk.paddr == hit.paddr);
        CHECK(walk.attrs == hit.attrs);
        CHECK(walk.source != hit.source);
    }
}

TEST_CASE("each cold walk issues exactly one PTE-sized read on the data path") {
    Rig rig;
    EventLog log;
    rig.mem.set_log(&log);
    rig.mmu.set_log(&log);
    rig.mmu.translate(0x50000, AccessKind::Load, 0);
    u32 walks = 0;
    u32 data_fills = 0;
    for (const auto& ev : log.events()) {
        if (const auto* w = std::get_if<WalkEvent>(&ev.body)) {
            walks++;
            CHECK(w->pte_paddr == rig.mmu_cfg.table_base + (0x50000 / 65536) * 8);
        }
        if (const auto* f = std::get_if<FillEvent>(&ev.body))
            if (f->trace.dst == Level::L1D)
                data_fills++;
    }
    CHECK(walks == 1);
    CHECK(data_fills == 1); // the PTE line fill

    // warm translation: no further walk
    log.clear();
    rig.mmu.translate(0x50008, AccessKind::Load, 1);
    CHECK(log.empty());
}

TEST_CASE("at_query matches translate but never mutates TLB state") {
    Rig rig;
    rig.mmu.translate(0x20000, AccessKind::Load, 0);
    u64 before = rig.mmu.state_digest();
    CHECK(rig.mmu.at_query(0x10000) == (0x10000 | (make_pte(0) & kParAttrMask)));
    CHECK(rig.mmu.at_query(0x20000) == (0x20000 | (make_pte(0) & kParAttrMask)));
    // beyond memory: fault bit
    CHECK((rig.mmu.at_query(64ull << 20) & kParFault) != 0);
    CHECK(rig.mmu.state_digest() == before);
    // and the next translate of an unseen page still walks
    CHECK(rig.mmu.translate(0x10000, AccessKind::Load, 1).source == TranslationSource::Walk);
}

TEST_CASE("uTLB entries are unique per vpage and capacity-bounded") {
    Rig rig;
    // 9 distinct pages through an 8-entry uTLB-D
    for (u64 p = 0; p < 9; ++p)
        rig.mmu.translate(p * 65536, AccessKind::Load, p);
    // the first entry was evicted, recent ones survive
    CHECK(rig.mmu.translate(0, AccessKind::Load, 100).source != TranslationSource::UTlb);
    CHECK(rig.mmu.translate(8 * 65536, AccessKind::Load, 101).source == TranslationSource::UTlb);

    // re-translating cached pages must not duplicate entries
    for (u64 p = 2; p < 9; ++p)
        CHECK(rig.mmu.translate(p * 65536, AccessKind::Load, 102 + p).source ==
              TranslationSource::UTlb);
}

TEST_CASE("classification: fault-free mapping is identity everywhere") {
    Rig rig;
    auto records = rig.mmu.classify_mapping(0, 0x100000, 65536);
    CHECK(records.size() == 16);
    for (const auto& r : records) {
        CHECK(r.cls == MappingClass::Identity);
        CHECK(r.ppage == r.vpage);
    }
    std::string report = Mmu::render_mapping_report(records);
    CHECK(report.find("0x00080000 -> 0x00080000 IDENTITY") != std::string::npos);
}

TEST_CASE("classification distinguishes Zero, Shifted and Fault") {
    Rig rig;
    // hand-corrupt PTEs: page 2 -> 0x0, page 3 -> +0x740000, page 4 invalid
    rig.mem.write_dram_u64(rig.mmu_cfg.table_base + 2 * 8, make_pte(0));
    rig.mem.write_dram_u64(rig.mmu_cfg.table_base + 3 * 8, make_pte(0x30000 + 0x740000));
    rig.mem.write_dram_u64(rig.mmu_cfg.table_base + 4 * 8, 0);
    auto records = rig.mmu.classify_mapping(0, 5 * 65536, 65536);
    CHECK(records[0].cls == MappingClass::Identity);
    CHECK(records[1].cls == MappingClass::Identity);
    CHECK(records[2].cls == MappingClass::Zero);
    CHECK(records[3].cls == MappingClass::Shifted);
    CHECK(records[3].delta == 0x740000);
    CHECK(records[4].cls == MappingClass::Fault);
    // delta arithmetic for the reference pair
    CHECK(0x800000 - 0xc0000 == 0x740000);
    std::string report = Mmu::render_mapping_report(records);
    CHECK(report.find("SHIFTED(+7602176)") != std::string::npos);
    CHECK(report.find("-> ---------- FAULT") != std::string::npos);
}

TEST_CASE("degraded tlbi clears only the unified level") {
    Rig rig;
    rig.mmu.translate(0x30000, AccessKind::Load, 0);
    rig.mmu.set_sw_invalidate_effective(false);
    rig.mmu.tlbi_all();
    // uTLB-D entry survived
    CHECK(rig.mmu.translate(0x30000, AccessKind::Load, 1).source == TranslationSource::UTlb);
    // but the unified level was dropped: an ifetch has to walk again
    CHECK(rig.mmu.translate(0x30000, AccessKind::IFetch, 2).source == TranslationSource::Walk);
}

TEST_CASE("permission checks fault without translating") {
    Rig rig;
    u64 pte = rig.mem.read_dram_u64(rig.mmu_cfg.table_base + 6 * 8);
    rig.mem.write_dram_u64(rig.mmu_cfg.table_base + 6 * 8, pte & ~kPteX);
    auto tr = rig.mmu.translate(6 * 65536, AccessKind::IFetch, 0);
    CHECK(tr.fault == TranslationFault::Permission);
    CHECK(rig.mmu.translate(6 * 65536, AccessKind::Load, 1).ok());
}
