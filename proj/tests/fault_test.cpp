#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "socfault/events.hpp"
#include "socfault/fault.hpp"

#include <cstring>
#include <set>

using namespace socfault;

namespace {

struct Rig {
    MemConfig mem_cfg;
    MmuConfig mmu_cfg;
    MemorySystem mem;
    Mmu mmu;
    FaultEngine engine;
    EventLog log;

    Rig() : mem_cfg{make_mem_cfg()}, mmu_cfg{}, mem(mem_cfg), mmu(mmu_cfg, mem) {
        mmu.build_identity_map();
        mem.set_interceptor(&engine);
        mem.set_log(&log);
        mmu.set_log(&log);
        mmu.set_walk_interceptor(&engine);
        engine.attach(&mem, &mmu, &log);
    }
    static MemConfig make_mem_cfg() {
        MemConfig cfg;
        cfg.dram_bytes = 16ull << 20;
        return cfg;
    }

    void fill_code(u64 base, std::initializer_list<u32> words) {
        std::vector<u8> bytes;
        for (u32 w : words)
            for (u32 i = 0; i < 4; ++i)
                bytes.push_back(static_cast<u8>(w >> (8 * i)));
        mem.load_bytes(base, bytes.data(), bytes.size());
    }

    u64 mutation_count() const {
        u64 n = 0;
        for (const auto& ev : log.events())
            if (std::holds_alternative<MutationEvent>(ev.body))
                n++;
        return n;
    }
};

FaultSpec l1i_spec(u64 target, u32 mask) {
    FaultSpec spec;
    spec.model = FaultModel::F_L1I_FILL;
    spec.window_start = 700;
    spec.window_end = 100000;
    spec.l1i = {target, mask};
    return spec;
}

} // namespace

TEST_CASE("arm: jitter draw is deterministic and zero-sigma keeps the window") {
    Rig rig;
    FaultSpec spec = l1i_spec(0x48a08, 0xFF);
    spec.window_start = 800;
    spec.window_end = 900;
    rig.engine.arm(spec);
    auto w1 = rig.engine.effective_window();
    CHECK(w1.first == 800);
    CHECK(w1.second == 900);
    rig.engine.disarm();
    rig.engine.arm(spec);
    CHECK(rig.engine.effective_window() == w1);
}

TEST_CASE("arm: double arm is rejected, one shot per run") {
    Rig rig;
    rig.engine.arm(l1i_spec(0x48a08, 0xFF));
    CHECK_THROWS_AS(rig.engine.arm(l1i_spec(0x48a08, 0xFF)), std::logic_error);
}

TEST_CASE("arm: bad specs are rejected") {
    Rig rig;
    FaultSpec spec = l1i_spec(0, 1);
    spec.window_start = 10;
    spec.window_end = 5;
    CHECK_THROWS_AS(rig.engine.arm(spec), std::invalid_argument);
    spec = l1i_spec(0, 1);
    spec.success_ratio = 1.5;
    CHECK_THROWS_AS(rig.engine.arm(spec), std::invalid_argument);
    FaultSpec l2;
    l2.model = FaultModel::F_L2_BEAT;
    l2.l2.beat_delta = -8; // not a beat multiple
    CHECK_THROWS_AS(rig.engine.arm(l2), std::invalid_argument);
}

TEST_CASE("jitter draws span +-2 sigma over many seeds") {
    const u32 sigma = 5;
    std::set<i64> offsets;
    for (u64 seed = 0; seed < 10000; ++seed) {
        Rig rig;
        FaultSpec spec = l1i_spec(0x48a08, 0xFF);
        spec.window_start = 800;
        spec.window_end = 900;
        spec.jitter_sigma = sigma;
        spec.seed = seed;
        rig.engine.arm(spec);
        i64 off = rig.engine.effective_window().first - 800;
        CHECK(off >= -2 * static_cast<i64>(sigma));
        CHECK(off <= 2 * static_cast<i64>(sigma));
        offsets.insert(off);
    }
    CHECK(offsets.size() == 4 * sigma + 1); // every value of the span seen
}

TEST_CASE("the latency floor clips early windows") {
    Rig rig;
    FaultSpec spec = l1i_spec(0x48a08, 0xFF);
    spec.window_start = 100; // below the 700-cycle bench floor
    spec.window_end = 900;
    rig.engine.arm(spec);
    CHECK(rig.engine.effective_window().first == 700);
}

TEST_CASE("F_L1I: xor lands in the installed L1I word only") {
    Rig rig;
    rig.fill_code(0x48a00, {0x11000001, 0x12100801, 0x31080000, 0x01000000});
    rig.engine.arm(l1i_spec(0x48a08, 0x11000000));
    rig.engine.set_trigger(0);

    u64 dram_before = rig.mem.state_digest(Level::DRAM);
    rig.mem.access(AccessKind::IFetch, 0x48a08, 4, 1000);

    CHECK(rig.engine.fired());
    CHECK(rig.mutation_count() == 1);

    // L1I holds the corrupted word
    auto fetched = rig.mem.access(AccessKind::IFetch, 0x48a08, 4, 2000);
    CHECK(fetched.hit_level == Level::L1I);
    CHECK(static_cast<u32>(fetched.data) == (0x31080000 ^ 0x11000000));

    // DRAM and L2 keep the intended value
    CHECK(rig.mem.state_digest(Level::DRAM) == dram_before);
    u8 l2_block[16];
    REQUIRE(rig.mem.peek_block(Level::L2, 0x48a00, l2_block));
    u32 l2_word;
    std::memcpy(&l2_word, l2_block + 8, 4);
    CHECK(l2_word == 0x31080000);

    // the L1I line is never dirty
    CHECK_FALSE(rig.mem.find_line(Level::L1I, 0x48a00)->dirty);

    // invalidation heals the sticky corruption
    rig.mem.ic_iallu();
    auto healed = rig.mem.access(AccessKind::IFetch, 0x48a08, 4, 3000);
    CHECK(static_cast<u32>(healed.data) == 0x31080000);
}

TEST_CASE("F_L1I fires at most once") {
    Rig rig;
    rig.fill_code(0x48a00, {1, 2, 3, 4});
    rig.engine.arm(l1i_spec(0x48a08, 0xFFFFFFFF));
    rig.engine.set_trigger(0);
    rig.mem.access(AccessKind::IFetch, 0x48a08, 4, 1000);
    rig.mem.ic_iallu();
    rig.mem.access(AccessKind::IFetch, 0x48a08, 4, 2000); // refill, still in window
    auto again = rig.mem.access(AccessKind::IFetch, 0x48a08, 4, 2500);
    CHECK(static_cast<u32>(again.data) == 3); // second fill unfaulted
    CHECK(rig.mutation_count() == 1);
}

TEST_CASE("F_L2 F1: a beat lands 16 bytes away inside the line") {
    Rig rig;
    // groups b0..b3 at 0x489c0/d0/e0/f0 with distinct bytes
    std::vector<u8> line(64);
    for (u32 i = 0; i < 64; ++i)
        line[i] = static_cast<u8>(3 * i + 1);
    rig.mem.load_bytes(0x489c0, line.data(), 64);

    FaultSpec spec;
    spec.model = FaultModel::F_L2_BEAT;
    spec.window_start = 700;
    spec.window_end = 100000;
    spec.l2.range_lo = 0x489f0;
    spec.l2.range_hi = 0x489ff;
    spec.l2.beat_delta = -16;
    rig.engine.arm(spec);
    rig.engine.set_trigger(0);

    rig.mem.access(AccessKind::IFetch, 0x489c0, 4, 1000);
    CHECK(rig.engine.fired());

    u8 block[16];
    REQUIRE(rig.mem.peek_block(Level::L2, 0x489e0, block));
    CHECK(std::memcmp(block, line.data() + 0x30, 16) == 0); // b3 data displaced into b2 slot
    REQUIRE(rig.mem.peek_block(Level::L2, 0x489f0, block));
    CHECK(std::memcmp(block, line.data() + 0x30, 16) == 0); // source slot keeps intended data

    // exactly 16 bytes deviate from DRAM
    auto probe = rig.mem.probe_read(0x489c0, 64);
    u32 diffs = 0;
    for (u32 i = 0; i < 64; ++i)
        if (probe[i] != line[i])
            diffs++;
    CHECK(diffs == 16);

    // the displaced install marks the line dirty, DRAM is still pristine
    CHECK(rig.mem.find_line(Level::L2, 0x489c0)->dirty);
    auto dram = std::vector<u8>(rig.mem.dram().begin() + 0x489c0, rig.mem.dram().begin() + 0x48a00);
    CHECK(std::memcmp(dram.data(), line.data(), 64) == 0);
}

TEST_CASE("F_L2 conservation: as many beat-writes land as in a clean run") {
    auto count_applied = [](bool with_fault) {
        Rig rig;
        std::vector<u8> line(64, 0xAB);
        rig.mem.load_bytes(0x489c0, line.data(), 64);
        if (with_fault) {
            FaultSpec spec;
            spec.model = FaultModel::F_L2_BEAT;
            spec.window_start = 700;
            spec.window_end = 100000;
            spec.l2.range_lo = 0x489f0;
            spec.l2.range_hi = 0x489ff;
            spec.l2.beat_delta = -16;
            rig.engine.arm(spec);
            rig.engine.set_trigger(0);
        }
        rig.mem.access(AccessKind::IFetch, 0x489c0, 4, 1000);
        u64 applied = 0;
        for (const auto& ev : rig.log.events())
            if (const auto* f = std::get_if<FillEvent>(&ev.body))
                if (f->trace.dst == Level::L2)
                    for (const auto& b : f->trace.beats)
                        if (!b.dropped)
                            applied++;
        return applied;
    };
    CHECK(count_applied(false) == count_applied(true));
}

TEST_CASE("F_L2 F2: stale L1D copy appears, cleared by dc_civac") {
    Rig rig;
    std::vector<u8> line(64);
    for (u32 i = 0; i < 64; ++i)
        line[i] = static_cast<u8>(0x40 + i);
    rig.mem.load_bytes(0x489c0, line.data(), 64);

    FaultSpec spec;
    spec.model = FaultModel::F_L2_BEAT;
    spec.window_start = 700;
    spec.window_end = 100000;
    spec.l2.range_lo = 0x489f0;
    spec.l2.range_hi = 0x489ff;
    spec.l2.beat_delta = -16;
    spec.l2.variant = FL2Params::Variant::F2;
    rig.engine.arm(spec);
    rig.engine.set_trigger(0);

    rig.mem.access(AccessKind::IFetch, 0x489c0, 4, 1000);

    // probe view shows the pre-fault bytes (stale L1D wins)...
    auto probe = rig.mem.probe_read(0x489e0, 16);
    CHECK(std::memcmp(probe.data(), line.data() + 0x20, 16) == 0);
    const CacheLine* stale = rig.mem.find_line(Level::L1D, 0x489c0);
    REQUIRE(stale != nullptr);
    CHECK_FALSE(stale->dirty);

    // ...until the line is invalidated to the point of coherency
    rig.mem.dc_civac(0x489f8);
    auto after = rig.mem.probe_read(0x489e0, 16);
    CHECK(std::memcmp(after.data(), line.data() + 0x30, 16) == 0); // the shifted group
}

TEST_CASE("F_MMU: walk base shift, PTE corruption, degraded tlbi") {
    Rig rig;
    FaultSpec spec;
    spec.model = FaultModel::F_MMU;
    spec.window_start = 700;
    spec.window_end = 100000;
    spec.mmu.table_shift_bytes = 0x3A0; // 116 entries -> +0x740000
    spec.mmu.shift_delta = 0x740000;
    spec.mmu.zero_lo = 0x80000;
    spec.mmu.zero_hi = 0xB0000;
    spec.mmu.pte_corrupt_mask = ~kPteOutputMask;
    rig.engine.arm(spec);
    rig.engine.set_trigger(0);

    u64 base_before = rig.mmu.walk_base();
    rig.mem.access(AccessKind::IFetch, 0x48000, 4, 1000); // carrier fill
    CHECK(rig.engine.fired());
    CHECK(rig.mmu.walk_base() == base_before + 0x3A0);
    CHECK_FALSE(rig.mmu.sw_invalidate_effective());

    CHECK((rig.mmu.at_query(0x80000) & kPteOutputMask) == 0);
    CHECK((rig.mmu.at_query(0xc0000) & kPteOutputMask) == 0x800000);

    auto before = rig.mmu.classify_mapping(0x80000, 0x100000, 65536);
    rig.mmu.tlbi_all();
    auto after = rig.mmu.classify_mapping(0x80000, 0x100000, 65536);
    CHECK(Mmu::render_mapping_report(before) == Mmu::render_mapping_report(after));
}

TEST_CASE("success_ratio zero or a shut window never fires") {
    auto run_clean = [](double ratio, i64 wstart, i64 wend, bool trigger) {
        Rig rig;
        std::vector<u8> bytes(64, 0x5A);
        rig.mem.load_bytes(0x48a00, bytes.data(), 64);
        FaultSpec spec = l1i_spec(0x48a08, 0xFFFFFFFF);
        spec.success_ratio = ratio;
        spec.window_start = wstart;
        spec.window_end = wend;
        rig.engine.arm(spec);
        if (trigger)
            rig.engine.set_trigger(5000);
        rig.mem.access(AccessKind::IFetch, 0x48a08, 4, 6000);
        return rig.engine.fired();
    };
    CHECK_FALSE(run_clean(0.0, 700, 100000, true)); // ratio 0
    CHECK_FALSE(run_clean(1.0, 700, 800, true));    // events after the window
    CHECK_FALSE(run_clean(1.0, -9000, -8000, true)); // window before the trigger
    CHECK_FALSE(run_clean(1.0, 700, 100000, false)); // no trigger ever seen
}
