#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "socfault/assembler.hpp"
#include "socfault/isa.hpp"

#include <filesystem>

using namespace socfault;

TEST_CASE("fixed encodings from the opcode table") {
    CHECK(decode(0x00000000)->opcode == Opcode::NOP);
    CHECK(decode(0x01000000)->opcode == Opcode::HALT);

    auto movi = decode(0x10080032);
    REQUIRE(movi.has_value());
    CHECK(movi->opcode == Opcode::MOVI);
    CHECK(movi->rd == 1);
    CHECK(movi->imm == 50);
    CHECK(disassemble(*movi) == "movi x1, #50");

    DecodedInstruction i;
    i.opcode = Opcode::MOVI;
    i.rd = 1;
    i.imm = 50;
    CHECK(encode(i) == 0x10080032);
}

TEST_CASE("unknown opcodes and bad registers become undefined, never abort") {
    CHECK_FALSE(decode(0x05000000).has_value());
    CHECK_FALSE(decode(0xFF123456).has_value());
    // rd = 31 in a used field
    DecodedInstruction i;
    i.opcode = Opcode::MOVI;
    i.rd = 31;
    CHECK_FALSE(decode(encode(i)).has_value());

    SplitMix64 rng(37);
    for (int k = 0; k < 200000; ++k) {
        u32 w = static_cast<u32>(rng.next());
        auto d = decode(w); // must not throw
        if (d)
            CHECK(opcode_valid(static_cast<u8>(w >> 24)));
    }
}

TEST_CASE("immediate extension: signed for branches, unsigned elsewhere") {
    DecodedInstruction b;
    b.opcode = Opcode::B;
    b.imm = -3;
    auto rb = decode(encode(b));
    REQUIRE(rb.has_value());
    CHECK(rb->imm == -3);

    DecodedInstruction w;
    w.opcode = Opcode::WAIT;
    w.imm = 0x3FFF; // max unsigned 14-bit
    auto rw = decode(encode(w));
    REQUIRE(rw.has_value());
    CHECK(rw->imm == 0x3FFF);
}

TEST_CASE("decode(encode(i)) round-trips over random valid instructions") {
    SplitMix64 rng(11);
    const Opcode all[] = {Opcode::NOP,  Opcode::HALT, Opcode::TRIG,     Opcode::WAIT,
                          Opcode::MOVI, Opcode::ADDI, Opcode::SUBI,     Opcode::ADD,
                          Opcode::LDR,  Opcode::STR,  Opcode::B,        Opcode::CBNZ,
                          Opcode::IC_IALLU, Opcode::DC_CIVAC, Opcode::TLBI_ALL, Opcode::AT};
    for (int k = 0; k < 20000; ++k) {
        DecodedInstruction i;
        i.opcode = all[rng.next_below(16)];
        const OpcodeInfo* info = opcode_info(i.opcode);
        if (info->uses_rd)
            i.rd = static_cast<u8>(rng.next_below(kNumRegs));
        if (info->uses_rn)
            i.rn = static_cast<u8>(rng.next_below(kNumRegs));
        if (info->uses_rm)
            i.rm = static_cast<u8>(rng.next_below(kNumRegs));
        if (info->uses_imm)
            i.imm = info->imm_signed ? static_cast<i32>(rng.next_below(16384)) - 8192
                                     : static_cast<i32>(rng.next_below(16384));
        auto r = decode(encode(i));
        REQUIRE(r.has_value());
        CHECK(*r == i);
    }
}

TEST_CASE("assembler basics") {
    CHECK(assemble("nop").words == std::vector<u32>{0x00000000});

    auto image = assemble("  movi x1, #50   ; comment\n");
    CHECK(image.words == std::vector<u32>{0x10080032});
    CHECK(image.base == 0x48000);

    auto prog = assemble(".org 0x1000\n"
                         "start:\n"
                         "  movi x2, #3\n"
                         "loop: subi x2, x2, #1\n"
                         "  cbnz x2, loop\n"
                         "  b start\n"
                         "  halt\n");
    CHECK(prog.base == 0x1000);
    // cbnz at 0x1008 targets 0x1004 -> imm -1; b at 0x100c targets 0x1000 -> imm -3
    auto cbnz = decode(prog.words[2]);
    CHECK(cbnz->imm == -1);
    auto b = decode(prog.words[3]);
    CHECK(b->imm == -3);
}

TEST_CASE("assembler gaps and multiple .org") {
    auto image = assemble(".org 0x100\nnop\n.org 0x110\nhalt\n");
    CHECK(image.base == 0x100);
    CHECK(image.words.size() == 5);
    CHECK(image.words[0] == 0x00000000);
    CHECK(image.words[1] == 0x00000000); // gap zero-filled
    CHECK(decode(image.words[4])->opcode == Opcode::HALT);
}

TEST_CASE("assembler errors carry file and line") {
    CHECK_THROWS_AS(assemble("frobnicate x1"), AsmError);
    CHECK_THROWS_AS(assemble("movi x1, #99999"), AsmError);
    CHECK_THROWS_AS(assemble("b nowhere"), AsmError);
    CHECK_THROWS_AS(assemble("movi x31, #1"), AsmError);
    try {
        assemble("nop\nnop\nbogus", "file.s");
        FAIL("expected AsmError");
    } catch (const AsmError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("file.s:3") != std::string::npos);
    }
}

TEST_CASE("disassemble(assemble(x)) round-trips the corpus") {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(SOCFAULT_ASSETS_DIR) / "programs";
    REQUIRE(fs::exists(dir));
    int programs = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".s")
            continue;
        programs++;
        ProgramImage image = assemble_file(entry.path().string());
        // Every non-gap word must disassemble and re-assemble to itself.
        for (u32 w : image.words) {
            auto d = decode(w);
            REQUIRE(d.has_value());
            ProgramImage re = assemble(disassemble(*d));
            REQUIRE(re.words.size() == 1);
            CHECK(re.words[0] == w);
        }
    }
    CHECK(programs >= 3);
}

TEST_CASE("image save/load round-trip with sidecar") {
    auto image = assemble(".org 0x2000\nmovi x3, #7\nhalt\n");
    auto tmp = std::filesystem::temp_directory_path() / "socfault_img_test.bin";
    save_image(image, tmp.string());
    ProgramImage loaded = load_image(tmp.string());
    CHECK(loaded.base == image.base);
    CHECK(loaded.entry == image.entry);
    CHECK(loaded.words == image.words);
    std::filesystem::remove(tmp);
    std::filesystem::remove(tmp.string() + ".json");
}
