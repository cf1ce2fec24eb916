#include "socfault/isa.hpp"

#include <cstdio>

namespace socfault {

const char* level_name(Level lv) {
    switch (lv) {
    case Level::L1I: return "L1I";
    case Level::L1D: return "L1D";
    case Level::L2: return "L2";
    case Level::DRAM: return "DRAM";
    }
    return "?";
}

std::string hex(u64 v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string hex_bytes(const u8* data, std::size_t len) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xF]);
    }
    return out;
}

namespace {

struct OpcodeEntry {
    Opcode op;
    OpcodeInfo info;
};

// mnemonic, rd, rn, rm, imm, imm_signed
constexpr OpcodeEntry kOpcodeTable[] = {
    {Opcode::NOP, {"nop", false, false, false, false, false}},
    {Opcode::HALT, {"halt", false, false, false, false, false}},
    {Opcode::TRIG, {"trig", false, false, false, false, false}},
    {Opcode::WAIT, {"wait", false, false, false, true, false}},
    {Opcode::MOVI, {"movi", true, false, false, true, false}},
    {Opcode::ADDI, {"addi", true, true, false, true, false}},
    {Opcode::SUBI, {"subi", true, true, false, true, false}},
    {Opcode::ADD, {"add", true, true, true, false, false}},
    {Opcode::LDR, {"ldr", true, true, false, true, false}},
    {Opcode::STR, {"str", true, true, false, true, false}},
    {Opcode::B, {"b", false, false, false, true, true}},
    {Opcode::CBNZ, {"cbnz", true, false, false, true, true}},
    {Opcode::IC_IALLU, {"ic_iallu", false, false, false, false, false}},
    {Opcode::DC_CIVAC, {"dc_civac", false, true, false, false, false}},
    {Opcode::TLBI_ALL, {"tlbi_all", false, false, false, false, false}},
    {Opcode::AT, {"at", true, true, false, false, false}},
};

const OpcodeInfo* lookup(u8 raw) {
    for (const auto& e : kOpcodeTable)
        if (static_cast<u8>(e.op) == raw)
            return &e.info;
    return nullptr;
}

} // namespace

const OpcodeInfo* opcode_info(Opcode op) { return lookup(static_cast<u8>(op)); }

bool opcode_valid(u8 raw) { return lookup(raw) != nullptr; }

std::optional<DecodedInstruction> decode(u32 word) {
    const u8 raw = static_cast<u8>(word >> 24);
    const OpcodeInfo* info = lookup(raw);
    if (!info)
        return std::nullopt;

    DecodedInstruction ins;
    ins.opcode = static_cast<Opcode>(raw);
    if (info->uses_rd) {
        ins.rd = static_cast<u8>((word >> 19) & 0x1F);
        if (ins.rd >= kNumRegs)
            return std::nullopt;
    }
    if (info->uses_rn) {
        ins.rn = static_cast<u8>((word >> 14) & 0x1F);
        if (ins.rn >= kNumRegs)
            return std::nullopt;
    }
    if (info->uses_rm) {
        ins.rm = static_cast<u8>((word >> 9) & 0x1F);
        if (ins.rm >= kNumRegs)
            return std::nullopt;
    }
    if (info->uses_imm) {
        u32 raw_imm = word & 0x3FFF;
        if (info->imm_signed && (raw_imm & 0x2000))
            ins.imm = static_cast<i32>(raw_imm) - (1 << 14);
        else
            ins.imm = static_cast<i32>(raw_imm);
    }
    return ins;
}

u32 encode(const DecodedInstruction& ins) {
    const OpcodeInfo* info = opcode_info(ins.opcode);
    u32 word = static_cast<u32>(ins.opcode) << 24;
    if (info->uses_rd)
        word |= (static_cast<u32>(ins.rd) & 0x1F) << 19;
    if (info->uses_rn)
        word |= (static_cast<u32>(ins.rn) & 0x1F) << 14;
    if (info->uses_rm)
        word |= (static_cast<u32>(ins.rm) & 0x1F) << 9;
    if (info->uses_imm)
        word |= static_cast<u32>(ins.imm) & 0x3FFF;
    return word;
}

std::string disassemble(const DecodedInstruction& ins) {
    const OpcodeInfo* info = opcode_info(ins.opcode);
    std::string out = info->mnemonic;
    char buf[32];
    switch (ins.opcode) {
    case Opcode::NOP:
    case Opcode::HALT:
    case Opcode::TRIG:
    case Opcode::IC_IALLU:
    case Opcode::TLBI_ALL:
        break;
    case Opcode::WAIT:
    case Opcode::B:
        std::snprintf(buf, sizeof buf, " #%d", ins.imm);
        out += buf;
        break;
    case Opcode::MOVI:
    case Opcode::CBNZ:
        std::snprintf(buf, sizeof buf, " x%u, #%d", ins.rd, ins.imm);
        out += buf;
        break;
    case Opcode::ADDI:
    case Opcode::SUBI:
        std::snprintf(buf, sizeof buf, " x%u, x%u, #%d", ins.rd, ins.rn, ins.imm);
        out += buf;
        break;
    case Opcode::ADD:
        std::snprintf(buf, sizeof buf, " x%u, x%u, x%u", ins.rd, ins.rn, ins.rm);
        out += buf;
        break;
    case Opcode::LDR:
    case Opcode::STR:
        std::snprintf(buf, sizeof buf, " x%u, [x%u, #%d]", ins.rd, ins.rn, ins.imm);
        out += buf;
        break;
    case Opcode::DC_CIVAC:
        std::snprintf(buf, sizeof buf, " x%u", ins.rn);
        out += buf;
        break;
    case Opcode::AT:
        std::snprintf(buf, sizeof buf, " x%u, x%u", ins.rd, ins.rn);
        out += buf;
        break;
    }
    return out;
}

std::string disassemble_word(u32 word) {
    auto ins = decode(word);
    if (!ins) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ".word 0x%08x", word);
        return buf;
    }
    return disassemble(*ins);
}

} // namespace socfault
