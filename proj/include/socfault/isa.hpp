#pragma once

#include "socfault/types.hpp"

#include <optional>
#include <string>

namespace socfault {

// 32-bit fixed-width encoding:
//   opcode = word[31:24], rd = word[23:19], rn = word[18:14],
//   rm = word[13:9], imm = word[13:0] (rm and imm overlap).
enum class Opcode : u8 {
    NOP = 0x00,
    HALT = 0x01,
    TRIG = 0x02,
    WAIT = 0x03,
    MOVI = 0x10,
    ADDI = 0x11,
    SUBI = 0x12,
    ADD = 0x13,
    LDR = 0x20,
    STR = 0x21,
    B = 0x30,
    CBNZ = 0x31,
    IC_IALLU = 0x40,
    DC_CIVAC = 0x41,
    TLBI_ALL = 0x42,
    AT = 0x43,
};

inline constexpr u32 kNumRegs = 31; // x0..x30
inline constexpr i32 kImmMin = -(1 << 13);
inline constexpr i32 kImmMax = (1 << 13) - 1;
inline constexpr u32 kImmUMax = (1 << 14) - 1;

struct DecodedInstruction {
    Opcode opcode = Opcode::NOP;
    u8 rd = 0;
    u8 rn = 0;
    u8 rm = 0;
    i32 imm = 0; // sign-extended for B/CBNZ, zero-extended otherwise

    bool operator==(const DecodedInstruction&) const = default;
};

// Which encoding fields an opcode consumes.
struct OpcodeInfo {
    const char* mnemonic;
    bool uses_rd, uses_rn, uses_rm, uses_imm, imm_signed;
};

const OpcodeInfo* opcode_info(Opcode op);
bool opcode_valid(u8 raw);

/// Total decoder: returns nullopt for words with an unknown opcode or an
/// out-of-range register in a used field (an UndefinedInstruction trap).
std::optional<DecodedInstruction> decode(u32 word);

u32 encode(const DecodedInstruction& ins);

std::string disassemble(const DecodedInstruction& ins);
std::string disassemble_word(u32 word);

} // namespace socfault
