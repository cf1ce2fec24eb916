#include "socfault/assembler.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace socfault {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_u64(const std::string& text, u64& out) {
    std::string t = strip(text);
    if (t.empty())
        return false;
    bool neg = false;
    if (t[0] == '-') {
        neg = true;
        t = t.substr(1);
    }
    int base = 10;
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X'))
        base = 16;
    char* end = nullptr;
    unsigned long long v = std::strtoull(t.c_str(), &end, base);
    if (end == nullptr || *end != '\0')
        return false;
    out = neg ? static_cast<u64>(-static_cast<i64>(v)) : v;
    return true;
}

struct Operand {
    enum class Kind { Reg, Imm, Label, MemBase, MemBaseImm } kind;
    u8 reg = 0;
    u8 reg2 = 0;
    i64 imm = 0;
    std::string label;
};

struct PendingLine {
    int line_no;
    u64 addr;
    DecodedInstruction ins;
    bool needs_label = false;
    std::string label; // branch target to resolve
};

bool parse_reg(const std::string& tok, u8& out) {
    std::string t = lower(strip(tok));
    if (t.size() < 2 || t[0] != 'x')
        return false;
    u64 idx;
    if (!parse_u64(t.substr(1), idx) || idx >= kNumRegs)
        return false;
    out = static_cast<u8>(idx);
    return true;
}

std::vector<std::string> split_operands(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '[')
            depth++;
        if (c == ']')
            depth--;
        if (c == ',' && depth == 0) {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!strip(cur).empty())
        out.push_back(strip(cur));
    return out;
}

} // namespace

AsmError::AsmError(const std::string& file, int line_no, const std::string& msg)
    : std::runtime_error(file + ":" + std::to_string(line_no) + ": " + msg), line(line_no) {}

ProgramImage assemble(const std::string& source, const std::string& file_name) {
    std::map<std::string, u64> labels;
    std::vector<PendingLine> pending;
    std::map<u64, u32> words; // addr -> word
    bool base_set = false;
    u64 base = 0x48000;
    u64 cursor = base;

    auto fail = [&](int line_no, const std::string& msg) -> void {
        throw AsmError(file_name, line_no, msg);
    };

    std::istringstream in(source);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        line_no++;
        std::string line = raw;
        if (auto pos = line.find(';'); pos != std::string::npos)
            line = line.substr(0, pos);
        line = strip(line);
        if (line.empty())
            continue;

        // Leading labels, possibly followed by an instruction.
        while (true) {
            auto colon = line.find(':');
            if (colon == std::string::npos)
                break;
            std::string head = strip(line.substr(0, colon));
            if (head.empty() || head.find_first_of(" \t") != std::string::npos)
                fail(line_no, "malformed label");
            if (labels.count(head))
                fail(line_no, "duplicate label '" + head + "'");
            labels[head] = cursor;
            line = strip(line.substr(colon + 1));
            if (line.empty())
                break;
        }
        if (line.empty())
            continue;

        // Directive.
        if (line[0] == '.') {
            std::istringstream ls(line);
            std::string dir, arg;
            ls >> dir >> arg;
            if (lower(dir) == ".org") {
                u64 addr;
                if (!parse_u64(arg, addr) || addr % 4 != 0)
                    fail(line_no, "bad .org address");
                if (!base_set) {
                    base = addr;
                    base_set = true;
                } else if (addr < cursor) {
                    fail(line_no, ".org moves backwards");
                }
                cursor = addr;
            } else {
                fail(line_no, "unknown directive '" + dir + "'");
            }
            continue;
        }
        if (!base_set) {
            base = cursor;
            base_set = true;
        }

        // Mnemonic + operands.
        std::string mnemonic, rest;
        {
            auto sp = line.find_first_of(" \t");
            if (sp == std::string::npos) {
                mnemonic = lower(line);
            } else {
                mnemonic = lower(line.substr(0, sp));
                rest = strip(line.substr(sp + 1));
            }
        }

        Opcode op{};
        bool found = false;
        for (u32 raw_op = 0; raw_op < 256; ++raw_op) {
            if (!opcode_valid(static_cast<u8>(raw_op)))
                continue;
            if (opcode_info(static_cast<Opcode>(raw_op))->mnemonic == mnemonic) {
                op = static_cast<Opcode>(raw_op);
                found = true;
                break;
            }
        }
        if (!found)
            fail(line_no, "unknown mnemonic '" + mnemonic + "'");

        const OpcodeInfo* info = opcode_info(op);
        std::vector<std::string> ops = split_operands(rest);

        PendingLine pl;
        pl.line_no = line_no;
        pl.addr = cursor;
        pl.ins.opcode = op;

        auto take = [&](std::size_t i) -> const std::string& {
            if (i >= ops.size())
                fail(line_no, "missing operand");
            return ops[i];
        };
        auto parse_imm_or_label = [&](const std::string& tok) {
            std::string t = strip(tok);
            if (!t.empty() && t[0] == '#') {
                u64 v;
                bool neg = t.size() > 1 && t[1] == '-';
                if (!parse_u64(t.substr(1), v))
                    fail(line_no, "bad immediate '" + t + "'");
                i64 sv = static_cast<i64>(v);
                if (info->imm_signed) {
                    if (sv < kImmMin || sv > kImmMax)
                        fail(line_no, "immediate out of 14-bit signed range");
                } else {
                    if (neg || v > kImmUMax)
                        fail(line_no, "immediate out of 14-bit range");
                }
                pl.ins.imm = static_cast<i32>(sv);
            } else if (info->imm_signed) {
                pl.needs_label = true;
                pl.label = t;
            } else {
                fail(line_no, "expected immediate");
            }
        };

        std::size_t idx = 0;
        switch (op) {
        case Opcode::NOP:
        case Opcode::HALT:
        case Opcode::TRIG:
        case Opcode::IC_IALLU:
        case Opcode::TLBI_ALL:
            break;
        case Opcode::WAIT:
        case Opcode::B:
            parse_imm_or_label(take(idx++));
            break;
        case Opcode::MOVI:
        case Opcode::CBNZ:
            if (!parse_reg(take(idx++), pl.ins.rd))
                fail(line_no, "bad register");
            parse_imm_or_label(take(idx++));
            break;
        case Opcode::ADDI:
        case Opcode::SUBI:
            if (!parse_reg(take(idx++), pl.ins.rd))
                fail(line_no, "bad register");
            if (!parse_reg(take(idx++), pl.ins.rn))
                fail(line_no, "bad register");
            parse_imm_or_label(take(idx++));
            break;
        case Opcode::ADD:
            if (!parse_reg(take(idx++), pl.ins.rd))
                fail(line_no, "bad register");
            if (!parse_reg(take(idx++), pl.ins.rn))
                fail(line_no, "bad register");
            if (!parse_reg(take(idx++), pl.ins.rm))
                fail(line_no, "bad register");
            break;
        case Opcode::LDR:
        case Opcode::STR: {
            if (!parse_reg(take(idx++), pl.ins.rd))
                fail(line_no, "bad register");
            std::string mem = strip(take(idx++));
            if (mem.size() < 2 || mem.front() != '[' || mem.back() != ']')
                fail(line_no, "expected [xN] or [xN, #imm]");
            auto inner = split_operands(mem.substr(1, mem.size() - 2));
            if (inner.empty() || inner.size() > 2)
                fail(line_no, "bad address operand");
            if (!parse_reg(inner[0], pl.ins.rn))
                fail(line_no, "bad base register");
            if (inner.size() == 2) {
                std::string t = strip(inner[1]);
                u64 v;
                if (t.empty() || t[0] != '#' || !parse_u64(t.substr(1), v) || v > kImmUMax)
                    fail(line_no, "bad offset");
                pl.ins.imm = static_cast<i32>(v);
            }
            break;
        }
        case Opcode::DC_CIVAC: {
            if (!parse_reg(take(idx++), pl.ins.rn))
                fail(line_no, "bad register");
            break;
        }
        case Opcode::AT:
            if (!parse_reg(take(idx++), pl.ins.rd))
                fail(line_no, "bad register");
            if (!parse_reg(take(idx++), pl.ins.rn))
                fail(line_no, "bad register");
            break;
        }
        if (idx != ops.size())
            fail(line_no, "trailing operands");

        pending.push_back(pl);
        cursor += 4;
    }

    ProgramImage image;
    image.base = base;
    image.entry = base;
    if (!pending.empty()) {
        u64 hi = 0;
        for (const auto& pl : pending)
            hi = std::max(hi, pl.addr + 4);
        image.words.assign((hi - base) / 4, 0);
    }

    for (auto& pl : pending) {
        if (pl.needs_label) {
            auto it = labels.find(pl.label);
            if (it == labels.end())
                throw AsmError(file_name, pl.line_no, "unresolved label '" + pl.label + "'");
            i64 delta_words = (static_cast<i64>(it->second) - static_cast<i64>(pl.addr)) / 4;
            if (delta_words < kImmMin || delta_words > kImmMax)
                throw AsmError(file_name, pl.line_no, "branch target out of range");
            pl.ins.imm = static_cast<i32>(delta_words);
        }
        image.words[(pl.addr - base) / 4] = encode(pl.ins);
    }
    return image;
}

ProgramImage assemble_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return assemble(ss.str(), path);
}

void save_image(const ProgramImage& image, const std::string& bin_path) {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + bin_path);
    for (u32 w : image.words) {
        u8 b[4] = {static_cast<u8>(w), static_cast<u8>(w >> 8), static_cast<u8>(w >> 16),
                   static_cast<u8>(w >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    nlohmann::json side = {{"base", image.base}, {"entry", image.entry}};
    std::ofstream js(bin_path + ".json");
    js << side.dump(2) << "\n";
}

ProgramImage load_image(const std::string& bin_path) {
    std::ifstream in(bin_path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + bin_path);
    std::vector<u8> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 4 != 0)
        throw std::runtime_error(bin_path + ": image size not word-aligned");

    ProgramImage image;
    std::ifstream js(bin_path + ".json");
    if (!js)
        throw std::runtime_error("missing sidecar " + bin_path + ".json");
    nlohmann::json side = nlohmann::json::parse(js);
    image.base = side.at("base").get<u64>();
    image.entry = side.at("entry").get<u64>();

    image.words.resize(bytes.size() / 4);
    for (std::size_t i = 0; i < image.words.size(); ++i) {
        image.words[i] = static_cast<u32>(bytes[i * 4]) | (static_cast<u32>(bytes[i * 4 + 1]) << 8) |
                         (static_cast<u32>(bytes[i * 4 + 2]) << 16) |
                         (static_cast<u32>(bytes[i * 4 + 3]) << 24);
    }
    return image;
}

} // namespace socfault
