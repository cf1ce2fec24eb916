#include "socfault/repl.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>
#include <vector>

namespace socfault {

namespace {

u64 parse_num(const std::string& tok) { return std::stoull(tok, nullptr, 0); }

void print_step(std::ostream& out, const StepRecord& rec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%llx: %-24s", static_cast<unsigned long long>(rec.pc),
                  disassemble_word(rec.word).c_str());
    out << buf;
    if (rec.reg_written >= 0) {
        std::snprintf(buf, sizeof buf, " x%d=0x%llx", rec.reg_written,
                      static_cast<unsigned long long>(rec.reg_value));
        out << buf;
    }
    if (rec.mem_written) {
        std::snprintf(buf, sizeof buf, " [0x%llx]=0x%llx",
                      static_cast<unsigned long long>(rec.mem_addr),
                      static_cast<unsigned long long>(rec.mem_value));
        out << buf;
    }
    out << "\n";
}

void hexdump(std::ostream& out, const std::vector<u8>& bytes, u64 base) {
    char buf[32];
    for (std::size_t i = 0; i < bytes.size(); i += 16) {
        std::snprintf(buf, sizeof buf, "0x%08llx:", static_cast<unsigned long long>(base + i));
        out << buf;
        for (std::size_t k = i; k < std::min(bytes.size(), i + 16); ++k) {
            std::snprintf(buf, sizeof buf, " %02x", bytes[k]);
            out << buf;
        }
        out << "\n";
    }
}

} // namespace

void run_repl(Simulator& sim, std::istream& in, std::ostream& out) {
    ProbeSession probe(sim);
    probe.halt();
    out << "probe attached; core " << (sim.state().status == RunStatus::Running ? "runnable"
                                                                                : "stopped")
        << " at pc=" << hex(sim.state().pc) << "\n";

    std::string line;
    while (out << "(probe) " << std::flush, std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cmd;
        if (!(ls >> cmd))
            continue;
        try {
            if (cmd == "q" || cmd == "quit") {
                break;
            } else if (cmd == "halt") {
                probe.halt();
                out << "halted at pc=" << hex(probe.pc()) << "\n";
            } else if (cmd == "go") {
                u64 limit = 1000000;
                std::string tok;
                if (ls >> tok)
                    limit = parse_num(tok);
                RunResult res = probe.resume(limit);
                out << termination_name(res.termination);
                if (res.termination == Termination::Halted)
                    out << " output=" << res.output_words[0];
                if (res.termination == Termination::Trap)
                    out << " (" << trap_reason_name(res.trap) << ")";
                out << " cycles=" << res.cycles << "\n";
            } else if (cmd == "s") {
                u64 n = 1;
                std::string tok;
                if (ls >> tok)
                    n = parse_num(tok);
                for (const auto& rec : probe.step_n(n))
                    print_step(out, rec);
            } else if (cmd == "rr") {
                std::string tok;
                ls >> tok;
                u32 i = static_cast<u32>(parse_num(tok));
                out << "x" << i << " = " << hex(probe.read_reg(i)) << "\n";
            } else if (cmd == "wr") {
                std::string ri, rv;
                ls >> ri >> rv;
                probe.write_reg(static_cast<u32>(parse_num(ri)), parse_num(rv));
            } else if (cmd == "pc") {
                std::string tok;
                ls >> tok;
                probe.set_pc(parse_num(tok));
            } else if (cmd == "md") {
                std::string ta, tl;
                ls >> ta >> tl;
                u64 addr = parse_num(ta);
                hexdump(out, probe.read_mem(addr, parse_num(tl)), addr);
            } else if (cmd == "exec") {
                std::vector<u32> words;
                std::vector<std::pair<u32, u64>> inputs;
                std::string tok;
                while (ls >> tok) {
                    if (tok.size() > 1 && (tok[0] == 'x' || tok[0] == 'X') &&
                        tok.find('=') != std::string::npos) {
                        auto eq = tok.find('=');
                        inputs.emplace_back(static_cast<u32>(parse_num(tok.substr(1, eq - 1))),
                                            parse_num(tok.substr(eq + 1)));
                    } else {
                        words.push_back(static_cast<u32>(std::stoull(tok, nullptr, 16)));
                    }
                }
                ExecResult res = probe.exec_at(words, inputs);
                if (res.trapped)
                    out << "injected code trapped: " << trap_reason_name(res.reason) << "\n";
                else
                    out << "x0 = " << hex(res.regs[0]) << "\n";
            } else if (cmd == "map") {
                std::string tl, th;
                ls >> tl >> th;
                auto records = sim.mmu().classify_mapping(parse_num(tl), parse_num(th),
                                                          sim.mmu().config().page_bytes);
                out << Mmu::render_mapping_report(records);
            } else if (cmd == "iciallu") {
                sim.mem().ic_iallu();
            } else if (cmd == "civac") {
                std::string tok;
                ls >> tok;
                u64 vaddr = parse_num(tok);
                u64 par = sim.mmu().at_query(vaddr);
                if (par & kParFault) {
                    out << "translation fault\n";
                } else {
                    sim.mem().dc_civac((par & kPteOutputMask) |
                                       (vaddr % sim.mmu().config().page_bytes));
                }
            } else if (cmd == "tlbi") {
                sim.mmu().tlbi_all();
            } else if (cmd == "regs") {
                for (u32 i = 0; i < kNumRegs; ++i)
                    if (sim.state().x[i] != 0)
                        out << "x" << i << " = " << hex(sim.state().x[i]) << "\n";
                out << "pc = " << hex(sim.state().pc) << "\n";
            } else {
                out << "unknown command '" << cmd << "'\n";
            }
        } catch (const std::exception& e) {
            out << "error: " << e.what() << "\n";
        }
    }
}

} // namespace socfault
