#include "socfault/probe.hpp"

#include <cstdio>
#include <sstream>

namespace socfault {

GoldenTrace record_golden_trace(Simulator& sim, u64 start_pc, u64 max_steps) {
    GoldenTrace trace;
    trace.start_pc = start_pc;
    u64 guard = 0;
    while (sim.state().status == RunStatus::Running && sim.state().pc != start_pc) {
        sim.step();
        if (++guard > max_steps)
            throw std::runtime_error("golden trace: start_pc never reached");
    }
    if (sim.state().status != RunStatus::Running)
        throw std::runtime_error("golden trace: core stopped before start_pc");
    trace.regs0 = sim.state().x;
    for (u64 i = 0; i < max_steps && sim.state().status == RunStatus::Running; ++i)
        trace.entries.push_back(sim.step());
    return trace;
}

std::string DivergenceReport::render() const {
    std::ostringstream out;
    if (!diverged) {
        out << "replay matches the reference trace\n";
        return out.str();
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "first divergence at pc=0x%llx\n",
                  static_cast<unsigned long long>(first_divergent_pc));
    out << buf;
    out << "  expected: " << disassemble_word(expected.word);
    if (expected.reg_written >= 0) {
        std::snprintf(buf, sizeof buf, "  (x%d <- 0x%llx)", expected.reg_written,
                      static_cast<unsigned long long>(expected.reg_value));
        out << buf;
    }
    out << "\n  observed: " << disassemble_word(observed.word);
    if (observed.reg_written >= 0) {
        std::snprintf(buf, sizeof buf, "  (x%d <- 0x%llx)", observed.reg_written,
                      static_cast<unsigned long long>(observed.reg_value));
        out << buf;
    }
    out << "\n";
    if (!reconstruction.empty()) {
        out << "reconstructed instruction stream:\n";
        for (const auto& r : reconstruction) {
            std::snprintf(buf, sizeof buf, "  0x%llx: %-28s",
                          static_cast<unsigned long long>(r.pc),
                          disassemble_word(r.word).c_str());
            out << buf << "\n";
        }
    }
    return out.str();
}

ProbeSession::ProbeSession(Simulator& sim) : sim_(sim) { sim_.fault().set_suppressed(true); }

ProbeSession::~ProbeSession() { sim_.fault().set_suppressed(false); }

void ProbeSession::require_halted(const char* what) const {
    if (!halted_)
        throw ProbeError(std::string(what) + " requires a halted core");
}

void ProbeSession::halt() { halted_ = true; }

RunResult ProbeSession::resume(u64 cycle_limit) {
    require_halted("resume");
    if (sim_.state().status != RunStatus::Running) {
        sim_.state().status = RunStatus::Running;
        sim_.state().trap = TrapReason::None;
    }
    halted_ = false;
    RunResult res = sim_.run(sim_.state().cycles + cycle_limit);
    halted_ = true;
    return res;
}

std::vector<StepRecord> ProbeSession::step_n(u64 n) {
    require_halted("step");
    std::vector<StepRecord> out;
    if (sim_.state().status != RunStatus::Running) {
        sim_.state().status = RunStatus::Running;
        sim_.state().trap = TrapReason::None;
    }
    for (u64 i = 0; i < n && sim_.state().status == RunStatus::Running; ++i)
        out.push_back(sim_.step());
    return out;
}

u64 ProbeSession::read_reg(u32 i) const {
    if (i >= kNumRegs)
        throw ProbeError("register index out of range");
    return sim_.state().x[i];
}

void ProbeSession::write_reg(u32 i, u64 v) {
    require_halted("write_reg");
    if (i >= kNumRegs)
        throw ProbeError("register index out of range");
    sim_.state().x[i] = v;
}

void ProbeSession::set_pc(u64 addr) {
    require_halted("set_pc");
    if (addr % 4 != 0)
        throw ProbeError("pc must be 4-byte aligned");
    sim_.state().pc = addr;
    sim_.state().status = RunStatus::Running;
    sim_.state().trap = TrapReason::None;
}

std::vector<u8> ProbeSession::read_mem(u64 vaddr, u64 len) const {
    std::vector<u8> out;
    out.reserve(len);
    const u64 page = sim_.mmu().config().page_bytes;
    u64 v = vaddr;
    while (out.size() < len) {
        u64 par = sim_.mmu().at_query(v);
        if (par & kParFault)
            throw ProbeError("translation fault at " + hex(v));
        u64 paddr = (par & kPteOutputMask) | (v % page);
        u64 chunk = std::min(len - out.size(), page - (v % page));
        auto bytes = sim_.mem().probe_read(paddr, chunk);
        out.insert(out.end(), bytes.begin(), bytes.end());
        v += chunk;
    }
    return out;
}

ExecResult ProbeSession::exec_at(const std::vector<u32>& words,
                                 const std::vector<std::pair<u32, u64>>& inputs) {
    require_halted("exec_at");
    if (words.empty())
        throw ProbeError("exec_at: no instructions given");

    const u64 scratch = sim_.config().scratch_base;
    MachineState saved = sim_.state();

    // Write the injected words through the data path, then push them to the
    // point of coherency and drop any stale L1I copies of the scratch lines.
    for (std::size_t i = 0; i < words.size(); ++i) {
        u64 v = scratch + i * 4;
        u64 par = sim_.mmu().at_query(v);
        if (par & kParFault)
            throw ProbeError("scratch region not mapped at " + hex(v));
        u64 paddr = (par & kPteOutputMask) | (v % sim_.mmu().config().page_bytes);
        sim_.mem().access(AccessKind::Store, paddr, 4, sim_.state().cycles, words[i]);
    }
    u64 first_line = scratch & ~static_cast<u64>(kLineBytes - 1);
    u64 last_line = (scratch + words.size() * 4 - 1) & ~static_cast<u64>(kLineBytes - 1);
    for (u64 lp = first_line; lp <= last_line; lp += kLineBytes) {
        sim_.mem().dc_civac(lp);
        sim_.mem().invalidate_l1i_line(lp);
    }

    for (const auto& [idx, value] : inputs) {
        if (idx >= kNumRegs)
            throw ProbeError("register index out of range");
        sim_.state().x[idx] = value;
    }
    sim_.state().pc = scratch;
    sim_.state().status = RunStatus::Running;
    sim_.state().trap = TrapReason::None;

    ExecResult result;
    for (std::size_t i = 0; i < words.size() && sim_.state().status == RunStatus::Running; ++i)
        sim_.step();
    result.regs = sim_.state().x;
    if (sim_.state().status == RunStatus::Trapped) {
        result.trapped = true;
        result.reason = sim_.state().trap;
    }

    u64 cycles_now = sim_.state().cycles;
    sim_.state() = saved;
    sim_.state().cycles = cycles_now;
    return result;
}

DivergenceReport ProbeSession::replay_diagnose(const GoldenTrace& golden, u64 region_lo,
                                               u64 region_hi, u64 max_steps) {
    require_halted("replay_diagnose");
    if (golden.start_pc < region_lo || golden.start_pc >= region_hi)
        throw ProbeError("golden trace starts outside the replay region");

    sim_.state().x = golden.regs0;
    set_pc(golden.start_pc);

    DivergenceReport report;
    for (std::size_t i = 0; i < golden.entries.size() && i < max_steps; ++i) {
        if (sim_.state().status != RunStatus::Running)
            break;
        if (sim_.state().pc < region_lo || sim_.state().pc >= region_hi)
            break;
        StepRecord rec = sim_.step();
        report.trace.push_back(rec);
        if (!rec.effects_equal(golden.entries[i])) {
            report.diverged = true;
            report.first_divergent_pc = rec.pc;
            report.expected = golden.entries[i];
            report.observed = rec;
            // Capture the stream the core actually follows from here.
            for (u32 k = 0; k < 8 && sim_.state().status == RunStatus::Running; ++k)
                report.reconstruction.push_back(sim_.step());
            break;
        }
    }
    return report;
}

} // namespace socfault
