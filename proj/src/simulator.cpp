#include "socfault/simulator.hpp"

#include <cstring>
#include <stdexcept>

namespace socfault {

const char* trap_reason_name(TrapReason r) {
    switch (r) {
    case TrapReason::None: return "none";
    case TrapReason::UndefinedInstruction: return "undefined-instruction";
    case TrapReason::TranslationFault: return "translation-fault";
    case TrapReason::BusError: return "bus-error";
    case TrapReason::Misaligned: return "misaligned";
    case TrapReason::IntegrityAlarm: return "integrity-alarm";
    }
    return "?";
}

const char* termination_name(Termination t) {
    switch (t) {
    case Termination::Halted: return "halted";
    case Termination::CycleLimit: return "cycle-limit";
    case Termination::Trap: return "trap";
    }
    return "?";
}

u64 RunResult::digest() const {
    Fnv1a h;
    h.add_u8(static_cast<u8>(termination));
    h.add_u8(static_cast<u8>(trap));
    for (u64 w : output_words)
        h.add_u64(w);
    h.add_u64(cycles);
    h.add_u64(event_log.digest());
    return h.value();
}

Simulator::Simulator(const SimConfig& cfg)
    : cfg_(cfg), mem_(cfg.mem), mmu_(cfg.mmu, mem_), mac_(cfg.mac, mem_) {
    mem_.set_interceptor(&fault_);
    mem_.set_mac(mac_.enabled() ? &mac_ : nullptr);
    mem_.set_log(&log_);
    mmu_.set_log(&log_);
    mmu_.set_walk_interceptor(&fault_);
    fault_.attach(&mem_, &mmu_, &log_);
}

void Simulator::load_image(const ProgramImage& image) {
    image_ = image;
    std::vector<u8> bytes(image.words.size() * 4);
    for (std::size_t i = 0; i < image.words.size(); ++i) {
        u32 w = image.words[i];
        bytes[i * 4] = static_cast<u8>(w);
        bytes[i * 4 + 1] = static_cast<u8>(w >> 8);
        bytes[i * 4 + 2] = static_cast<u8>(w >> 16);
        bytes[i * 4 + 3] = static_cast<u8>(w >> 24);
    }
    if (!bytes.empty())
        mem_.load_bytes(image.base, bytes.data(), bytes.size());
    mmu_.build_identity_map();
    mac_.generate_all_dram();
    state_ = MachineState{};
    state_.pc = image.entry;
}

void Simulator::trap(TrapReason reason) {
    state_.status = RunStatus::Trapped;
    state_.trap = reason;
    log_.push(state_.cycles, TrapEventRec{static_cast<u8>(reason), state_.pc});
}

StepRecord Simulator::step() {
    if (state_.status != RunStatus::Running)
        throw std::logic_error("step() on a core that is not running");

    StepRecord rec;
    rec.pc = state_.pc;
    const u64 t0 = state_.cycles;
    u32 charged = 1;

    auto finish = [&](u32 extra) {
        charged += extra;
        charged += static_cast<u32>(mac_.take_pending_cycles());
        state_.cycles = t0 + charged;
        rec.next_pc = state_.pc;
        rec.cycles_charged = charged;
        log_.push(t0, StepEvent{rec.pc, rec.word, charged});
        if (mac_.alarm_pending())
            trap(TrapReason::IntegrityAlarm);
        return rec;
    };

    // Instruction fetch.
    TranslationResult itr = mmu_.translate(state_.pc, AccessKind::IFetch, t0);
    charged += itr.latency;
    if (!itr.ok()) {
        trap(TrapReason::TranslationFault);
        return finish(0);
    }
    AccessResult fetch = mem_.access(AccessKind::IFetch, itr.paddr, 4, t0);
    charged += fetch.latency;
    if (fetch.bus_error) {
        trap(TrapReason::BusError);
        return finish(0);
    }
    if (mac_.config().policy == MacPolicy::JIT) {
        VerifyOutcome v = mac_.verify_consumption(Level::L1I, itr.paddr, 4);
        if (v.status == VerifyOutcome::Status::Recovered)
            fetch = mem_.access(AccessKind::IFetch, itr.paddr, 4, t0);
    }
    rec.word = static_cast<u32>(fetch.data);

    auto decoded = decode(rec.word);
    if (!decoded) {
        trap(TrapReason::UndefinedInstruction);
        return finish(0);
    }
    rec.decoded = true;
    const DecodedInstruction& ins = *decoded;

    u32 extra = 0;
    u64 next_pc = state_.pc + 4;

    auto write_reg = [&](u8 idx, u64 value) {
        state_.x[idx] = value;
        rec.reg_written = static_cast<i8>(idx);
        rec.reg_value = value;
    };
    auto data_translate = [&](u64 vaddr, AccessKind kind) -> std::optional<u64> {
        TranslationResult tr = mmu_.translate(vaddr, kind, t0);
        extra += tr.latency;
        if (!tr.ok()) {
            trap(TrapReason::TranslationFault);
            return std::nullopt;
        }
        return tr.paddr;
    };

    switch (ins.opcode) {
    case Opcode::NOP: break;
    case Opcode::HALT:
        state_.status = RunStatus::Halted;
        next_pc = state_.pc;
        break;
    case Opcode::TRIG:
        state_.trigger_cycle = t0;
        fault_.set_trigger(t0);
        break;
    case Opcode::WAIT: extra += static_cast<u32>(ins.imm); break;
    case Opcode::MOVI: write_reg(ins.rd, static_cast<u64>(static_cast<u32>(ins.imm))); break;
    case Opcode::ADDI: write_reg(ins.rd, state_.x[ins.rn] + static_cast<u64>(ins.imm)); break;
    case Opcode::SUBI: write_reg(ins.rd, state_.x[ins.rn] - static_cast<u64>(ins.imm)); break;
    case Opcode::ADD: write_reg(ins.rd, state_.x[ins.rn] + state_.x[ins.rm]); break;
    case Opcode::LDR: {
        u64 vaddr = state_.x[ins.rn] + static_cast<u64>(ins.imm);
        if (vaddr % 4 != 0) {
            trap(TrapReason::Misaligned);
            break;
        }
        auto paddr = data_translate(vaddr, AccessKind::Load);
        if (!paddr)
            break;
        AccessResult res = mem_.access(AccessKind::Load, *paddr, 8, t0);
        extra += res.latency;
        if (res.bus_error) {
            trap(TrapReason::BusError);
            break;
        }
        if (mac_.config().policy == MacPolicy::JIT) {
            VerifyOutcome v = mac_.verify_consumption(Level::L1D, *paddr, 8);
            if (v.status == VerifyOutcome::Status::Recovered)
                res = mem_.access(AccessKind::Load, *paddr, 8, t0);
        }
        write_reg(ins.rd, res.data);
        break;
    }
    case Opcode::STR: {
        u64 vaddr = state_.x[ins.rn] + static_cast<u64>(ins.imm);
        if (vaddr % 4 != 0) {
            trap(TrapReason::Misaligned);
            break;
        }
        auto paddr = data_translate(vaddr, AccessKind::Store);
        if (!paddr)
            break;
        AccessResult res = mem_.access(AccessKind::Store, *paddr, 8, t0, state_.x[ins.rd]);
        extra += res.latency;
        if (res.bus_error) {
            trap(TrapReason::BusError);
            break;
        }
        rec.mem_written = true;
        rec.mem_addr = vaddr;
        rec.mem_value = state_.x[ins.rd];
        break;
    }
    case Opcode::B: next_pc = state_.pc + static_cast<i64>(ins.imm) * 4; break;
    case Opcode::CBNZ:
        if (state_.x[ins.rd] != 0)
            next_pc = state_.pc + static_cast<i64>(ins.imm) * 4;
        break;
    case Opcode::IC_IALLU: mem_.ic_iallu(); break;
    case Opcode::DC_CIVAC: {
        u64 vaddr = state_.x[ins.rn];
        auto paddr = data_translate(vaddr, AccessKind::Load);
        if (!paddr)
            break;
        mem_.dc_civac(*paddr);
        break;
    }
    case Opcode::TLBI_ALL: mmu_.tlbi_all(); break;
    case Opcode::AT: {
        u64 par = mmu_.at_query(state_.x[ins.rn]);
        state_.par = par;
        write_reg(ins.rd, par);
        break;
    }
    }

    if (state_.status == RunStatus::Running || state_.status == RunStatus::Halted)
        state_.pc = next_pc;
    return finish(extra);
}

RunResult Simulator::run(u64 cycle_limit) {
    log_.clear();
    mac_.begin_run();
    const MacMetrics before = mac_.metrics();
    const bool had_fired = fault_.fired();

    while (state_.status == RunStatus::Running && state_.cycles < cycle_limit)
        step();

    RunResult res;
    res.cycles = state_.cycles;
    res.trap = state_.trap;
    switch (state_.status) {
    case RunStatus::Halted:
        res.termination = Termination::Halted;
        res.output_words.push_back(state_.x[0]);
        break;
    case RunStatus::Trapped: res.termination = Termination::Trap; break;
    case RunStatus::Running: res.termination = Termination::CycleLimit; break;
    }
    res.mutations = (!had_fired && fault_.fired()) ? 1 : 0;

    const MacMetrics& after = mac_.metrics();
    res.mac_checks = after.checks - before.checks;
    res.mac_mismatches = after.mismatches - before.mismatches;
    res.mac_recoveries = after.recoveries - before.recoveries;
    res.mac_alarms = after.alarms - before.alarms;
    res.mac_cycles_added = after.cycles_added - before.cycles_added;
    if (mac_.first_nonok())
        res.first_detection_level = mac_.first_nonok()->recovered_from;

    res.event_log = std::move(log_);
    log_.clear();
    return res;
}

u64 Simulator::state_digest(bool include_l1i) const {
    Fnv1a h;
    for (u64 r : state_.x)
        h.add_u64(r);
    h.add_u64(state_.pc);
    h.add_u64(state_.par);
    h.add_u64(state_.cycles);
    h.add_u8(static_cast<u8>(state_.status));
    h.add_u64(mem_.state_digest(Level::DRAM));
    if (include_l1i)
        h.add_u64(mem_.state_digest(Level::L1I));
    h.add_u64(mem_.state_digest(Level::L1D));
    h.add_u64(mem_.state_digest(Level::L2));
    h.add_u64(mmu_.state_digest());
    h.add_u64(mac_.state_digest());
    return h.value();
}

} // namespace socfault
