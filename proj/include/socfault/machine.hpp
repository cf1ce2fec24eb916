#pragma once

#include "socfault/events.hpp"
#include "socfault/isa.hpp"

#include <optional>
#include <vector>

namespace socfault {

enum class RunStatus : u8 { Running, Halted, Trapped };

enum class TrapReason : u8 {
    None,
    UndefinedInstruction,
    TranslationFault,
    BusError,
    Misaligned,
    IntegrityAlarm,
};

const char* trap_reason_name(TrapReason r);

struct MachineState {
    std::array<u64, kNumRegs> x{};
    u64 pc = 0;
    u64 par = 0;
    u64 cycles = 0;
    RunStatus status = RunStatus::Running;
    TrapReason trap = TrapReason::None;
    std::optional<u64> trigger_cycle;
};

enum class Termination : u8 { Halted, CycleLimit, Trap };

const char* termination_name(Termination t);

struct RunResult {
    Termination termination = Termination::CycleLimit;
    std::vector<u64> output_words; // x0 at HALT, by convention
    u64 cycles = 0;
    EventLog event_log;
    TrapReason trap = TrapReason::None;
    u64 mutations = 0;

    // countermeasure activity during this run
    u64 mac_checks = 0;
    u64 mac_mismatches = 0;
    u64 mac_recoveries = 0;
    u64 mac_alarms = 0;
    u64 mac_cycles_added = 0;
    std::optional<Level> first_detection_level;

    u64 digest() const;
};

/// Architectural side effects of one step, for golden traces and replay.
struct StepRecord {
    u64 pc = 0;
    u32 word = 0;
    bool decoded = false;
    u64 next_pc = 0;
    u32 cycles_charged = 0;
    i8 reg_written = -1;
    u64 reg_value = 0;
    bool mem_written = false;
    u64 mem_addr = 0;
    u64 mem_value = 0;

    bool effects_equal(const StepRecord& o) const {
        return pc == o.pc && word == o.word && next_pc == o.next_pc &&
               reg_written == o.reg_written && (reg_written < 0 || reg_value == o.reg_value) &&
               mem_written == o.mem_written &&
               (!mem_written || (mem_addr == o.mem_addr && mem_value == o.mem_value));
    }
};

} // namespace socfault
