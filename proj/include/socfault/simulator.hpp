#pragma once

#include "socfault/assembler.hpp"
#include "socfault/fault.hpp"
#include "socfault/integrity.hpp"
#include "socfault/machine.hpp"
#include "socfault/memory.hpp"
#include "socfault/mmu.hpp"

#include <memory>

namespace socfault {

struct SimConfig {
    MemConfig mem;
    MmuConfig mmu;
    MacConfig mac;
    u64 scratch_base = 0x4F000; // probe code-injection region
};

/// One isolated simulation instance: a single core, its memory hierarchy,
/// MMU, fault engine and countermeasure engine. Never shared across threads.
class Simulator {
public:
    explicit Simulator(const SimConfig& cfg = {});

    const SimConfig& config() const { return cfg_; }
    MachineState& state() { return state_; }
    const MachineState& state() const { return state_; }
    MemorySystem& mem() { return mem_; }
    const MemorySystem& mem() const { return mem_; }
    Mmu& mmu() { return mmu_; }
    const Mmu& mmu() const { return mmu_; }
    FaultEngine& fault() { return fault_; }
    MacEngine& mac() { return mac_; }
    EventLog& log() { return log_; }

    /// Copies the image into DRAM, (re)builds the identity map, resets the
    /// machine and, when a MAC policy is enabled, tags all of DRAM.
    void load_image(const ProgramImage& image);

    void arm_fault(const FaultSpec& spec) { fault_.arm(spec); }

    StepRecord step();

    /// Steps until HALT, a trap, or the cycle limit. Clears the event log at
    /// entry and moves it into the result.
    RunResult run(u64 cycle_limit);

    u64 state_digest(bool include_l1i = true) const;

private:
    u64 fetch_translate(u64 vaddr, AccessKind intent, u32& latency, bool& faulted);
    void trap(TrapReason reason);

    SimConfig cfg_;
    MachineState state_;
    MemorySystem mem_;
    Mmu mmu_;
    FaultEngine fault_;
    MacEngine mac_;
    EventLog log_;
    ProgramImage image_;
};

} // namespace socfault
