#pragma once

#include "socfault/simulator.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace socfault {

class ProbeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reference trace of a fault-free run: initial registers plus the
/// architectural side effects of every step from start_pc.
struct GoldenTrace {
    u64 start_pc = 0;
    std::array<u64, kNumRegs> regs0{};
    std::vector<StepRecord> entries;
};

/// Runs `sim` until pc reaches start_pc, then records per-step effects
/// until the core stops or max_steps is hit.
GoldenTrace record_golden_trace(Simulator& sim, u64 start_pc, u64 max_steps);

struct DivergenceReport {
    bool diverged = false;
    u64 first_divergent_pc = 0;
    StepRecord expected;
    StepRecord observed;
    std::vector<StepRecord> trace;          // compared steps, in order
    std::vector<StepRecord> reconstruction; // observed stream after divergence

    bool empty() const { return !diverged; }
    std::string render() const;
};

struct ExecResult {
    std::array<u64, kNumRegs> regs{}; // register file right after execution
    bool trapped = false;
    TrapReason reason = TrapReason::None;
};

/// Halt/step/inspect interface over one simulation instance. All execution
/// driven through the probe runs with fault injection suppressed.
class ProbeSession {
public:
    explicit ProbeSession(Simulator& sim);
    ~ProbeSession();

    void halt();
    bool halted() const { return halted_; }

    /// Marks the core runnable and executes until HALT/trap/limit.
    RunResult resume(u64 cycle_limit);

    std::vector<StepRecord> step_n(u64 n);

    u64 read_reg(u32 i) const;
    void write_reg(u32 i, u64 v);
    void set_pc(u64 addr);
    u64 pc() const { return sim_.state().pc; }

    /// Data-viewpoint memory: translate, then L1D over L2 over DRAM.
    std::vector<u8> read_mem(u64 vaddr, u64 len) const;

    /// Writes instruction words to the scratch region through the data path,
    /// makes them fetchable, runs them with preset registers, and restores
    /// the machine state. Register indices in `inputs` are preloaded.
    ExecResult exec_at(const std::vector<u32>& words,
                       const std::vector<std::pair<u32, u64>>& inputs);

    DivergenceReport replay_diagnose(const GoldenTrace& golden, u64 region_lo, u64 region_hi,
                                     u64 max_steps = 1 << 20);

    Simulator& sim() { return sim_; }

private:
    void require_halted(const char* what) const;

    Simulator& sim_;
    bool halted_ = false;
};

} // namespace socfault
