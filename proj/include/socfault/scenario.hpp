#pragma once

#include "socfault/probe.hpp"
#include "socfault/simulator.hpp"

#include <optional>
#include <string>

namespace socfault {

struct Scenario {
    std::string name;
    std::string program_path; // resolved relative to the scenario file
    u64 expected_output = 0;
    u64 cycle_limit = 100000;
    SimConfig sim;
    std::optional<FaultSpec> fault;
    /// Where forensic replay re-enters the program; defaults to the image
    /// entry. Programs that invalidate caches in their preamble point this
    /// past the invalidation so replay does not heal sticky faults.
    std::optional<u64> replay_pc;
};

Scenario load_scenario(const std::string& path);

enum class OutcomeClass : u8 { CORRECT, WRONG_OUTPUT, TIMEOUT, TRAP, DETECTED };

struct Outcome {
    OutcomeClass cls = OutcomeClass::CORRECT;
    std::optional<Level> detection_level;
    bool alarm = false;

    std::string to_string() const;
};

/// Total map from a run result to an outcome class; countermeasure activity
/// takes precedence over the termination code.
Outcome classify(const RunResult& result, u64 expected_output);

struct ForensicBundle {
    std::string mapping_report;
    std::string probe_dump;
    std::string divergence;
    std::string mutation_log;
};

struct OutcomeRecord {
    Outcome outcome;
    RunResult result;
    std::string mutation_summary;
    std::optional<ForensicBundle> forensics;
};

/// Assembles, runs and classifies; on a non-CORRECT outcome also produces
/// the forensic artifacts (mapping report, probe dump, divergence report).
OutcomeRecord run_scenario(const Scenario& scenario, bool with_forensics = true);

/// Builds a configured simulator with the scenario's program loaded and its
/// fault (if any) armed. The caller drives execution.
std::unique_ptr<Simulator> make_simulator(const Scenario& scenario, bool armed = true);

std::string mutation_summary_of(const EventLog& log);

} // namespace socfault
