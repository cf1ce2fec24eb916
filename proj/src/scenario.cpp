#include "socfault/scenario.hpp"

#include "socfault/json_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace socfault {

namespace {

CacheConfig cache_from_json(const nlohmann::json& j, CacheConfig base) {
    if (j.contains("size_bytes"))
        base.size_bytes = static_cast<u32>(json_u64(j.at("size_bytes")));
    if (j.contains("ways"))
        base.ways = static_cast<u32>(json_u64(j.at("ways")));
    if (j.contains("latency_cycles"))
        base.latency_cycles = static_cast<u32>(json_u64(j.at("latency_cycles")));
    return base;
}

MacPolicy policy_from_name(const std::string& name) {
    if (name == "off")
        return MacPolicy::Off;
    if (name == "jit")
        return MacPolicy::JIT;
    if (name == "proactive")
        return MacPolicy::Proactive;
    throw std::invalid_argument("unknown mac policy '" + name + "'");
}

} // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scenario " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }

    Scenario sc;
    sc.name = j.value("name", std::filesystem::path(path).stem().string());
    std::filesystem::path prog = j.at("program").get<std::string>();
    if (prog.is_relative())
        prog = std::filesystem::path(path).parent_path() / prog;
    sc.program_path = prog.string();
    if (j.contains("expected_output"))
        sc.expected_output = json_u64(j.at("expected_output"));
    if (j.contains("cycle_limit"))
        sc.cycle_limit = json_u64(j.at("cycle_limit"));

    if (j.contains("memory")) {
        const auto& m = j.at("memory");
        if (m.contains("dram_bytes"))
            sc.sim.mem.dram_bytes = json_u64(m.at("dram_bytes"));
        if (m.contains("dram_latency"))
            sc.sim.mem.dram_latency = static_cast<u32>(json_u64(m.at("dram_latency")));
        if (m.contains("l1i"))
            sc.sim.mem.l1i = cache_from_json(m.at("l1i"), sc.sim.mem.l1i);
        if (m.contains("l1d"))
            sc.sim.mem.l1d = cache_from_json(m.at("l1d"), sc.sim.mem.l1d);
        if (m.contains("l2"))
            sc.sim.mem.l2 = cache_from_json(m.at("l2"), sc.sim.mem.l2);
    }
    if (j.contains("mmu")) {
        const auto& m = j.at("mmu");
        if (m.contains("enabled"))
            sc.sim.mmu.enabled = m.at("enabled").get<bool>();
        if (m.contains("table_base"))
            sc.sim.mmu.table_base = json_u64(m.at("table_base"));
        if (m.contains("page_bytes"))
            sc.sim.mmu.page_bytes = json_u64(m.at("page_bytes"));
        if (m.contains("utlb_entries"))
            sc.sim.mmu.utlb_entries = static_cast<u32>(json_u64(m.at("utlb_entries")));
        if (m.contains("l2tlb_entries"))
            sc.sim.mmu.l2tlb_entries = static_cast<u32>(json_u64(m.at("l2tlb_entries")));
    }
    if (j.contains("mac")) {
        const auto& m = j.at("mac");
        if (m.contains("policy"))
            sc.sim.mac.policy = policy_from_name(m.at("policy").get<std::string>());
        if (m.contains("key"))
            sc.sim.mac.key = json_u64(m.at("key"));
        if (m.contains("check_cost_cycles"))
            sc.sim.mac.check_cost_cycles = static_cast<u32>(json_u64(m.at("check_cost_cycles")));
    }
    if (j.contains("scratch_base"))
        sc.sim.scratch_base = json_u64(j.at("scratch_base"));
    if (j.contains("replay_pc"))
        sc.replay_pc = json_u64(j.at("replay_pc"));
    if (j.contains("fault") && !j.at("fault").is_null())
        sc.fault = j.at("fault").get<FaultSpec>();
    return sc;
}

std::string Outcome::to_string() const {
    switch (cls) {
    case OutcomeClass::CORRECT: return "CORRECT";
    case OutcomeClass::WRONG_OUTPUT: return "WRONG_OUTPUT";
    case OutcomeClass::TIMEOUT: return "TIMEOUT";
    case OutcomeClass::TRAP: return "TRAP";
    case OutcomeClass::DETECTED: {
        std::string s = "DETECTED(";
        s += alarm ? "ALARM" : (detection_level ? level_name(*detection_level) : "?");
        s += ")";
        return s;
    }
    }
    return "?";
}

Outcome classify(const RunResult& result, u64 expected_output) {
    Outcome out;
    if (result.mac_mismatches > 0 || result.mac_alarms > 0) {
        out.cls = OutcomeClass::DETECTED;
        out.detection_level = result.first_detection_level;
        out.alarm = result.mac_alarms > 0;
        return out;
    }
    switch (result.termination) {
    case Termination::Halted:
        out.cls = (!result.output_words.empty() && result.output_words[0] == expected_output)
                      ? OutcomeClass::CORRECT
                      : OutcomeClass::WRONG_OUTPUT;
        break;
    case Termination::CycleLimit: out.cls = OutcomeClass::TIMEOUT; break;
    case Termination::Trap: out.cls = OutcomeClass::TRAP; break;
    }
    return out;
}

std::string mutation_summary_of(const EventLog& log) {
    for (const auto& ev : log.events()) {
        if (const auto* m = std::get_if<MutationEvent>(&ev.body)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s@%llu loc=0x%llx", fault_model_name(m->model),
                          static_cast<unsigned long long>(ev.cycle),
                          static_cast<unsigned long long>(m->location));
            return buf;
        }
    }
    return "-";
}

std::unique_ptr<Simulator> make_simulator(const Scenario& scenario, bool armed) {
    ProgramImage image = assemble_file(scenario.program_path);
    auto sim = std::make_unique<Simulator>(scenario.sim);
    sim->load_image(image);
    if (armed && scenario.fault)
        sim->arm_fault(*scenario.fault);
    return sim;
}

namespace {

std::string hexdump(const std::vector<u8>& bytes, u64 base) {
    std::ostringstream out;
    char buf[32];
    for (std::size_t i = 0; i < bytes.size(); i += 16) {
        std::snprintf(buf, sizeof buf, "0x%08llx: ", static_cast<unsigned long long>(base + i));
        out << buf;
        for (std::size_t k = i; k < std::min(bytes.size(), i + 16); k += 4) {
            u32 w = 0;
            for (std::size_t b = 0; b < 4 && k + b < bytes.size(); ++b)
                w |= static_cast<u32>(bytes[k + b]) << (8 * b);
            std::snprintf(buf, sizeof buf, "%08x ", w);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

ForensicBundle make_forensics(const Scenario& scenario, Simulator& faulted,
                              const ProgramImage& image) {
    ForensicBundle bundle;

    u64 map_hi = std::min<u64>(faulted.mem().dram_size(), 0x100000);
    auto records = faulted.mmu().classify_mapping(0, map_hi, scenario.sim.mmu.page_bytes);
    bundle.mapping_report = Mmu::render_mapping_report(records);

    ProbeSession probe(faulted);
    probe.halt();
    bundle.probe_dump = hexdump(probe.read_mem(image.base, image.words.size() * 4), image.base);

    // Reference trace from an untouched twin of the same scenario.
    try {
        u64 replay_pc = scenario.replay_pc.value_or(image.entry);
        auto clean = make_simulator(scenario, false);
        GoldenTrace golden = record_golden_trace(*clean, replay_pc, 1 << 20);
        DivergenceReport report =
            probe.replay_diagnose(golden, image.base, image.end(), golden.entries.size());
        bundle.divergence = report.render();
    } catch (const std::exception& e) {
        bundle.divergence = std::string("replay unavailable: ") + e.what() + "\n";
    }
    return bundle;
}

} // namespace

OutcomeRecord run_scenario(const Scenario& scenario, bool with_forensics) {
    ProgramImage image = assemble_file(scenario.program_path);
    Simulator sim(scenario.sim);
    sim.load_image(image);
    if (scenario.fault)
        sim.arm_fault(*scenario.fault);

    OutcomeRecord rec;
    rec.result = sim.run(scenario.cycle_limit);
    rec.outcome = classify(rec.result, scenario.expected_output);
    rec.mutation_summary = mutation_summary_of(rec.result.event_log);

    if (with_forensics && rec.outcome.cls != OutcomeClass::CORRECT) {
        rec.forensics = make_forensics(scenario, sim, image);
        std::ostringstream mut;
        for (const auto& ev : rec.result.event_log.events()) {
            if (const auto* m = std::get_if<MutationEvent>(&ev.body)) {
                mut << "cycle " << ev.cycle << ": " << fault_model_name(m->model) << " at "
                    << hex(m->location) << " before=" << hex(m->before)
                    << " after=" << hex(m->after) << " (" << m->note << ")\n";
            }
        }
        rec.forensics->mutation_log = mut.str();
    }
    return rec;
}

} // namespace socfault
