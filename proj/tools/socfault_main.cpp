#include "socfault/campaign.hpp"
#include "socfault/repl.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace socfault;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << content;
}

MacPolicy parse_policy(const std::string& name) {
    if (name == "off")
        return MacPolicy::Off;
    if (name == "jit")
        return MacPolicy::JIT;
    if (name == "proactive")
        return MacPolicy::Proactive;
    throw CLI::ValidationError("--mac must be off, jit or proactive");
}

int cmd_asm(const std::string& input, std::string output) {
    ProgramImage image = assemble_file(input);
    if (output.empty())
        output = std::filesystem::path(input).replace_extension(".bin").string();
    save_image(image, output);
    std::cout << "assembled " << image.words.size() << " words, base " << hex(image.base)
              << ", entry " << hex(image.entry) << " -> " << output << "\n";
    return 0;
}

int cmd_run(const std::string& scenario_path, const std::string& mac_override,
            const std::string& artifacts_dir) {
    Scenario sc = load_scenario(scenario_path);
    if (!mac_override.empty())
        sc.sim.mac.policy = parse_policy(mac_override);

    OutcomeRecord rec = run_scenario(sc);
    std::cout << sc.name << ": " << rec.outcome.to_string() << "  ("
              << termination_name(rec.result.termination);
    if (!rec.result.output_words.empty())
        std::cout << ", output " << rec.result.output_words[0];
    std::cout << ", " << rec.result.cycles << " cycles)\n";
    if (rec.mutation_summary != "-")
        std::cout << "mutation: " << rec.mutation_summary << "\n";
    if (rec.result.mac_checks > 0) {
        std::cout << "mac: checks=" << rec.result.mac_checks
                  << " mismatches=" << rec.result.mac_mismatches
                  << " recoveries=" << rec.result.mac_recoveries
                  << " alarms=" << rec.result.mac_alarms << "\n";
    }

    if (rec.forensics) {
        std::string dir = artifacts_dir.empty() ? sc.name + "_forensics" : artifacts_dir;
        std::filesystem::create_directories(dir);
        write_file(dir + "/mapping.txt", rec.forensics->mapping_report);
        write_file(dir + "/probe_dump.txt", rec.forensics->probe_dump);
        write_file(dir + "/divergence.txt", rec.forensics->divergence);
        write_file(dir + "/mutations.txt", rec.forensics->mutation_log);
        std::cout << "forensic artifacts written to " << dir << "/\n";
    }
    return rec.outcome.cls == OutcomeClass::CORRECT ? 0 : 2;
}

int cmd_sweep(const std::string& scenario_path, const SweepOptions& opts,
              const std::string& mac_override, const std::string& out_path) {
    Scenario sc = load_scenario(scenario_path);
    if (!mac_override.empty())
        sc.sim.mac.policy = parse_policy(mac_override);
    CampaignTable table = sweep(sc, opts);
    std::string csv = table.to_csv();
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
        std::size_t faulty = 0;
        for (const auto& r : table.rows)
            if (r.outcome.cls != OutcomeClass::CORRECT)
                faulty++;
        std::cout << table.rows.size() << " runs, " << faulty << " non-CORRECT -> " << out_path
                  << "\n";
    }
    return 0;
}

int cmd_heatmap(const std::string& csv_path, const std::string& svg_path,
                const std::string& text_path) {
    std::ifstream in(csv_path);
    if (!in)
        throw std::runtime_error("cannot open " + csv_path);
    std::stringstream ss;
    ss << in.rdbuf();
    CampaignTable table = CampaignTable::from_csv(ss.str());
    HeatmapOutput out = render_heatmap(table);
    std::cout << out.text;
    if (!svg_path.empty()) {
        write_file(svg_path, out.svg);
        std::cout << "svg written to " << svg_path << "\n";
    }
    if (!text_path.empty())
        write_file(text_path, out.text);
    return 0;
}

int cmd_debug(const std::string& scenario_path, const std::string& script_path, bool pre_run) {
    Scenario sc = load_scenario(scenario_path);
    auto sim = make_simulator(sc);
    if (pre_run) {
        RunResult res = sim->run(sc.cycle_limit);
        std::cout << "scenario ran to " << termination_name(res.termination) << " at cycle "
                  << res.cycles << "\n";
    }
    if (script_path.empty()) {
        run_repl(*sim, std::cin, std::cout);
    } else {
        std::ifstream script(script_path);
        if (!script)
            throw std::runtime_error("cannot open " + script_path);
        run_repl(*sim, script, std::cout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"socfault - micro-architectural EM fault-injection sandbox"};
    app.require_subcommand(1);

    std::string input, output, mac_override, artifacts;
    std::string script;
    bool pre_run = false;
    SweepOptions opts;

    auto* cmd_asm_p = app.add_subcommand("asm", "assemble a program");
    cmd_asm_p->add_option("file", input, "source file (.s)")->required();
    cmd_asm_p->add_option("-o,--out", output, "output binary path");

    auto* cmd_run_p = app.add_subcommand("run", "run one scenario");
    cmd_run_p->add_option("scenario", input, "scenario JSON")->required();
    cmd_run_p->add_option("--mac", mac_override, "override MAC policy (off|jit|proactive)");
    cmd_run_p->add_option("--artifacts", artifacts, "forensic artifact directory");

    auto* cmd_sweep_p = app.add_subcommand("sweep", "delay sweep campaign");
    cmd_sweep_p->add_option("scenario", input, "scenario JSON")->required();
    cmd_sweep_p->add_option("--delay-start", opts.delay_start)->required();
    cmd_sweep_p->add_option("--delay-end", opts.delay_end)->required();
    cmd_sweep_p->add_option("--step", opts.step)->default_val(1);
    cmd_sweep_p->add_option("--trials", opts.trials)->default_val(27);
    cmd_sweep_p->add_option("--seed-base", opts.seed_base)->default_val(1);
    cmd_sweep_p->add_option("--jobs", opts.jobs)->default_val(1);
    cmd_sweep_p->add_option("--mac", mac_override, "override MAC policy");
    cmd_sweep_p->add_option("--out", output, "CSV output path");

    auto* cmd_heat_p = app.add_subcommand("heatmap", "render a sweep CSV");
    cmd_heat_p->add_option("csv", input, "campaign CSV")->required();
    cmd_heat_p->add_option("--out", output, "SVG output path");
    cmd_heat_p->add_option("--text", artifacts, "also write the text grid here");

    auto* cmd_debug_p = app.add_subcommand("debug", "interactive forensic probe");
    cmd_debug_p->add_option("scenario", input, "scenario JSON")->required();
    cmd_debug_p->add_option("--script", script, "command script (instead of stdin)");
    cmd_debug_p->add_flag("--run", pre_run, "run the scenario before attaching");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_asm_p->parsed())
            return cmd_asm(input, output);
        if (cmd_run_p->parsed())
            return cmd_run(input, mac_override, artifacts);
        if (cmd_sweep_p->parsed())
            return cmd_sweep(input, opts, mac_override, output);
        if (cmd_heat_p->parsed())
            return cmd_heatmap(input, output, artifacts);
        if (cmd_debug_p->parsed())
            return cmd_debug(input, script, pre_run);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
