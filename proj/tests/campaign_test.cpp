#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "socfault/campaign.hpp"

#include <filesystem>

using namespace socfault;

namespace {

std::string asset(const std::string& rel) {
    return (std::filesystem::path(SOCFAULT_ASSETS_DIR) / rel).string();
}

} // namespace

TEST_CASE("classification is total and matches the vocabulary") {
    RunResult halted;
    halted.termination = Termination::Halted;
    halted.output_words = {2500};
    CHECK(classify(halted, 2500).cls == OutcomeClass::CORRECT);
    halted.output_words = {2450};
    CHECK(classify(halted, 2500).cls == OutcomeClass::WRONG_OUTPUT);

    RunResult limit;
    limit.termination = Termination::CycleLimit;
    CHECK(classify(limit, 2500).cls == OutcomeClass::TIMEOUT);

    RunResult trap;
    trap.termination = Termination::Trap;
    trap.trap = TrapReason::TranslationFault;
    CHECK(classify(trap, 2500).cls == OutcomeClass::TRAP);

    RunResult detected;
    detected.termination = Termination::Halted;
    detected.output_words = {2500};
    detected.mac_mismatches = 1;
    detected.mac_recoveries = 1;
    detected.first_detection_level = Level::L2;
    auto out = classify(detected, 2500);
    CHECK(out.cls == OutcomeClass::DETECTED);
    CHECK(out.to_string() == "DETECTED(L2)");

    detected.mac_alarms = 1;
    CHECK(classify(detected, 2500).to_string() == "DETECTED(ALARM)");
}

TEST_CASE("scenario files load with resolved program paths") {
    Scenario sc = load_scenario(asset("scenarios/s1_l1i_sticky.json"));
    CHECK(sc.name == "s1-l1i-sticky");
    CHECK(std::filesystem::exists(sc.program_path));
    REQUIRE(sc.fault.has_value());
    CHECK(sc.fault->model == FaultModel::F_L1I_FILL);
    CHECK(sc.fault->l1i.target_paddr_word == 0x48a08);
    CHECK(sc.expected_output == 2500);
}

TEST_CASE("fault spec JSON round-trips") {
    Scenario sc = load_scenario(asset("scenarios/s3_l2_shift_f2.json"));
    REQUIRE(sc.fault.has_value());
    nlohmann::json j = *sc.fault;
    FaultSpec back = j.get<FaultSpec>();
    CHECK(back.model == sc.fault->model);
    CHECK(back.l2.range_lo == sc.fault->l2.range_lo);
    CHECK(back.l2.beat_delta == sc.fault->l2.beat_delta);
    CHECK(back.l2.variant == FL2Params::Variant::F2);
    CHECK(back.window_start == sc.fault->window_start);
}

TEST_CASE("sweep with success_ratio zero is all CORRECT") {
    Scenario sc = load_scenario(asset("scenarios/sweep_l1i.json"));
    sc.fault->success_ratio = 0.0;
    SweepOptions opts;
    opts.delay_start = 2300;
    opts.delay_end = 2330;
    opts.step = 10;
    opts.trials = 3;
    CampaignTable table = sweep(sc, opts);
    CHECK(table.rows.size() == 4 * 3);
    for (const auto& r : table.rows)
        CHECK(r.outcome.cls == OutcomeClass::CORRECT);
}

TEST_CASE("sweep rows are deterministic and ordered, even in parallel") {
    Scenario sc = load_scenario(asset("scenarios/sweep_l1i.json"));
    SweepOptions opts;
    opts.delay_start = 2310;
    opts.delay_end = 2340;
    opts.step = 5;
    opts.trials = 4;

    CampaignTable serial = sweep(sc, opts);
    std::string csv1 = serial.to_csv();
    CHECK(csv1 == sweep(sc, opts).to_csv());

    SweepOptions par = opts;
    par.jobs = 4;
    CHECK(sweep(sc, par).to_csv() == csv1);

    // rows in (delay, trial) order
    for (std::size_t i = 1; i < serial.rows.size(); ++i) {
        const auto& a = serial.rows[i - 1];
        const auto& b = serial.rows[i];
        CHECK((a.delay < b.delay || (a.delay == b.delay && a.trial < b.trial)));
    }
}

TEST_CASE("sweep hits land only around the fill; CSV round-trips") {
    Scenario sc = load_scenario(asset("scenarios/sweep_l1i.json"));
    SweepOptions opts;
    opts.delay_start = 2290;
    opts.delay_end = 2330;
    opts.step = 10;
    opts.trials = 2;
    CampaignTable table = sweep(sc, opts);

    bool any_fault = false;
    for (const auto& r : table.rows) {
        if (r.outcome.cls != OutcomeClass::CORRECT) {
            any_fault = true;
            CHECK(r.mutation != "-");
        }
    }
    CHECK(any_fault);

    CampaignTable parsed = CampaignTable::from_csv(table.to_csv());
    REQUIRE(parsed.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(parsed.rows[i].delay == table.rows[i].delay);
        CHECK(parsed.rows[i].trial == table.rows[i].trial);
        CHECK(parsed.rows[i].seed == table.rows[i].seed);
        CHECK(parsed.rows[i].outcome.cls == table.rows[i].outcome.cls);
    }
}

TEST_CASE("cell seeds are stable and distinct") {
    CHECK(cell_seed(1, 2300, 0) == cell_seed(1, 2300, 0));
    CHECK(cell_seed(1, 2300, 0) != cell_seed(1, 2300, 1));
    CHECK(cell_seed(1, 2300, 0) != cell_seed(1, 2310, 0));
    CHECK(cell_seed(1, 2300, 0) != cell_seed(2, 2300, 0));
}

TEST_CASE("heatmap renders counts, intensity and stable SVG") {
    CampaignTable table;
    table.trials = 4;
    for (i64 d : {100, 110, 120}) {
        for (u32 t = 0; t < 4; ++t) {
            CampaignRow row;
            row.delay = d;
            row.trial = t;
            row.seed = 1;
            row.outcome.cls =
                (d == 110 && t < 2) ? OutcomeClass::WRONG_OUTPUT : OutcomeClass::CORRECT;
            row.mutation = "-";
            table.rows.push_back(row);
        }
    }
    HeatmapOutput out = render_heatmap(table);
    CHECK(out.text.find("WRONG_OUTPUT") != std::string::npos);
    CHECK(out.text.find("delay") != std::string::npos);
    // intensity 0.5 at delay 110 -> glyph '=', others minimum ' '
    auto intensity_line = out.text.substr(out.text.rfind("intensity"));
    CHECK(intensity_line.find('=') != std::string::npos);
    CHECK(out.svg.find("<svg") != std::string::npos);
    CHECK(out.svg.find("delay=110") != std::string::npos);
    CHECK(render_heatmap(table).svg == out.svg);

    // all-CORRECT table: uniform minimum intensity
    for (auto& r : table.rows)
        r.outcome.cls = OutcomeClass::CORRECT;
    HeatmapOutput flat = render_heatmap(table);
    auto line = flat.text.substr(flat.text.rfind("intensity"));
    CHECK(line.find_first_of(".:-=+*#%@") == std::string::npos);
    CHECK(flat.svg.find("fill-opacity=\"0.150\"") != std::string::npos);
}

TEST_CASE("empty tables are rejected") {
    CampaignTable empty;
    CHECK_THROWS_AS(render_heatmap(empty), std::invalid_argument);
}
