#pragma once

#include "socfault/scenario.hpp"

#include <string>
#include <vector>

namespace socfault {

struct CampaignRow {
    i64 delay = 0;
    u32 trial = 0;
    u64 seed = 0;
    Outcome outcome;
    std::string mutation;
};

struct CampaignTable {
    i64 delay_start = 0;
    i64 delay_end = 0;
    i64 step = 1;
    u32 trials = 1;
    std::vector<CampaignRow> rows; // (delay, trial) order

    std::string to_csv() const;
    static CampaignTable from_csv(const std::string& text);
};

struct SweepOptions {
    i64 delay_start = 0;
    i64 delay_end = 0;
    i64 step = 1;
    u32 trials = 27;
    u64 seed_base = 1;
    u32 jobs = 1;
};

/// Runs delays x trials cells; each cell gets the scenario's fault window
/// shifted by the delay and a fresh per-cell seed. Rows come back in
/// (delay, trial) order regardless of how many workers ran them.
CampaignTable sweep(const Scenario& scenario, const SweepOptions& opts);

u64 cell_seed(u64 seed_base, i64 delay, u32 trial);

struct HeatmapOutput {
    std::string text;
    std::string svg;
};

/// Delay on X; per-class counts and a non-CORRECT intensity glyph per cell.
HeatmapOutput render_heatmap(const CampaignTable& table);

} // namespace socfault
