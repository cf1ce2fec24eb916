#include "socfault/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

namespace socfault {

u64 cell_seed(u64 seed_base, i64 delay, u32 trial) {
    u64 h = mix64(seed_base ^ mix64(static_cast<u64>(delay)));
    return mix64(h ^ trial);
}

std::string CampaignTable::to_csv() const {
    std::ostringstream out;
    out << "delay,trial,seed,outcome,mutation\n";
    for (const auto& r : rows) {
        out << r.delay << "," << r.trial << "," << r.seed << "," << r.outcome.to_string() << ","
            << r.mutation << "\n";
    }
    return out.str();
}

CampaignTable CampaignTable::from_csv(const std::string& text) {
    CampaignTable table;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    std::map<i64, u32> per_delay;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (header) {
            header = false;
            continue;
        }
        CampaignRow row;
        std::istringstream ls(line);
        std::string field;
        std::getline(ls, field, ',');
        row.delay = std::stoll(field);
        std::getline(ls, field, ',');
        row.trial = static_cast<u32>(std::stoul(field));
        std::getline(ls, field, ',');
        row.seed = std::stoull(field);
        std::getline(ls, field, ',');
        if (field == "CORRECT")
            row.outcome.cls = OutcomeClass::CORRECT;
        else if (field == "WRONG_OUTPUT")
            row.outcome.cls = OutcomeClass::WRONG_OUTPUT;
        else if (field == "TIMEOUT")
            row.outcome.cls = OutcomeClass::TIMEOUT;
        else if (field == "TRAP")
            row.outcome.cls = OutcomeClass::TRAP;
        else if (field.rfind("DETECTED", 0) == 0) {
            row.outcome.cls = OutcomeClass::DETECTED;
            row.outcome.alarm = field.find("ALARM") != std::string::npos;
        } else {
            throw std::runtime_error("bad outcome field '" + field + "'");
        }
        std::getline(ls, row.mutation);
        table.rows.push_back(row);
        per_delay[row.delay]++;
    }
    if (!table.rows.empty()) {
        table.delay_start = table.rows.front().delay;
        table.delay_end = table.rows.back().delay;
        table.trials = per_delay.begin()->second;
        if (per_delay.size() > 1) {
            auto it = per_delay.begin();
            auto second = std::next(it);
            table.step = second->first - it->first;
        }
    }
    return table;
}

CampaignTable sweep(const Scenario& scenario, const SweepOptions& opts) {
    if (!scenario.fault)
        throw std::invalid_argument("sweep needs a scenario with a fault spec");
    if (opts.trials == 0 || opts.step <= 0 || opts.delay_end < opts.delay_start)
        throw std::invalid_argument("bad sweep range");

    std::vector<i64> delays;
    for (i64 d = opts.delay_start; d <= opts.delay_end; d += opts.step)
        delays.push_back(d);

    CampaignTable table;
    table.delay_start = opts.delay_start;
    table.delay_end = opts.delay_end;
    table.step = opts.step;
    table.trials = opts.trials;
    table.rows.resize(delays.size() * opts.trials);

    auto run_cell = [&](std::size_t index) {
        i64 delay = delays[index / opts.trials];
        u32 trial = static_cast<u32>(index % opts.trials);
        Scenario cell = scenario;
        cell.fault->window_start += delay;
        cell.fault->window_end += delay;
        cell.fault->seed = cell_seed(opts.seed_base, delay, trial);
        OutcomeRecord rec = run_scenario(cell, false);
        CampaignRow& row = table.rows[index];
        row.delay = delay;
        row.trial = trial;
        row.seed = cell.fault->seed;
        row.outcome = rec.outcome;
        row.mutation = rec.mutation_summary;
    };

    const std::size_t n = table.rows.size();
    u32 jobs = std::max<u32>(1, opts.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            run_cell(i);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (u32 w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    run_cell(i);
            });
        }
        for (auto& t : workers)
            t.join();
    }
    return table;
}

namespace {

const char* class_color(OutcomeClass c) {
    switch (c) {
    case OutcomeClass::CORRECT: return "#d9d9d9";
    case OutcomeClass::WRONG_OUTPUT: return "#d62728";
    case OutcomeClass::TIMEOUT: return "#ff7f0e";
    case OutcomeClass::TRAP: return "#9467bd";
    case OutcomeClass::DETECTED: return "#2ca02c";
    }
    return "#000000";
}

char intensity_glyph(double v) {
    static const char glyphs[] = " .:-=+*#%@";
    int idx = static_cast<int>(v * 9.999);
    idx = std::clamp(idx, 0, 9);
    return glyphs[idx];
}

} // namespace

HeatmapOutput render_heatmap(const CampaignTable& table) {
    if (table.rows.empty())
        throw std::invalid_argument("empty campaign table");

    std::vector<i64> delays;
    std::map<i64, std::array<u32, 5>> counts; // per class
    for (const auto& r : table.rows) {
        if (!counts.count(r.delay)) {
            delays.push_back(r.delay);
            counts[r.delay] = {};
        }
        counts[r.delay][static_cast<u32>(r.outcome.cls)]++;
    }
    std::sort(delays.begin(), delays.end());

    static const char* kClassNames[5] = {"CORRECT", "WRONG_OUTPUT", "TIMEOUT", "TRAP", "DETECTED"};

    std::ostringstream text;
    char buf[64];
    text << "delay        ";
    for (i64 d : delays) {
        std::snprintf(buf, sizeof buf, "%7lld", static_cast<long long>(d));
        text << buf;
    }
    text << "\n";
    for (u32 c = 0; c < 5; ++c) {
        std::snprintf(buf, sizeof buf, "%-13s", kClassNames[c]);
        text << buf;
        for (i64 d : delays) {
            std::snprintf(buf, sizeof buf, "%7u", counts[d][c]);
            text << buf;
        }
        text << "\n";
    }
    text << "intensity    ";
    for (i64 d : delays) {
        const auto& cnt = counts[d];
        u32 total = cnt[0] + cnt[1] + cnt[2] + cnt[3] + cnt[4];
        double intensity = total ? static_cast<double>(total - cnt[0]) / total : 0.0;
        std::snprintf(buf, sizeof buf, "%6c ", intensity_glyph(intensity));
        text << buf;
    }
    text << "\n";

    const int cell = 14, height = 48, label_h = 16;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << delays.size() * cell + 2 << "\" height=\"" << height + label_h << "\">\n";
    for (std::size_t i = 0; i < delays.size(); ++i) {
        const auto& cnt = counts[delays[i]];
        u32 total = cnt[0] + cnt[1] + cnt[2] + cnt[3] + cnt[4];
        double intensity = total ? static_cast<double>(total - cnt[0]) / total : 0.0;
        u32 dominant = 0;
        u32 best = 0;
        for (u32 c = 1; c < 5; ++c) {
            if (cnt[c] > best) {
                best = cnt[c];
                dominant = c;
            }
        }
        const char* color = dominant == 0 ? class_color(OutcomeClass::CORRECT)
                                          : class_color(static_cast<OutcomeClass>(dominant));
        std::snprintf(buf, sizeof buf, "%.3f", dominant == 0 ? 0.15 : std::max(intensity, 0.15));
        svg << "  <rect x=\"" << i * cell << "\" y=\"0\" width=\"" << cell << "\" height=\""
            << height << "\" fill=\"" << color << "\" fill-opacity=\"" << buf << "\">"
            << "<title>delay=" << delays[i] << " correct=" << cnt[0] << " wrong=" << cnt[1]
            << " timeout=" << cnt[2] << " trap=" << cnt[3] << " detected=" << cnt[4]
            << "</title></rect>\n";
    }
    svg << "  <text x=\"0\" y=\"" << height + 12 << "\" font-size=\"10\" font-family=\"monospace\">"
        << "delay " << delays.front() << " .. " << delays.back() << "</text>\n";
    svg << "</svg>\n";

    return {text.str(), svg.str()};
}

} // namespace socfault
