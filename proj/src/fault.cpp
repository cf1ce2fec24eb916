#include "socfault/fault.hpp"

#include "socfault/json_util.hpp"

#include <cstring>
#include <stdexcept>

namespace socfault {

namespace {

FaultModel model_from_name(const std::string& name) {
    if (name == "f_l1i_fill" || name == "F_L1I_FILL")
        return FaultModel::F_L1I_FILL;
    if (name == "f_mmu" || name == "F_MMU")
        return FaultModel::F_MMU;
    if (name == "f_l2_beat" || name == "F_L2_BEAT")
        return FaultModel::F_L2_BEAT;
    throw std::invalid_argument("unknown fault model '" + name + "'");
}

} // namespace

void to_json(nlohmann::json& j, const FaultSpec& spec) {
    j = nlohmann::json{{"model", fault_model_name(spec.model)},
                       {"window", {spec.window_start, spec.window_end}},
                       {"jitter_sigma", spec.jitter_sigma},
                       {"success_ratio", spec.success_ratio},
                       {"seed", spec.seed},
                       {"min_offset", spec.min_offset}};
    switch (spec.model) {
    case FaultModel::F_L1I_FILL:
        j["params"] = {{"target_paddr_word", spec.l1i.target_paddr_word},
                       {"xor_mask", spec.l1i.xor_mask}};
        break;
    case FaultModel::F_MMU:
        j["params"] = {{"table_shift_bytes", spec.mmu.table_shift_bytes},
                       {"zero_range", {spec.mmu.zero_lo, spec.mmu.zero_hi}},
                       {"shift_delta", spec.mmu.shift_delta},
                       {"pte_corrupt_mask", spec.mmu.pte_corrupt_mask}};
        break;
    case FaultModel::F_L2_BEAT:
        j["params"] = {{"beat_paddr_range", {spec.l2.range_lo, spec.l2.range_hi}},
                       {"beat_delta", spec.l2.beat_delta},
                       {"variant", spec.l2.variant == FL2Params::Variant::F2 ? "F2" : "F1"},
                       {"path",
                        spec.l2.path == FL2Params::Path::L1dToL2 ? "l1d_to_l2" : "dram_to_l2"}};
        break;
    }
}

void from_json(const nlohmann::json& j, FaultSpec& spec) {
    spec = FaultSpec{};
    spec.model = model_from_name(j.at("model").get<std::string>());
    const auto& w = j.at("window");
    spec.window_start = json_i64(w.at(0));
    spec.window_end = json_i64(w.at(1));
    if (j.contains("jitter_sigma"))
        spec.jitter_sigma = static_cast<u32>(json_u64(j.at("jitter_sigma")));
    if (j.contains("success_ratio"))
        spec.success_ratio = j.at("success_ratio").get<double>();
    if (j.contains("seed"))
        spec.seed = json_u64(j.at("seed"));
    if (j.contains("min_offset"))
        spec.min_offset = json_i64(j.at("min_offset"));

    const auto& p = j.at("params");
    switch (spec.model) {
    case FaultModel::F_L1I_FILL:
        spec.l1i.target_paddr_word = json_u64(p.at("target_paddr_word"));
        spec.l1i.xor_mask = static_cast<u32>(json_u64(p.at("xor_mask")));
        break;
    case FaultModel::F_MMU:
        spec.mmu.table_shift_bytes = json_u64(p.at("table_shift_bytes"));
        spec.mmu.zero_lo = json_u64(p.at("zero_range").at(0));
        spec.mmu.zero_hi = json_u64(p.at("zero_range").at(1));
        if (p.contains("shift_delta"))
            spec.mmu.shift_delta = json_u64(p.at("shift_delta"));
        if (p.contains("pte_corrupt_mask"))
            spec.mmu.pte_corrupt_mask = json_u64(p.at("pte_corrupt_mask"));
        break;
    case FaultModel::F_L2_BEAT:
        spec.l2.range_lo = json_u64(p.at("beat_paddr_range").at(0));
        spec.l2.range_hi = json_u64(p.at("beat_paddr_range").at(1));
        spec.l2.beat_delta = json_i64(p.at("beat_delta"));
        if (p.contains("variant"))
            spec.l2.variant = p.at("variant").get<std::string>() == "F2"
                                  ? FL2Params::Variant::F2
                                  : FL2Params::Variant::F1;
        if (p.contains("path"))
            spec.l2.path = p.at("path").get<std::string>() == "l1d_to_l2"
                               ? FL2Params::Path::L1dToL2
                               : FL2Params::Path::DramToL2;
        break;
    }
}

void FaultEngine::arm(const FaultSpec& spec) {
    if (armed_)
        throw std::logic_error("a fault spec is already armed (one shot per run)");
    if (spec.window_start > spec.window_end)
        throw std::invalid_argument("fault window start > end");
    if (spec.success_ratio < 0.0 || spec.success_ratio > 1.0)
        throw std::invalid_argument("success_ratio outside [0,1]");
    if (spec.model == FaultModel::F_L2_BEAT && spec.l2.beat_delta % kBeatBytes != 0)
        throw std::invalid_argument("beat_delta must be a multiple of 16");
    if (spec.model == FaultModel::F_MMU && mmu_) {
        const u64 page = mmu_->config().page_bytes;
        FaultSpec fixed = spec;
        if (fixed.mmu.table_shift_bytes == 0 && fixed.mmu.shift_delta != 0)
            fixed.mmu.table_shift_bytes = fixed.mmu.shift_delta / page * 8;
        if (fixed.mmu.shift_delta != 0 &&
            fixed.mmu.table_shift_bytes / 8 * page != fixed.mmu.shift_delta)
            throw std::invalid_argument("table_shift_bytes and shift_delta disagree");
        armed_ = fixed;
    } else {
        armed_ = spec;
    }

    SplitMix64 rng(armed_->seed);
    i64 jitter = 0;
    if (armed_->jitter_sigma > 0) {
        u64 span = 4ull * armed_->jitter_sigma + 1;
        jitter = static_cast<i64>(rng.next_below(span)) - 2 * armed_->jitter_sigma;
    } else {
        rng.next();
    }
    success_ = rng.next_unit() < armed_->success_ratio;
    eff_start_ = std::max(armed_->window_start + jitter, armed_->min_offset);
    eff_end_ = armed_->window_end + jitter;
    fired_ = false;
}

void FaultEngine::disarm() {
    armed_.reset();
    fired_ = false;
    success_ = false;
}

bool FaultEngine::may_fire(u64 cycle) const {
    if (!armed_ || fired_ || !success_ || suppressed_ || !trigger_cycle_)
        return false;
    i64 rel = static_cast<i64>(cycle) - static_cast<i64>(*trigger_cycle_);
    return rel >= eff_start_ && rel <= eff_end_;
}

void FaultEngine::record_mutation(u64 cycle, u64 location, u64 before, u64 after,
                                  const std::string& note) {
    if (log_)
        log_->push(cycle, MutationEvent{armed_->model, location, before, after, note});
}

void FaultEngine::apply_mmu_corruption(u64 cycle) {
    const FMmuParams& p = armed_->mmu;
    u64 old_base = mmu_->walk_base();
    u64 new_base = old_base + p.table_shift_bytes;
    mmu_->set_walk_base(new_base);
    mmu_->set_sw_invalidate_effective(false);

    const u64 page = mmu_->config().page_bytes;
    if (p.zero_hi != 0) {
        for (u64 v = p.zero_lo; v <= p.zero_hi; v += page) {
            u64 pte_addr = new_base + (v / page) * 8;
            if (pte_addr + 8 > mem_->dram_size())
                continue;
            u64 before = mem_->read_dram_u64(pte_addr);
            mem_->corrupt_word_everywhere(pte_addr, before & p.pte_corrupt_mask);
        }
    }
    record_mutation(cycle, new_base, old_base, new_base,
                    "walk base shifted, PTE output frames zeroed, TLBI degraded");
    fired_ = true;
}

void FaultEngine::on_beat(BeatTransfer& beat) {
    if (!may_fire(beat.cycle))
        return;
    switch (armed_->model) {
    case FaultModel::F_L1I_FILL: {
        const FL1iParams& p = armed_->l1i;
        if (beat.dst != Level::L1I || beat.direction != BeatTransfer::Dir::Fill)
            return;
        if (p.target_paddr_word < beat.beat_paddr ||
            p.target_paddr_word + 4 > beat.beat_paddr + kBeatBytes)
            return;
        u64 off = p.target_paddr_word - beat.beat_paddr;
        u32 before = 0;
        std::memcpy(&before, beat.applied_data.data() + off, 4);
        u32 after = before ^ p.xor_mask;
        std::memcpy(beat.applied_data.data() + off, &after, 4);
        fired_ = true;
        record_mutation(beat.cycle, p.target_paddr_word, before, after,
                        "instruction word corrupted during L1I fill");
        break;
    }
    case FaultModel::F_L2_BEAT: {
        const FL2Params& p = armed_->l2;
        if (beat.dst != Level::L2)
            return;
        bool path_ok = p.path == FL2Params::Path::DramToL2
                           ? (beat.direction == BeatTransfer::Dir::Fill && beat.src == Level::DRAM)
                           : (beat.direction == BeatTransfer::Dir::Evict && beat.src == Level::L1D);
        if (!path_ok)
            return;
        if (beat.beat_paddr < p.range_lo || beat.beat_paddr > p.range_hi)
            return;
        u64 target = beat.beat_paddr + static_cast<u64>(p.beat_delta);
        beat.applied_paddr = target;
        fired_ = true;
        record_mutation(beat.cycle, beat.beat_paddr, beat.beat_paddr, target,
                        "L2 beat landed at a shifted address");
        if (p.variant == FL2Params::Variant::F2)
            mem_->force_stale_l1d_line(target & ~static_cast<u64>(kLineBytes - 1));
        break;
    }
    case FaultModel::F_MMU: apply_mmu_corruption(beat.cycle); break;
    }
}

void FaultEngine::on_walk(const WalkEvent& ev, u64 cycle) {
    (void)ev;
    if (!may_fire(cycle))
        return;
    if (armed_->model == FaultModel::F_MMU)
        apply_mmu_corruption(cycle);
}

} // namespace socfault
