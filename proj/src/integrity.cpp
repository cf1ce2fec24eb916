#include "socfault/integrity.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace socfault {

const char* mac_policy_name(MacPolicy p) {
    switch (p) {
    case MacPolicy::Off: return "off";
    case MacPolicy::JIT: return "jit";
    case MacPolicy::Proactive: return "proactive";
    }
    return "?";
}

u64 mac_tag(u64 key, u64 paddr, const u8 block[kBeatBytes]) {
    if (paddr % kBeatBytes != 0)
        throw std::invalid_argument("mac_tag: paddr not 16-byte aligned");
    u64 d0 = 0, d1 = 0;
    for (u32 i = 0; i < 8; ++i) {
        d0 |= static_cast<u64>(block[i]) << (8 * i);
        d1 |= static_cast<u64>(block[8 + i]) << (8 * i);
    }
    u64 s = key;
    s = mix64(s ^ paddr);
    s = mix64(s ^ d0);
    s = mix64(s ^ d1);
    return s;
}

MacEngine::MacEngine(const MacConfig& cfg, MemorySystem& mem) : cfg_(cfg), mem_(mem) {}

bool MacEngine::level_enabled(Level lv) const {
    switch (lv) {
    case Level::L1I:
    case Level::L1D: return cfg_.level_l1;
    case Level::L2: return cfg_.level_l2;
    case Level::DRAM: return cfg_.level_dram;
    }
    return false;
}

void MacEngine::generate_all_dram() {
    if (!enabled())
        return;
    const auto& dram = mem_.dram();
    dram_tags_.resize(dram.size() / kBeatBytes);
    for (u64 b = 0; b < dram_tags_.size(); ++b)
        dram_tags_[b] = mac_tag(cfg_.key, b * kBeatBytes, dram.data() + b * kBeatBytes);
    dram_generated_ = true;
}

void MacEngine::begin_run() {
    alarm_pending_ = false;
    first_nonok_.reset();
}

u64 MacEngine::take_pending_cycles() {
    u64 v = pending_cycles_;
    pending_cycles_ = 0;
    return v;
}

std::optional<u64> MacEngine::stored_tag(Level lv, u64 block_paddr) const {
    switch (lv) {
    case Level::L1I: {
        auto it = l1i_.find(block_paddr);
        return it == l1i_.end() ? std::nullopt : std::optional<u64>(it->second.tag);
    }
    case Level::L1D: {
        auto it = l1d_.find(block_paddr);
        return it == l1d_.end() ? std::nullopt : std::optional<u64>(it->second.tag);
    }
    case Level::L2: {
        auto it = l2_.find(block_paddr);
        return it == l2_.end() ? std::nullopt : std::optional<u64>(it->second);
    }
    case Level::DRAM: {
        u64 idx = block_paddr / kBeatBytes;
        if (!dram_generated_ || idx >= dram_tags_.size())
            return std::nullopt;
        return dram_tags_[idx];
    }
    }
    return std::nullopt;
}

void MacEngine::set_tag(Level lv, u64 block_paddr, std::optional<u64> tag) {
    switch (lv) {
    case Level::L1I:
        if (tag)
            l1i_[block_paddr] = {*tag, false};
        else
            l1i_.erase(block_paddr);
        break;
    case Level::L1D:
        if (tag)
            l1d_[block_paddr] = {*tag, false};
        else
            l1d_.erase(block_paddr);
        break;
    case Level::L2:
        if (tag)
            l2_[block_paddr] = *tag;
        else
            l2_.erase(block_paddr);
        break;
    case Level::DRAM:
        if (tag && dram_generated_)
            dram_tags_[block_paddr / kBeatBytes] = *tag;
        break;
    }
}

void MacEngine::charge(u32 checks) {
    metrics_.checks += checks;
    u64 cost = static_cast<u64>(checks) * cfg_.check_cost_cycles;
    metrics_.cycles_added += cost;
    pending_cycles_ += cost;
}

u32 MacEngine::check_block(Level lv, u64 block_paddr, bool& matched,
                           std::array<u8, kBeatBytes>* data_out) {
    matched = false;
    std::array<u8, kBeatBytes> data;
    if (!mem_.peek_block(lv, block_paddr, data.data()))
        return 0; // not resident at this level: no check possible
    charge(1);
    auto stored = stored_tag(lv, block_paddr);
    if (stored && *stored == mac_tag(cfg_.key, block_paddr, data.data())) {
        matched = true;
        if (data_out)
            *data_out = data;
    }
    return 1;
}

namespace {
Level next_deeper(Level lv) {
    switch (lv) {
    case Level::L1I:
    case Level::L1D: return Level::L2;
    case Level::L2: return Level::DRAM;
    default: return Level::DRAM;
    }
}
} // namespace

VerifyOutcome MacEngine::verify_consumption(Level l1_level, u64 paddr, u32 width) {
    VerifyOutcome out;
    if (cfg_.policy != MacPolicy::JIT)
        return out;

    u64 first = paddr & ~static_cast<u64>(kBeatBytes - 1);
    u64 last = (paddr + width - 1) & ~static_cast<u64>(kBeatBytes - 1);
    for (u64 block = first; block <= last; block += kBeatBytes) {
        auto& store = l1_level == Level::L1I ? l1i_ : l1d_;
        auto it = store.find(block);
        if (it != store.end() && it->second.verified)
            continue; // checked since it was last installed or written

        if (cfg_.level_l1) {
            bool ok = false;
            out.checks_performed += check_block(l1_level, block, ok, nullptr);
            if (ok) {
                store[block].verified = true;
                continue;
            }
            metrics_.mismatches++;
        }

        // Escalate: re-verify deeper copies and repair the delivery path.
        bool recovered = false;
        for (Level lv = next_deeper(l1_level);; lv = next_deeper(lv)) {
            if (level_enabled(lv)) {
                bool ok = false;
                std::array<u8, kBeatBytes> good;
                out.checks_performed += check_block(lv, block, ok, &good);
                if (ok) {
                    mem_.poke_block(l1_level, block, good.data());
                    store[block] = {*stored_tag(lv, block), true};
                    metrics_.recoveries++;
                    out.status = VerifyOutcome::Status::Recovered;
                    out.recovered_from = lv;
                    recovered = true;
                    break;
                }
            }
            if (lv == Level::DRAM)
                break;
        }
        if (!recovered) {
            metrics_.alarms++;
            out.status = VerifyOutcome::Status::Alarm;
            alarm_pending_ = true;
            break;
        }
    }
    out.cycles_added = static_cast<u64>(out.checks_performed) * cfg_.check_cost_cycles;
    if (out.status != VerifyOutcome::Status::Ok && !first_nonok_)
        first_nonok_ = out;
    return out;
}

void MacEngine::on_line_installed(Level dst, const FillTrace& trace) {
    if (!enabled())
        return;

    // Tag transport: the tag follows the beat to wherever it landed.
    for (const auto& b : trace.beats) {
        if (b.dropped)
            continue;
        set_tag(dst, b.applied_paddr, stored_tag(trace.src, b.intended_paddr));
    }

    if (cfg_.policy != MacPolicy::Proactive || !level_enabled(dst))
        return;

    for (const auto& b : trace.beats) {
        if (b.dropped)
            continue;
        u64 block = b.applied_paddr;
        bool ok = false;
        VerifyOutcome out;
        out.checks_performed += check_block(dst, block, ok, nullptr);
        if (ok)
            continue;
        metrics_.mismatches++;

        bool recovered = false;
        for (Level lv = trace.src;; lv = next_deeper(lv)) {
            if (level_enabled(lv) && lv != dst) {
                bool deep_ok = false;
                std::array<u8, kBeatBytes> good;
                out.checks_performed += check_block(lv, block, deep_ok, &good);
                if (deep_ok) {
                    mem_.poke_block(dst, block, good.data());
                    set_tag(dst, block, stored_tag(lv, block));
                    metrics_.recoveries++;
                    out.status = VerifyOutcome::Status::Recovered;
                    out.recovered_from = lv;
                    recovered = true;
                    break;
                }
            }
            if (lv == Level::DRAM)
                break;
        }
        if (!recovered) {
            metrics_.alarms++;
            out.status = VerifyOutcome::Status::Alarm;
            alarm_pending_ = true;
        }
        out.cycles_added = static_cast<u64>(out.checks_performed) * cfg_.check_cost_cycles;
        if (!first_nonok_)
            first_nonok_ = out;
    }
}

void MacEngine::on_line_invalidated(Level lv, u64 line_paddr) {
    if (!enabled() || lv == Level::DRAM)
        return;
    for (u32 k = 0; k < kBeatsPerLine; ++k)
        set_tag(lv, line_paddr + static_cast<u64>(k) * kBeatBytes, std::nullopt);
}

void MacEngine::on_store(u64 paddr, u32 width) {
    if (!enabled())
        return;
    u64 first = paddr & ~static_cast<u64>(kBeatBytes - 1);
    u64 last = (paddr + width - 1) & ~static_cast<u64>(kBeatBytes - 1);
    for (u64 block = first; block <= last; block += kBeatBytes) {
        std::array<u8, kBeatBytes> data;
        if (!mem_.peek_block(Level::L1D, block, data.data()))
            continue;
        l1d_[block] = {mac_tag(cfg_.key, block, data.data()), true};
    }
}

void MacEngine::on_stale_line_forced(Level lv, u64 line_paddr) {
    if (!enabled())
        return;
    // The forced copy is pre-fault data; its DRAM tags are the matching ones.
    for (u32 k = 0; k < kBeatsPerLine; ++k) {
        u64 block = line_paddr + static_cast<u64>(k) * kBeatBytes;
        set_tag(lv, block, stored_tag(Level::DRAM, block));
    }
}

std::string MacEngine::metrics_json() const {
    std::ostringstream out;
    out << "{\"policy\":\"" << mac_policy_name(cfg_.policy) << "\",\"checks\":" << metrics_.checks
        << ",\"mismatches\":" << metrics_.mismatches << ",\"recoveries\":" << metrics_.recoveries
        << ",\"alarms\":" << metrics_.alarms << ",\"cycles_added\":" << metrics_.cycles_added
        << "}";
    return out.str();
}

u64 MacEngine::state_digest() const {
    Fnv1a h;
    auto add_map = [&h](const std::unordered_map<u64, L1Entry>& m) {
        std::vector<u64> keys;
        keys.reserve(m.size());
        for (const auto& [k, v] : m)
            keys.push_back(k);
        std::sort(keys.begin(), keys.end());
        for (u64 k : keys) {
            const auto& e = m.at(k);
            h.add_u64(k);
            h.add_u64(e.tag);
            h.add_u8(e.verified ? 1 : 0);
        }
    };
    add_map(l1i_);
    add_map(l1d_);
    std::vector<u64> keys;
    keys.reserve(l2_.size());
    for (const auto& [k, v] : l2_)
        keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (u64 k : keys) {
        h.add_u64(k);
        h.add_u64(l2_.at(k));
    }
    for (u64 t : dram_tags_)
        h.add_u64(t);
    return h.value();
}

} // namespace socfault
