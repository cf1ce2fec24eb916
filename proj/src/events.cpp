#include "socfault/events.hpp"

#include <cstdio>
#include <sstream>

namespace socfault {

const char* fault_model_name(FaultModel m) {
    switch (m) {
    case FaultModel::F_L1I_FILL: return "F_L1I_FILL";
    case FaultModel::F_MMU: return "F_MMU";
    case FaultModel::F_L2_BEAT: return "F_L2_BEAT";
    }
    return "?";
}

u64 EventLog::digest() const {
    Fnv1a h;
    for (const auto& ev : events_) {
        h.add_u64(ev.cycle);
        h.add_u8(static_cast<u8>(ev.body.index()));
        std::visit(
            [&h](const auto& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, StepEvent>) {
                    h.add_u64(body.pc);
                    h.add_u32(body.word);
                    h.add_u32(body.cycles_charged);
                } else if constexpr (std::is_same_v<T, FillEvent>) {
                    h.add_u8(static_cast<u8>(body.trace.direction));
                    h.add_u8(static_cast<u8>(body.trace.src));
                    h.add_u8(static_cast<u8>(body.trace.dst));
                    h.add_u64(body.trace.line_paddr);
                    for (const auto& b : body.trace.beats) {
                        h.add_u64(b.intended_paddr);
                        h.add_u64(b.applied_paddr);
                        h.add(b.intended_data.data(), b.intended_data.size());
                        h.add(b.applied_data.data(), b.applied_data.size());
                        h.add_u64(b.cycle);
                        h.add_u8(b.dropped ? 1 : 0);
                    }
                } else if constexpr (std::is_same_v<T, WalkEvent>) {
                    h.add_u64(body.vaddr);
                    h.add_u64(body.pte_paddr);
                    h.add_u64(body.pte_word);
                    h.add_u8(body.fault ? 1 : 0);
                } else if constexpr (std::is_same_v<T, MutationEvent>) {
                    h.add_u8(static_cast<u8>(body.model));
                    h.add_u64(body.location);
                    h.add_u64(body.before);
                    h.add_u64(body.after);
                    h.add(body.note.data(), body.note.size());
                } else if constexpr (std::is_same_v<T, BusErrorEvent>) {
                    h.add_u64(body.paddr);
                } else if constexpr (std::is_same_v<T, TrapEventRec>) {
                    h.add_u8(body.reason);
                    h.add_u64(body.pc);
                }
            },
            ev.body);
    }
    return h.value();
}

std::string EventLog::render() const {
    std::ostringstream out;
    char buf[160];
    for (const auto& ev : events_) {
        std::visit(
            [&](const auto& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, StepEvent>) {
                    std::snprintf(buf, sizeof buf, "%10llu step pc=0x%llx word=0x%08x charged=%u",
                                  static_cast<unsigned long long>(ev.cycle),
                                  static_cast<unsigned long long>(body.pc), body.word,
                                  body.cycles_charged);
                    out << buf << "\n";
                } else if constexpr (std::is_same_v<T, FillEvent>) {
                    std::snprintf(buf, sizeof buf, "%10llu %s %s<-%s line=0x%llx%s",
                                  static_cast<unsigned long long>(ev.cycle),
                                  body.trace.direction == BeatTransfer::Dir::Fill ? "fill" : "evict",
                                  level_name(body.trace.dst), level_name(body.trace.src),
                                  static_cast<unsigned long long>(body.trace.line_paddr),
                                  body.trace.mutated() ? " MUTATED" : "");
                    out << buf << "\n";
                } else if constexpr (std::is_same_v<T, WalkEvent>) {
                    std::snprintf(buf, sizeof buf,
                                  "%10llu walk vaddr=0x%llx pte@0x%llx=0x%016llx%s",
                                  static_cast<unsigned long long>(ev.cycle),
                                  static_cast<unsigned long long>(body.vaddr),
                                  static_cast<unsigned long long>(body.pte_paddr),
                                  static_cast<unsigned long long>(body.pte_word),
                                  body.fault ? " FAULT" : "");
                    out << buf << "\n";
                } else if constexpr (std::is_same_v<T, MutationEvent>) {
                    std::snprintf(buf, sizeof buf,
                                  "%10llu mutation %s at 0x%llx before=0x%llx after=0x%llx %s",
                                  static_cast<unsigned long long>(ev.cycle),
                                  fault_model_name(body.model),
                                  static_cast<unsigned long long>(body.location),
                                  static_cast<unsigned long long>(body.before),
                                  static_cast<unsigned long long>(body.after), body.note.c_str());
                    out << buf << "\n";
                } else if constexpr (std::is_same_v<T, BusErrorEvent>) {
                    std::snprintf(buf, sizeof buf, "%10llu bus-error paddr=0x%llx",
                                  static_cast<unsigned long long>(ev.cycle),
                                  static_cast<unsigned long long>(body.paddr));
                    out << buf << "\n";
                } else if constexpr (std::is_same_v<T, TrapEventRec>) {
                    std::snprintf(buf, sizeof buf, "%10llu trap reason=%u pc=0x%llx",
                                  static_cast<unsigned long long>(ev.cycle), body.reason,
                                  static_cast<unsigned long long>(body.pc));
                    out << buf << "\n";
                }
            },
            ev.body);
    }
    return out.str();
}

} // namespace socfault
