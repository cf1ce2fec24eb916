#pragma once

#include "socfault/memory.hpp"

#include <string>
#include <variant>
#include <vector>

namespace socfault {

enum class FaultModel : u8 { F_L1I_FILL, F_MMU, F_L2_BEAT };

const char* fault_model_name(FaultModel m);

struct StepEvent {
    u64 pc;
    u32 word;
    u32 cycles_charged;
};

struct FillEvent {
    FillTrace trace;
};

struct WalkEvent {
    u64 vaddr;
    u64 pte_paddr;
    u64 pte_word;
    bool fault;
};

struct MutationEvent {
    FaultModel model;
    u64 location;
    u64 before;
    u64 after;
    std::string note;
};

struct BusErrorEvent {
    u64 paddr;
};

struct TrapEventRec {
    u8 reason;
    u64 pc;
};

struct Event {
    u64 cycle;
    std::variant<StepEvent, FillEvent, WalkEvent, MutationEvent, BusErrorEvent, TrapEventRec> body;
};

class EventLog {
public:
    void clear() { events_.clear(); }
    bool empty() const { return events_.empty(); }
    std::size_t size() const { return events_.size(); }
    const std::vector<Event>& events() const { return events_; }

    void push(u64 cycle, StepEvent e) { events_.push_back({cycle, e}); }
    void push(u64 cycle, FillEvent e) { events_.push_back({cycle, std::move(e)}); }
    void push(u64 cycle, WalkEvent e) { events_.push_back({cycle, e}); }
    void push(u64 cycle, MutationEvent e) { events_.push_back({cycle, std::move(e)}); }
    void push(u64 cycle, BusErrorEvent e) { events_.push_back({cycle, e}); }
    void push(u64 cycle, TrapEventRec e) { events_.push_back({cycle, e}); }

    u64 digest() const;
    std::string render() const;

private:
    std::vector<Event> events_;
};

} // namespace socfault
