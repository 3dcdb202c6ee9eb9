#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2e/rng.hpp"
#include "s2e/time.hpp"

namespace s2e {

enum class EventKind : std::uint8_t {
    source_toggle,
    segment_arrival,
    cycle_boundary,
    poll_pickup,
    plc_cycle,
};

class Kernel;

struct Event {
    SimTime due;
    std::uint64_t seq = 0;  // assigned by the kernel
    EventKind kind = EventKind::segment_arrival;
    std::uint64_t tag = 0;  // model-defined payload identity, folded into the trace hash
    std::function<void(Kernel&)> action;
};

struct TraceEntry {
    SimTime due;
    std::uint64_t seq;
    EventKind kind;
    std::uint64_t tag;
    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Sequential discrete-event engine. Events with equal due time fire in insertion order.
class Kernel {
public:
    explicit Kernel(bool keep_trace = false) : keep_trace_(keep_trace) {}

    SimTime now() const { return now_; }
    std::size_t pending() const { return queue_.size(); }
    std::uint64_t dispatched() const { return dispatched_; }
    std::uint64_t trace_hash() const { return trace_hash_; }
    const std::vector<TraceEntry>& trace() const { return trace_; }

    void schedule(Event event) {
        if (event.due < now_) {
            throw std::logic_error("Kernel::schedule: event due at " + std::to_string(event.due.us()) +
                                   "us is before current time " + std::to_string(now_.us()) + "us");
        }
        event.seq = next_seq_++;
        queue_.push(std::move(event));
    }

    void schedule(SimTime due, EventKind kind, std::uint64_t tag, std::function<void(Kernel&)> action) {
        schedule(Event{due, 0, kind, tag, std::move(action)});
    }

    /// Dispatch every event with due <= t_end; the clock ends at t_end.
    std::uint64_t run_until(SimTime t_end) {
        if (t_end < now_) throw std::logic_error("Kernel::run_until: t_end is in the past");
        std::uint64_t count = 0;
        while (!queue_.empty() && queue_.top().due <= t_end) {
            dispatch_next();
            ++count;
        }
        now_ = t_end;
        return count;
    }

    /// Dispatch until the queue is empty; the clock ends at the last dispatched event.
    std::uint64_t run() {
        std::uint64_t count = 0;
        while (!queue_.empty()) {
            dispatch_next();
            ++count;
        }
        return count;
    }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.due != b.due) return a.due > b.due;
            return a.seq > b.seq;
        }
    };

    void dispatch_next() {
        // priority_queue::top is const; the action is moved out through a copy of the node.
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.due;
        ++dispatched_;
        record(ev);
        if (ev.action) ev.action(*this);
    }

    void record(const Event& ev) {
        std::uint64_t h = trace_hash_;
        for (std::uint64_t word : {static_cast<std::uint64_t>(ev.due.us()), ev.seq,
                                   static_cast<std::uint64_t>(ev.kind), ev.tag}) {
            h = splitmix64(h ^ word);
        }
        trace_hash_ = h;
        if (keep_trace_) trace_.push_back({ev.due, ev.seq, ev.kind, ev.tag});
    }

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    SimTime now_{};
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
    std::uint64_t trace_hash_ = 0;
    bool keep_trace_;
    std::vector<TraceEntry> trace_;
};

}  // namespace s2e
