#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "cetsim/types.hpp"

namespace cetsim {

enum class EventKind : std::uint8_t {
    TransmitStart,
    Delivered,
    ComputeDone,
    Decision,
    AttackInjected,
    DefenseTriggered,
};

std::string_view event_kind_name(EventKind k);

struct Event {
    double time_s = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::TransmitStart;
    NodeId node;
    std::string detail;
};

/// Append-only audit log of one simulation run. Event times are
/// non-decreasing along the sequence.
struct Trace {
    std::vector<Event> events;
    std::uint64_t seed = 0;

    /// Newline-delimited "time_s,seq,kind,node,detail" records.
    std::string to_csv() const;
};

class SchedulingInPastError : public Error {
public:
    using Error::Error;
};

/// Deterministic random stream derived from (seed, label). Identical
/// (seed, label) pairs yield identical sequences; distinct labels yield
/// independent streams, so adding a consumer does not perturb the others.
/// The generator is splitmix64 over a label-hashed seed.
class RngStream {
public:
    RngStream(std::string_view label, std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform draw in [0, 1), 53-bit resolution.
    double next_uniform();
    bool bernoulli(double p) { return next_uniform() < p; }

private:
    std::uint64_t state_;
};

/// Sequential discrete-event kernel: virtual clock plus a (time, seq)
/// ordered queue. Single-threaded per run; independent runs share nothing.
class Simulator {
public:
    struct EventHandle {
        std::uint64_t seq = 0;
    };

    using Action = std::function<void(Simulator&)>;

    explicit Simulator(std::uint64_t seed = 0);

    double now() const { return now_; }

    /// Enqueue an event. Throws SchedulingInPastError if time_s < now().
    EventHandle schedule(double time_s, EventKind kind, NodeId node, std::string detail,
                         Action action = {});

    /// Cancel a pending event; returns false if it already fired or was
    /// cancelled before.
    bool cancel(EventHandle h);

    /// Dispatch events in (time, seq) order until the queue is empty or the
    /// next event is later than t_end; the clock then rests at t_end (or at
    /// the last dispatch time if it exceeds t_end already).
    Trace run_until(double t_end);

    // Bookkeeping counters; scheduled == dispatched + cancelled + pending.
    std::uint64_t scheduled_count() const { return scheduled_; }
    std::uint64_t dispatched_count() const { return dispatched_; }
    std::uint64_t cancelled_count() const { return cancelled_; }
    std::uint64_t pending_count() const { return scheduled_ - dispatched_ - cancelled_; }

private:
    struct Pending {
        Event event;
        Action action;
        bool cancelled = false;
        bool fired = false;
    };
    struct Later {
        bool operator()(const Pending* a, const Pending* b) const {
            if (a->event.time_s != b->event.time_s) return a->event.time_s > b->event.time_s;
            return a->event.seq > b->event.seq;
        }
    };

    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t scheduled_ = 0;
    std::uint64_t dispatched_ = 0;
    std::uint64_t cancelled_ = 0;
    std::vector<std::unique_ptr<Pending>> pool_;
    std::priority_queue<Pending*, std::vector<Pending*>, Later> queue_;
    Trace trace_;
};

/// Locale-independent, deterministic formatting of a double ("%.9g"),
/// shared by every serialization path so identical runs emit identical
/// bytes.
std::string format_double(double v);

} // namespace cetsim
