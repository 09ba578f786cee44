#include "cetsim/engine.hpp"

#include <cstdio>

namespace cetsim {

std::string_view event_kind_name(EventKind k) {
    switch (k) {
    case EventKind::TransmitStart: return "TransmitStart";
    case EventKind::Delivered: return "Delivered";
    case EventKind::ComputeDone: return "ComputeDone";
    case EventKind::Decision: return "Decision";
    case EventKind::AttackInjected: return "AttackInjected";
    case EventKind::DefenseTriggered: return "DefenseTriggered";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string Trace::to_csv() const {
    std::string out;
    for (const Event& e : events) {
        out += format_double(e.time_s);
        out += ',';
        out += std::to_string(e.seq);
        out += ',';
        out += event_kind_name(e.kind);
        out += ',';
        out += std::to_string(e.node.value);
        out += ',';
        out += e.detail;
        out += '\n';
    }
    return out;
}

namespace {

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

RngStream::RngStream(std::string_view label, std::uint64_t seed) {
    // Mix the label hash into the seed through one splitmix round so that
    // streams for different labels are decorrelated even for nearby seeds.
    state_ = seed ^ fnv1a64(label);
    splitmix64_next(state_);
}

std::uint64_t RngStream::next_u64() { return splitmix64_next(state_); }

double RngStream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Simulator::Simulator(std::uint64_t seed) { trace_.seed = seed; }

Simulator::EventHandle Simulator::schedule(double time_s, EventKind kind, NodeId node,
                                           std::string detail, Action action) {
    if (time_s < now_) {
        throw SchedulingInPastError("schedule: event time " + format_double(time_s) +
                                    " is before now " + format_double(now_));
    }
    auto p = std::make_unique<Pending>();
    p->event = Event{time_s, next_seq_++, kind, node, std::move(detail)};
    p->action = std::move(action);
    queue_.push(p.get());
    pool_.push_back(std::move(p));
    ++scheduled_;
    return EventHandle{pool_.back()->event.seq};
}

bool Simulator::cancel(EventHandle h) {
    for (auto& p : pool_) {
        if (p->event.seq == h.seq) {
            if (p->cancelled || p->fired) return false;
            p->cancelled = true;
            ++cancelled_;
            return true;
        }
    }
    return false;
}

Trace Simulator::run_until(double t_end) {
    while (!queue_.empty()) {
        Pending* p = queue_.top();
        if (p->event.time_s > t_end) break;
        queue_.pop();
        if (p->cancelled) continue;
        p->fired = true;
        now_ = p->event.time_s;
        trace_.events.push_back(p->event);
        ++dispatched_;
        if (p->action) p->action(*this);
    }
    if (t_end > now_) now_ = t_end;
    // Cancelled entries still in the heap are skipped lazily above, but a
    // cancelled head must not keep the loop from terminating.
    while (!queue_.empty() && queue_.top()->cancelled) queue_.pop();
    return trace_;
}

} // namespace cetsim
