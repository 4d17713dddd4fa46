// Interleaved PWM gate schedules with exact rational timing.
#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <vector>

namespace scb {

using Frac = boost::rational<std::int64_t>;

// Snap a decimal fraction onto a 1e-9 grid so schedules stay exact.
Frac to_frac(double x);
double to_double(const Frac& f);

// Half-open on-interval [start, end) in fractions of the period, 0 <= start < end <= 1.
struct Interval {
    Frac start;
    Frac end;
    bool operator==(const Interval&) const = default;
};

// One periodic logic signal: sorted, disjoint, non-wrapping intervals.
struct Signal {
    double period = 0.0;
    std::vector<Interval> on;

    bool at(double t) const;
    Frac on_fraction() const;
};

// Periodic pulse starting at `start` (fraction, wraps around) lasting `width`.
Signal pwm_signal(double period, Frac start, Frac width);

// Pointwise logical AND; throws std::invalid_argument on mismatched periods.
Signal and_compose(const Signal& a, const Signal& b);

struct GateSchedule {
    double period = 0.0;
    Frac duty;
    Frac dead_gap;
    std::vector<Frac> start;        // per switch, fraction of period
    std::vector<Signal> switches;   // per switch on-intervals

    int phases() const { return static_cast<int>(switches.size()); }
    // Time (s) at which switch k (0-based) turns on within the first period.
    double on_time(int k) const;
    // All switching edges within one period as sorted unique fractions, always including 0.
    std::vector<Frac> edges() const;
    // Switch states while strictly inside the span that starts at fraction `f`.
    std::vector<bool> states_after(const Frac& f) const;
};

// Switch k (1-based) starts at (k-1)/N of the period.
GateSchedule interleaved_schedule(int phases, double duty, double fsw);
GateSchedule interleaved_schedule(int phases, Frac duty, double fsw);

// One-by-one firing with an off gap between consecutive pulses: duty = 1/N - gap.
GateSchedule sequential_schedule(int phases, double gap_fraction, double fsw);

// State of every switch at time t (t mod period, half-open intervals).
std::vector<bool> states_at(const GateSchedule& s, double t);

}  // namespace scb
