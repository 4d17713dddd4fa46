#include "scb/gates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scb {

namespace {

constexpr std::int64_t kGrid = 1'000'000'000;

double phase_of(double t, double period)
{
    double p = std::fmod(t, period) / period;
    if (p < 0.0) p += 1.0;
    if (p >= 1.0) p = 0.0;
    return p;
}

}  // namespace

Frac to_frac(double x) { return Frac(std::llround(x * static_cast<double>(kGrid)), kGrid); }

double to_double(const Frac& f) { return boost::rational_cast<double>(f); }

bool Signal::at(double t) const
{
    const double p = phase_of(t, period);
    for (const auto& iv : on)
        if (p >= to_double(iv.start) && p < to_double(iv.end)) return true;
    return false;
}

Frac Signal::on_fraction() const
{
    Frac sum(0);
    for (const auto& iv : on) sum += iv.end - iv.start;
    return sum;
}

Signal pwm_signal(double period, Frac start, Frac width)
{
    Signal s;
    s.period = period;
    if (width <= Frac(0)) return s;
    if (width >= Frac(1)) {
        s.on.push_back({Frac(0), Frac(1)});
        return s;
    }
    // Reduce start into [0, 1).
    start -= Frac(boost::rational_cast<std::int64_t>(start));
    if (start < Frac(0)) start += 1;
    const Frac end = start + width;
    if (end <= Frac(1)) {
        s.on.push_back({start, end});
    } else {
        s.on.push_back({Frac(0), end - 1});
        s.on.push_back({start, Frac(1)});
    }
    return s;
}

Signal and_compose(const Signal& a, const Signal& b)
{
    if (a.period != b.period) throw std::invalid_argument("and_compose: signal periods differ");
    Signal out;
    out.period = a.period;
    for (const auto& x : a.on)
        for (const auto& y : b.on) {
            const Frac lo = std::max(x.start, y.start);
            const Frac hi = std::min(x.end, y.end);
            if (lo < hi) out.on.push_back({lo, hi});
        }
    std::sort(out.on.begin(), out.on.end(),
              [](const Interval& l, const Interval& r) { return l.start < r.start; });
    return out;
}

double GateSchedule::on_time(int k) const { return to_double(start.at(k)) * period; }

std::vector<Frac> GateSchedule::edges() const
{
    std::vector<Frac> e{Frac(0)};
    for (const auto& sw : switches)
        for (const auto& iv : sw.on) {
            e.push_back(iv.start);
            if (iv.end < Frac(1)) e.push_back(iv.end);
        }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

std::vector<bool> GateSchedule::states_after(const Frac& f) const
{
    std::vector<bool> st(switches.size(), false);
    for (std::size_t k = 0; k < switches.size(); ++k)
        for (const auto& iv : switches[k].on)
            if (f >= iv.start && f < iv.end) st[k] = true;
    return st;
}

GateSchedule interleaved_schedule(int phases, Frac duty, double fsw)
{
    if (phases < 1) throw std::invalid_argument("interleaved_schedule: phases must be >= 1");
    if (duty < Frac(0) || duty >= Frac(1))
        throw std::invalid_argument("interleaved_schedule: duty must lie in [0, 1)");
    if (!(fsw > 0.0)) throw std::invalid_argument("interleaved_schedule: fsw must be positive");
    GateSchedule s;
    s.period = 1.0 / fsw;
    s.duty = duty;
    s.dead_gap = Frac(0);
    for (int k = 0; k < phases; ++k) {
        const Frac st(k, phases);
        s.start.push_back(st);
        s.switches.push_back(pwm_signal(s.period, st, duty));
    }
    return s;
}

GateSchedule interleaved_schedule(int phases, double duty, double fsw)
{
    return interleaved_schedule(phases, to_frac(duty), fsw);
}

GateSchedule sequential_schedule(int phases, double gap_fraction, double fsw)
{
    const Frac gap = to_frac(gap_fraction);
    if (gap < Frac(0) || gap >= Frac(1, phases))
        throw std::invalid_argument("sequential_schedule: gap_fraction must lie in [0, 1/N)");
    GateSchedule s = interleaved_schedule(phases, Frac(1, phases) - gap, fsw);
    s.dead_gap = gap;
    return s;
}

std::vector<bool> states_at(const GateSchedule& s, double t)
{
    std::vector<bool> st(s.switches.size());
    for (std::size_t k = 0; k < st.size(); ++k) st[k] = s.switches[k].at(t);
    return st;
}

}  // namespace scb
