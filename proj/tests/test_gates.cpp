#include <doctest.h>

#include "scb/gates.hpp"

using namespace scb;

TEST_CASE("interleaved schedule timing")
{
    const auto s = interleaved_schedule(4, 0.235, 30e3);
    CHECK(s.period == doctest::Approx(33.3333e-6).epsilon(1e-5));
    CHECK(s.on_time(1) == doctest::Approx(8.33333e-6).epsilon(1e-5));
    const auto s8 = interleaved_schedule(8, 0.24, 30e3);
    CHECK(s8.on_time(4) == doctest::Approx(16.6667e-6).epsilon(1e-5));
    const auto z = interleaved_schedule(4, 0.0, 30e3);
    for (double t : {0.0, 1e-6, 20e-6})
        for (bool b : states_at(z, t)) CHECK_FALSE(b);
}

TEST_CASE("sequential schedule duty")
{
    CHECK(sequential_schedule(4, 0.015, 30e3).duty == to_frac(0.235));
    CHECK(sequential_schedule(8, 0.01, 30e3).duty == to_frac(0.115));
    const auto s = sequential_schedule(4, 0.0, 30e3);
    CHECK(s.duty == Frac(1, 4));
    CHECK_THROWS(sequential_schedule(4, 0.25, 30e3));
    // Fires one by one: never two switches on at once.
    for (int i = 0; i < 1000; ++i) {
        const auto st = states_at(sequential_schedule(4, 0.015, 30e3), i * s.period / 1000.0);
        CHECK(std::count(st.begin(), st.end(), true) <= 1);
    }
}

TEST_CASE("and composition")
{
    const Signal a = pwm_signal(1.0, Frac(0), Frac(1, 2));
    const Signal b = pwm_signal(1.0, Frac(1, 4), Frac(1, 2));
    const Signal c = and_compose(a, b);
    REQUIRE(c.on.size() == 1);
    CHECK(c.on[0] == Interval{Frac(1, 4), Frac(1, 2)});
    CHECK(and_compose(a, a).on == a.on);
    CHECK(and_compose(a, pwm_signal(1.0, Frac(1, 2), Frac(1, 4))).on.empty());
    CHECK_THROWS_AS(and_compose(a, pwm_signal(2.0, Frac(0), Frac(1, 2))), std::invalid_argument);
}

TEST_CASE("states_at half-open semantics and periodicity")
{
    const auto s = interleaved_schedule(4, 0.235, 30e3);
    const double T = s.period;
    CHECK(states_at(s, 0.0) == std::vector<bool>{true, false, false, false});
    CHECK(states_at(s, 0.24 * T) == std::vector<bool>{false, false, false, false});
    CHECK(states_at(s, T) == states_at(s, 0.0));
    for (int i = 0; i < 97; ++i) {
        const double t = i * T / 97.0;
        CHECK(states_at(s, t) == states_at(s, t + T));
    }
}

TEST_CASE("schedule invariants")
{
    for (int n : {4, 6, 8}) {
        for (double d : {0.05, 1.0 / n - 0.01, 2.0 / n - 0.01}) {
            const auto s = interleaved_schedule(n, d, 10e3);
            for (int k = 0; k < n; ++k) {
                CHECK(s.switches[k].on_fraction() == to_frac(d));
                CHECK(s.start[k] == Frac(k, n));
            }
            // At most two on; for duty < 1/N at most one; two never share a leg (odd/even).
            for (int i = 0; i < 2000; ++i) {
                const auto st = states_at(s, (i + 0.5) * s.period / 2000.0);
                const int on = static_cast<int>(std::count(st.begin(), st.end(), true));
                CHECK(on <= (d < 1.0 / n ? 1 : 2));
                for (int a = 0; a < n; ++a)
                    for (int b = a + 1; b < n; ++b)
                        if (st[a] && st[b]) CHECK((a % 2) != (b % 2));
            }
        }
    }
}

TEST_CASE("edges are exact and sorted")
{
    const auto s = interleaved_schedule(4, 0.235, 30e3);
    const auto e = s.edges();
    CHECK(e.front() == Frac(0));
    CHECK(std::is_sorted(e.begin(), e.end()));
    CHECK(std::find(e.begin(), e.end(), to_frac(0.235)) != e.end());
    CHECK(std::find(e.begin(), e.end(), Frac(1, 4) + to_frac(0.235)) != e.end());
}
