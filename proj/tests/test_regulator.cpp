#include <doctest.h>

#include <cmath>
#include <sstream>

#include "scb/analysis.hpp"
#include "scb/regulator.hpp"

using namespace scb;

TEST_CASE("quantize and reconstruct")
{
    const SensingChain ch;
    CHECK(quantize_sense(400.0, ch) == 3244);  // round(400/101/5 * 4095)
    CHECK(quantize_sense(0.0, ch) == 0);
    bool sat = false;
    CHECK(quantize_sense(505.0, ch, &sat) == 4095);
    CHECK_FALSE(sat);
    CHECK(quantize_sense(600.0, ch, &sat) == 4095);
    CHECK(sat);
    CHECK(std::abs(reconstruct_vin(3244, ch) - 400.06) < 0.01);
    CHECK(reconstruct_vin(0, ch) == 0.0);
    CHECK(ch.lsb_volts() == doctest::Approx(0.1233).epsilon(1e-3));
}

TEST_CASE("sensing invariants")
{
    const SensingChain ch;
    int prev = -1;
    for (int i = 0; i <= 50000; ++i) {
        const double v = i * 505.0 / 50000;
        const int code = quantize_sense(v, ch);
        CHECK(code >= prev);
        prev = code;
        CHECK(std::abs(reconstruct_vin(code, ch) - v) <= ch.lsb_volts());
    }
}

TEST_CASE("duty law")
{
    RegulatorConfig c8;
    CHECK(compute_duty(8, 400.06, c8) == doctest::Approx(0.23298).epsilon(1e-4));
    RegulatorConfig c4;
    c4.vo_target = 24;
    CHECK(compute_duty(4, 400, c4) == doctest::Approx(0.22642).epsilon(1e-4));
    bool flag = false;
    CHECK(compute_duty(8, 50, c8, &flag) == doctest::Approx(c8.resolved_duty_max(8)));
    CHECK(flag);
    CHECK(compute_duty(8, 5, c8, &flag) == doctest::Approx(c8.resolved_duty_max(8)));
    CHECK(flag);
    CHECK(c8.resolved_duty_max(8) < 0.25);
}

TEST_CASE("profile parsing")
{
    std::istringstream is("t_seconds,vin_volts\n0,350\n0.005,450\n");
    const auto p = read_profile_csv(is);
    CHECK(p.at(0.0) == 350);
    CHECK(p.at(0.004999) == 350);
    CHECK(p.at(0.005) == 450);
    CHECK(p.at(1.0) == 450);
    std::istringstream bad("0,350\n-1,2\n");
    CHECK_THROWS_AS(read_profile_csv(bad), ConfigError);
}

TEST_CASE("closed loop holds the output under constant input")
{
    ConverterSpec s;
    s.phases = 8;
    s.load_ohms = 1.0;
    const SensingChain ch;
    const RegulatorConfig cfg;
    VinProfile prof{{{0.0, 400.0}}};
    ClosedLoopOptions o;
    o.cycles = 60;
    o.sim.steps_per_cycle = 1000;
    const auto rt = run_closed_loop(s, ch, cfg, prof, o);
    // One LSB of sensing error moves the duty by at most dD/dV * LSB.
    const double lsb_bound = 12.0 * ch.lsb_volts() / 400.0;
    CHECK(std::abs(rt.updates.back().vout_mean - 12.0) < 0.005 * 12.0 + lsb_bound);
    for (const auto& u : rt.updates) CHECK(u.duty < 0.25);
}

TEST_CASE("closed loop pins the duty below target")
{
    ConverterSpec s;
    s.phases = 8;
    s.load_ohms = 1.0;
    VinProfile prof{{{0.0, 10.0}}};
    ClosedLoopOptions o;
    o.cycles = 3;
    o.sim.steps_per_cycle = 200;
    const auto rt = run_closed_loop(s, SensingChain{}, RegulatorConfig{}, prof, o);
    CHECK(rt.clamp_events == 3);
    for (const auto& u : rt.updates) CHECK(u.duty == doctest::Approx(RegulatorConfig{}.resolved_duty_max(8)));
}
