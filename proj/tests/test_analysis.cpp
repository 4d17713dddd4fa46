#include <doctest.h>

#include <cmath>
#include <random>

#include "scb/analysis.hpp"

using namespace scb;

TEST_CASE("ideal gain")
{
    CHECK(ideal_gain(4, 0.235) == doctest::Approx(0.0624169).epsilon(1e-6));
    CHECK(400 * ideal_gain(4, 0.235) == doctest::Approx(24.97).epsilon(1e-3));
    CHECK(ideal_gain(8, 0.24) == doctest::Approx(0.0309278).epsilon(1e-6));
    CHECK(400 * ideal_gain(8, 0.24) == doctest::Approx(12.37).epsilon(1e-3));
    CHECK(ideal_gain(4, 0.0) == 0.0);
    CHECK(800 * ideal_gain(4, 0.06) == doctest::Approx(12.18).epsilon(1e-3));
    CHECK(ideal_gain(8, Frac(6, 25)) == Frac(6, 194));
}

TEST_CASE("duty for target")
{
    CHECK(duty_for_target(8, 800, 12) == doctest::Approx(0.118227).epsilon(1e-6));
    CHECK(duty_for_target(4, 800, 12) == doctest::Approx(0.059113).epsilon(1e-5));
    CHECK(std::round(100 * duty_for_target(4, 800, 12)) == 6);
    // Exact inverse pair in rational arithmetic.
    for (auto [n, vin, vo] : {std::tuple{8, 800, 12}, std::tuple{4, 400, 24}, std::tuple{6, 330, 17}}) {
        const Frac d = duty_for_target_exact(n, Frac(vin), Frac(vo));
        CHECK(ideal_gain(n, d) * Frac(vin) == Frac(vo));
    }
    try {
        duty_for_target(8, 400, 20);
        FAIL("expected a validity error");
    } catch (const ValidityError& e) {
        CHECK(e.duty == doctest::Approx(8 * 20.0 / 420.0));
    }
}

TEST_CASE("ladder stress formulas")
{
    const auto f = stress_formulas(8, 400, 0.24);
    CHECK(f.v_c1 == doctest::Approx(206.19).epsilon(1e-4));
    CHECK(f.v_c2 == doctest::Approx(206.19).epsilon(1e-4));
    REQUIRE(f.v_cb.size() == 7u);
    CHECK(f.v_cb[4] == doctest::Approx(154.64).epsilon(1e-4));
    CHECK(f.v_cb[5] == doctest::Approx(103.09).epsilon(1e-4));
    CHECK(f.v_cb[6] == doctest::Approx(51.55).epsilon(1e-4));
    const auto g = stress_formulas(4, 400, 0.235);
    CHECK(g.v_c1 == doctest::Approx(212.48).epsilon(1e-4));
    CHECK(g.v_cb.back() == doctest::Approx(106.24).epsilon(1e-4));
    // Ladder steps are all vin/(N-D); the input stack sits one step above CB_1.
    const double s = 400 / 7.76;
    CHECK(f.v_c1 + f.v_c2 - f.v_cb[0] == doctest::Approx(s));
    for (std::size_t j = 0; j + 1 < f.v_cb.size(); ++j) CHECK(f.v_cb[j] - f.v_cb[j + 1] == doctest::Approx(s));
    // D -> 0: input capacitors each hold half the input.
    CHECK(stress_formulas(8, 400, 1e-9).v_c1 == doctest::Approx(200.0));
    const auto h = stress_formulas(8, 400, 0.24, 1.0);
    CHECK(h.i_phase == doctest::Approx(12.371 / 7.76).epsilon(1e-3));
    CHECK(h.i_in == doctest::Approx(h.i_lo * 0.24 / 7.76));
}

TEST_CASE("validity check")
{
    const auto v = validity_check(4, 0.7, 400);
    CHECK_FALSE(v.valid);
    CHECK(400 * v.formula_gain == doctest::Approx(84.85).epsilon(1e-3));
    CHECK(v.message.find("diverge") != std::string::npos);
    CHECK(validity_check(8, 0.24).valid);
    CHECK(validity_check(4, 0.49).valid);
}

TEST_CASE("eight-phase steady metrics")
{
    ConverterSpec s;
    s.phases = 8;
    s.duty = 0.24;
    s.load_ohms = 1.0;
    const auto cc = crosscheck(s);
    const auto& r = cc.steady;
    for (double m : r.phase_mean) CHECK(m == doctest::Approx(1.594).epsilon(0.02));
    CHECK(r.sharing_spread < 0.01);
    CHECK(r.peak_vs[0] == doctest::Approx(50.0).epsilon(0.15));
    for (int k = 1; k < 4; ++k) CHECK(r.peak_vs[k] == doctest::Approx(100.0).epsilon(0.20));
    CHECK(cc.max_rel_error() < 0.02);
    CHECK(r.efficiency >= 0.995);
    CHECK(r.power_identity_error < 0.005);
    for (double v : r.residuals.inductor_volts) CHECK(std::abs(v) < 1e-3 * r.vout_mean);
    for (double i : r.residuals.capacitor_amps) CHECK(std::abs(i) < 1e-3 * r.ilo_mean);
}

TEST_CASE("continuity flag")
{
    ConverterSpec t1;
    CHECK(crosscheck(t1).steady.continuous);
    ConverterSpec lo = t1;
    lo.vin = 800;
    lo.duty = duty_for_target(4, 800, 12);
    CHECK_FALSE(crosscheck(lo).steady.continuous);
}

TEST_CASE("non-converged trace fails the residual bounds")
{
    ConverterSpec s;
    s.phases = 8;
    s.duty = 0.24;
    s.load_ohms = 1.0;
    SteadyOptions o;
    o.max_cycles = 2;
    o.warm_start = false;
    o.shooting_iterations = 0;
    o.throw_on_failure = false;
    const auto ss = run_to_steady_state(s, interleaved_schedule(8, 0.24, s.fsw), o);
    CHECK_FALSE(ss.converged);
    const auto r = steady_metrics(ss.cycle, s);
    bool exceeded = false;
    for (double v : r.residuals.inductor_volts) exceeded |= std::abs(v) > 1e-3 * 12.37;
    CHECK(exceeded);
}

TEST_CASE("short trace is rejected")
{
    ConverterSpec s;
    Trace tr;
    tr.columns = trace_columns(4);
    tr.rows.push_back(std::vector<double>(tr.columns.size(), 0.0));
    CHECK_THROWS_AS(steady_metrics(tr, s), std::invalid_argument);
}

TEST_CASE("report csv format")
{
    std::ostringstream os;
    write_report_csv({{"gain", 0.5, 0.5, 0.0}}, os);
    CHECK(os.str() == "name,formula_value,simulated_value,rel_error\ngain,0.5,0.5,0\n");
}
