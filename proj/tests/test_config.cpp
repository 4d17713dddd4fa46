#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "scb/config.hpp"
#include "scb/engine.hpp"
#include "scb/svg.hpp"

using namespace scb;

namespace {

std::string preset(const std::string& name) { return std::string(SCB_SOURCE_DIR) + "/presets/" + name; }

Scenario parse(const std::string& text, bool allow_invalid = false)
{
    std::istringstream is(text);
    return parse_config(is, "test.cfg", allow_invalid);
}

}  // namespace

TEST_CASE("reference preset loads with the reference component values")
{
    const Scenario s = load_config(preset("table1.cfg"));
    CHECK(s.spec.phases == 4);
    CHECK(s.spec.vin == doctest::Approx(400));
    CHECK(s.spec.fsw == doctest::Approx(30e3));
    CHECK(s.spec.l_phase == doctest::Approx(330e-6));
    CHECK(s.spec.c_out == doctest::Approx(470e-6));
    CHECK(s.spec.load_ohms == doctest::Approx(1.152));
    CHECK(s.defaulted().empty() == false);  // loss parameters fall back to defaults
}

TEST_CASE("all shipped presets parse")
{
    for (const char* p : {"table1.cfg", "table1-d215.cfg", "eightphase-400.cfg", "eightphase-800.cfg"})
        CHECK_NOTHROW(load_config(preset(p)));
    CHECK_THROWS_AS(load_config(preset("anomaly-d70.cfg")), ConfigError);
    CHECK_NOTHROW(load_config(preset("anomaly-d70.cfg"), true));
}

TEST_CASE("odd phase count is rejected")
{
    try {
        parse("phases = 5\nduty = 0.2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("even >= 4") != std::string::npos);
    }
}

TEST_CASE("omitted output capacitance defaults and is reported")
{
    const Scenario s = parse("phases = 4\nvin = 400\nduty = 0.2\n");
    CHECK(s.spec.c_out == doctest::Approx(470e-6));
    bool found = false;
    for (const auto& line : s.defaulted())
        if (line.rfind("c_out", 0) == 0) found = true;
    CHECK(found);
}

TEST_CASE("unknown, duplicate and malformed keys are errors with line numbers")
{
    try {
        parse("phases = 4\nbogus = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("vin = 400\nvin = 300\n"), ConfigError);
    CHECK_THROWS_AS(parse("vin = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("vin 400\n"), ConfigError);
}

TEST_CASE("effective configuration round-trips")
{
    const Scenario a = load_config(preset("eightphase-800.cfg"));
    std::ostringstream os;
    write_config(a, os);
    const Scenario b = parse(os.str());
    CHECK(b.spec.phases == a.spec.phases);
    CHECK(b.spec.duty == a.spec.duty);
    CHECK(b.chain.divider_ratio == a.chain.divider_ratio);
    CHECK(b.regulator.vo_target == a.regulator.vo_target);
}

TEST_CASE("svg output is deterministic and validates signal names")
{
    const Scenario s = load_config(preset("table1.cfg"));
    const auto net = build_converter(s.spec);
    SimOptions opt;
    opt.steps_per_cycle = 200;
    Simulator sim(net, s.spec.vin, opt);
    const Trace tr = simulate(sim, s.schedule(), 3 * s.spec.period(), 3);

    std::ostringstream a, b;
    write_svg(tr, {"il_1", "il_2", "v_out"}, a);
    write_svg(tr, {"il_1", "il_2", "v_out"}, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("L1 current") != std::string::npos);
    CHECK(a.str().find("time (s)") != std::string::npos);

    std::ostringstream c;
    CHECK_THROWS_AS(write_svg(tr, {"no_such_signal"}, c), std::out_of_range);
    CHECK_THROWS_AS(write_svg(tr, {}, c), std::invalid_argument);
}
