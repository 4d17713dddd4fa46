#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scb/cli.hpp"

using namespace scb;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "scbsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string preset(const std::string& name) { return std::string(SCB_SOURCE_DIR) + "/presets/" + name; }

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

std::string slurp(const std::string& path)
{
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("analyze prints the eight-phase operating point")
{
    const auto r = run({"analyze", "--config", preset("eightphase-400.cfg")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("gain M          = 0.0309278") != std::string::npos);
    CHECK(r.out.find("V_C1 = V_C2     = 206.186") != std::string::npos);
}

TEST_CASE("analyze echoes defaulted keys in the header")
{
    const std::string path = tmp("scb_no_cout.cfg");
    std::ofstream(path) << "phases = 4\nvin = 400\nduty = 0.2\n";
    const auto r = run({"analyze", "--config", path});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("# c_out = 0.00047 (default)") != std::string::npos);
}

TEST_CASE("contract-check passes for the shipped netlist")
{
    const auto r = run({"contract-check", "--config", preset("table1.cfg")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("0 failures") != std::string::npos);
}

TEST_CASE("simulate writes the documented header and is byte-identical across runs")
{
    const std::string a = tmp("scb_trace_a.csv"), b = tmp("scb_trace_b.csv");
    CHECK(run({"simulate", "--config", preset("table1.cfg"), "--out", a, "--steps-per-cycle", "400"}).code == kExitOk);
    CHECK(run({"simulate", "--config", preset("table1.cfg"), "--out", b, "--steps-per-cycle", "400"}).code == kExitOk);
    const std::string ta = slurp(a);
    CHECK(ta.rfind("t,il_1,il_2,il_3,il_4,il_o,vc_1,vc_2,vcb_1,vcb_2,vcb_3,vc_o,i_in,v_out,v_f,vs_1,vs_2,vs_3,vs_4,"
                   "vd_1,vd_2,vd_3,vd_4,p_in,p_out\n",
                   0) == 0);
    CHECK(ta == slurp(b));
}

TEST_CASE("simulate writes an SVG overlay of the phase currents")
{
    const std::string svg = tmp("scb_phases.svg");
    const auto r = run({"simulate", "--config", preset("eightphase-400.cfg"), "--steps-per-cycle", "400", "--svg", svg,
                        "--signals", "il_1,il_2,il_3,il_4,il_5,il_6,il_7,il_8"});
    CHECK(r.code == kExitOk);
    const std::string s = slurp(svg);
    int lines = 0;
    for (std::size_t p = 0; (p = s.find("<polyline", p)) != std::string::npos; ++p) ++lines;
    CHECK(lines == 8);
    CHECK(s.find("L8 current") != std::string::npos);
    CHECK(run({"simulate", "--config", preset("table1.cfg"), "--steps-per-cycle", "400", "--svg", svg, "--signals",
               "nope"})
              .code == kExitConfig);
}

TEST_CASE("sweep emits rows in input order")
{
    const auto r = run({"sweep", "--config", preset("table1.cfg"), "--param", "vin", "--start", "300", "--stop", "500",
                        "--count", "3", "--steps-per-cycle", "400", "--jobs", "3"});
    REQUIRE(r.code == kExitOk);
    std::istringstream is(r.out);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(is, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("vin,vout_formula,vout_sim", 0) == 0);
    CHECK(rows[1].rfind("300,", 0) == 0);
    CHECK(rows[2].rfind("400,", 0) == 0);
    CHECK(rows[3].rfind("500,", 0) == 0);
    CHECK(run({"sweep", "--config", preset("table1.cfg"), "--param", "duty", "--start", "0.1", "--stop", "0.6",
               "--count", "2"})
              .code == kExitConfig);
}

TEST_CASE("exit codes for configuration errors")
{
    const std::string path = tmp("scb_bad.cfg");
    std::ofstream(path) << "phases = 5\n";
    const auto r = run({"analyze", "--config", path});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find(":1: phases must be even >= 4") != std::string::npos);
    CHECK(run({"analyze", "--config", preset("anomaly-d70.cfg")}).code == kExitConfig);
    CHECK(run({"analyze", "--config", preset("anomaly-d70.cfg"), "--allow-invalid"}).code == kExitOk);
    CHECK(run({"no-such-command"}).code == kExitConfig);
}

TEST_CASE("regulate writes the regulation CSV")
{
    const std::string out = tmp("scb_reg.csv");
    const auto r = run({"regulate", "--config", preset("eightphase-800.cfg"), "--cycles", "20", "--steps-per-cycle",
                        "400", "--out", out});
    CHECK(r.code == kExitOk);
    CHECK(slurp(out).rfind("t,vin_true,code,vin_est,duty\n", 0) == 0);
}

TEST_CASE("verify runs selected criteria")
{
    const auto r = run({"verify", "--criteria", "10,13"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("criterion 10 PASS") != std::string::npos);
    CHECK(r.out.find("criterion 13 N/A") != std::string::npos);
}
