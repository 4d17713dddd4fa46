#include "scb/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "scb/acceptance.hpp"
#include "scb/analysis.hpp"
#include "scb/config.hpp"
#include "scb/network.hpp"
#include "scb/regulator.hpp"
#include "scb/svg.hpp"
#include "scb/topology.hpp"

namespace scb {

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::string svg;
    std::string profile;
    std::vector<std::string> signals;
    int cycles = -1;
    int steps_per_cycle = 4000;
    bool allow_invalid = false;
    bool transient = false;
    bool verbose = false;
    // sweep
    std::string param;
    double start = 0.0, stop = 0.0;
    int count = 0;
    int jobs = 0;
    // verify
    std::vector<int> criteria;
};

Scenario scenario(const Flags& f)
{
    if (f.config.empty()) {
        std::istringstream empty;
        return parse_config(empty, "<defaults>", f.allow_invalid);
    }
    return load_config(f.config, f.allow_invalid);
}

SimOptions sim_options(const Flags& f)
{
    if (f.steps_per_cycle < 10) throw ConfigError("--steps-per-cycle must be >= 10");
    SimOptions o;
    o.steps_per_cycle = f.steps_per_cycle;
    return o;
}

std::vector<std::string> plot_signals(const Flags& f)
{
    return f.signals.empty() ? std::vector<std::string>{"v_out"} : f.signals;
}

void header(const Scenario& s, std::ostream& out)
{
    out << "# scenario: " << (s.name.empty() ? "(unnamed)" : s.name) << "\n";
    for (const auto& line : s.defaulted()) out << "# " << line << "\n";
}

bool to_stdout(const std::string& path) { return path == "-"; }

// Writes to the file named by `path`, or to `fallback` for "-".
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn)
{
    if (path.empty() || to_stdout(path)) {
        fn(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    fn(f);
}

int cmd_analyze(const Flags& f, std::ostream& out)
{
    const Scenario s = scenario(f);
    header(s, out);
    const double duty = to_double(s.schedule().duty);
    print_formula_report(stress_formulas(s.spec.phases, s.spec.vin, duty, s.spec.load_ohms), out);
    const Verdict v = validity_check(s.spec.phases, duty, s.spec.vin);
    out << "validity        = " << (v.message.empty() ? (v.valid ? "valid" : "invalid") : v.message) << "\n";
    return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out)
{
    const Scenario s = scenario(f);
    const GateSchedule sched = s.schedule();
    const double period = sched.period;
    const Netlist net = build_converter(s.spec, f.allow_invalid);
    Simulator sim(net, s.spec.vin, sim_options(f));
    Trace tr;
    if (f.transient) {
        const int cycles = f.cycles > 0 ? f.cycles : 200;
        tr = simulate(sim, sched, cycles * period, cycles);
    } else {
        sim.set_state(analytic_state(net, s.spec.vin, to_double(sched.duty), s.spec.load_ohms));
        const SteadyResult ss = run_to_steady_state(sim, sched);
        const int cycles = f.cycles > 0 ? f.cycles : 1;
        tr = cycles == 1 ? ss.cycle : simulate(sim, sched, cycles * period, cycles);
    }
    if (!f.out.empty()) emit(f.out, out, [&](std::ostream& os) { write_trace_csv(tr, os); });
    if (!f.svg.empty()) write_svg(tr, plot_signals(f), f.svg);
    if (!to_stdout(f.out)) {
        header(s, out);
        print_steady_report(steady_metrics(tr, s.spec), out);
    }
    return kExitOk;
}

double& sweep_target(ConverterSpec& s, const std::string& param)
{
    return param == "duty" ? s.duty : param == "vin" ? s.vin : s.load_ohms;
}

int cmd_sweep(const Flags& f, std::ostream& out)
{
    const Scenario base = scenario(f);
    if (f.param != "duty" && f.param != "vin" && f.param != "load_ohms")
        throw ConfigError("--param must be one of duty, vin, load_ohms");
    if (f.count < 2) throw ConfigError("--count must be >= 2");
    if (f.param == "duty" && base.pwm_mode == PwmMode::Sequential)
        throw ConfigError("a duty sweep requires pwm_mode = interleaved");

    std::vector<Scenario> points;
    for (int i = 0; i < f.count; ++i) {
        Scenario s = base;
        sweep_target(s.spec, f.param) = f.start + (f.stop - f.start) * i / (f.count - 1);
        s.spec.validate(f.allow_invalid);
        points.push_back(std::move(s));
    }

    // Points run in parallel; rows are written in input order afterwards.
    const SimOptions sim = sim_options(f);
    std::vector<CrossCheck> results(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i; (i = next++) < points.size();) {
            try {
                results[i] = crosscheck(points[i].spec, points[i].schedule(), sim, f.allow_invalid);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min<std::size_t>(f.jobs > 0 ? f.jobs : hw, points.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    emit(f.out, out, [&](std::ostream& os) {
        os << f.param << ",vout_formula,vout_sim,rel_error,efficiency,iin_min,continuous,sharing_spread,cycles\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            ConverterSpec spec = points[i].spec;
            const auto& r = results[i];
            const double err = std::abs(r.steady.vout_mean - r.formula.vout) / std::abs(r.formula.vout);
            os << format_number(sweep_target(spec, f.param)) << ',' << format_number(r.formula.vout) << ','
               << format_number(r.steady.vout_mean) << ',' << format_number(err) << ','
               << format_number(r.steady.efficiency) << ',' << format_number(r.steady.iin_min) << ','
               << (r.steady.continuous ? 1 : 0) << ',' << format_number(r.steady.sharing_spread) << ',' << r.cycles
               << '\n';
        }
    });
    return kExitOk;
}

int cmd_regulate(const Flags& f, std::ostream& out)
{
    const Scenario s = scenario(f);
    VinProfile profile{{{0.0, s.spec.vin}}};
    if (!f.profile.empty()) {
        std::ifstream in(f.profile);
        if (!in) throw ConfigError("cannot read profile " + f.profile);
        profile = read_profile_csv(in);
    }
    s.chain.validate(profile.max());
    ClosedLoopOptions o;
    o.cycles = f.cycles > 0 ? f.cycles : 200;
    o.keep_trace = !f.svg.empty();
    o.sim = sim_options(f);
    const RegulationTrace rt = run_closed_loop(s.spec, s.chain, s.regulator, profile, o);

    if (!f.out.empty()) emit(f.out, out, [&](std::ostream& os) { write_regulation_csv(rt, os); });
    if (!f.svg.empty()) write_svg(rt.trace, plot_signals(f), f.svg);
    if (!to_stdout(f.out)) {
        header(s, out);
        double recon = 0.0;
        for (const auto& u : rt.updates) recon = std::max(recon, std::abs(u.vin_est - u.vin_true));
        const auto& last = rt.updates.back();
        out << std::setprecision(6) << "cycles          = " << rt.updates.size() << "\n"
            << "final duty      = " << last.duty << "\n"
            << "final v_out     = " << last.vout_mean << " V (target " << s.regulator.vo_target << " V)\n"
            << "max |vin error| = " << recon << " V (LSB " << s.chain.lsb_volts() << " V)\n"
            << "clamped updates = " << rt.clamp_events << "\n"
            << "ADC saturations = " << rt.saturation_events << "\n";
    }
    return kExitOk;
}

int cmd_contract(const Flags& f, std::ostream& out)
{
    const Scenario s = scenario(f);
    const ContractReport rep = verify_mode_contract(build_converter(s.spec, f.allow_invalid), s.spec);
    header(s, out);
    out << std::setprecision(9);
    for (const auto& r : rep.rows)
        if (f.verbose || !r.pass)
            out << (r.pass ? "ok   " : "FAIL ") << r.configuration << ": " << r.relation << " expected " << r.expected
                << " observed " << r.observed << " (abs error " << r.abs_error << ")\n";
    out << rep.rows.size() << " relations checked, " << rep.failures() << " failures\n";
    return rep.all_pass() ? kExitOk : kExitContract;
}

int cmd_verify(const Flags& f, std::ostream& out)
{
    AcceptanceOptions o;
    o.steps_per_cycle = f.steps_per_cycle;
    o.only.insert(f.criteria.begin(), f.criteria.end());
    const auto results = run_acceptance(o, out);
    const bool ok = acceptance_ok(results);
    out << (ok ? "acceptance: OK" : "acceptance: FAILED") << "\n";
    return ok ? kExitOk : kExitAcceptance;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Flags f;
    CLI::App app{"Series-capacitor interleaved buck converter workbench"};
    app.require_subcommand(1);

    const auto common = [&f](CLI::App* c) {
        c->add_option("--config", f.config, "Scenario file (key = value)");
        c->add_option("--steps-per-cycle", f.steps_per_cycle, "Integration steps per switching period");
        c->add_flag("--allow-invalid", f.allow_invalid, "Accept duty ratios outside the valid range");
    };

    auto* analyze = app.add_subcommand("analyze", "Print the closed-form operating point and stresses");
    common(analyze);

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate and write a trace CSV");
    common(simulate_cmd);
    simulate_cmd->add_option("--out", f.out, "Trace CSV path ('-' for stdout)");
    simulate_cmd->add_option("--cycles", f.cycles, "Cycles to record (steady state) or to simulate (--transient)");
    simulate_cmd->add_flag("--transient", f.transient, "Start from rest instead of the periodic steady state");
    simulate_cmd->add_option("--svg", f.svg, "SVG plot path");
    simulate_cmd->add_option("--signals", f.signals, "Signals to plot (comma separated)")->delimiter(',');

    auto* sweep = app.add_subcommand("sweep", "Steady-state sweep of one parameter");
    common(sweep);
    sweep->add_option("--param", f.param, "duty, vin or load_ohms")->required();
    sweep->add_option("--start", f.start, "First value")->required();
    sweep->add_option("--stop", f.stop, "Last value")->required();
    sweep->add_option("--count", f.count, "Number of points (>= 2)")->required();
    sweep->add_option("--jobs", f.jobs, "Worker threads (default: hardware concurrency)");
    sweep->add_option("--out", f.out, "Summary CSV path (default stdout)");

    auto* regulate = app.add_subcommand("regulate", "Closed-loop run of the input-sensing duty regulator");
    common(regulate);
    regulate->add_option("--profile", f.profile, "Input voltage profile CSV (t,vin)");
    regulate->add_option("--cycles", f.cycles, "Switching cycles to run (default 200)");
    regulate->add_option("--out", f.out, "Regulation CSV path ('-' for stdout)");
    regulate->add_option("--svg", f.svg, "SVG plot path");
    regulate->add_option("--signals", f.signals, "Signals to plot (comma separated)")->delimiter(',');

    auto* contract = app.add_subcommand("contract-check", "Check the netlist against the mode equations");
    common(contract);
    contract->add_flag("--verbose", f.verbose, "Print every relation, not only failures");

    auto* verify = app.add_subcommand("verify", "Run the built-in acceptance suite");
    verify->add_option("--steps-per-cycle", f.steps_per_cycle, "Integration steps per switching period");
    verify->add_option("--criteria", f.criteria, "Only these criteria (comma separated)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*analyze) return cmd_analyze(f, out);
        if (*simulate_cmd) return cmd_simulate(f, out);
        if (*sweep) return cmd_sweep(f, out);
        if (*regulate) return cmd_regulate(f, out);
        if (*contract) return cmd_contract(f, out);
        if (*verify) return cmd_verify(f, out);
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const StructuralError& e) {
        err << "structural error: " << e.what() << "\n";
        return kExitContract;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace scb
