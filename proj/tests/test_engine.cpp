#include <doctest.h>

#include <cmath>
#include <sstream>

#include "scb/engine.hpp"

using namespace scb;

namespace {

ConverterSpec table1()
{
    ConverterSpec s;  // defaults are the four-phase reference operating point
    return s;
}

ConverterSpec eight(double vin = 400.0, double duty = 0.24)
{
    ConverterSpec s;
    s.phases = 8;
    s.vin = vin;
    s.duty = duty;
    s.load_ohms = 1.0;
    return s;
}

double mean(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("resistor divider matches algebra")
{
    Netlist net;
    net.nodes = {"0", "a", "b"};
    net.branches = {{BranchKind::VoltageSource, "VIN", 1, 0, 10.0, 0},
                    {BranchKind::Resistor, "R1", 1, 2, 3.0, 0},
                    {BranchKind::Resistor, "R2", 2, 0, 7.0, 0}};
    const NetworkSolver solver(net);
    const ModeModel m = solver.build({});
    const Eigen::VectorXd z = m.Zu * Eigen::Vector2d(10.0, 0.0);
    CHECK(solver.node_voltage(z, 2) == doctest::Approx(7.0));
    CHECK(solver.branch_current(z, Eigen::VectorXd(), {}, 1, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("L-R decay is second-order accurate")
{
    Netlist net;
    net.nodes = {"0", "a"};
    const double L = 1e-3, R = 2.0, i0 = 1.5;
    net.branches = {{BranchKind::Inductor, "L", 1, 0, L, 0}, {BranchKind::Resistor, "R", 1, 0, R, 0}};
    const NetworkSolver solver(net);
    const ModeModel m = solver.build({});
    const double t_end = 1e-3;
    auto error = [&](int steps, StepRule rule) {
        const double h = t_end / steps;
        const Propagator p = make_propagator(m, h, rule);
        Eigen::VectorXd x(1);
        x << i0;
        for (int k = 0; k < steps; ++k) x = p.P * x;
        return std::abs(x(0) - i0 * std::exp(-R * t_end / L));
    };
    const double e1 = error(100, StepRule::Trapezoidal), e2 = error(200, StepRule::Trapezoidal);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(error(10, StepRule::Exact) < 1e-12);
}

TEST_CASE("conduction resolution")
{
    const auto spec = table1();
    const Netlist net = build_converter(spec);
    Simulator sim(net, spec.vin);
    const Eigen::VectorXd x = analytic_state(net, spec.vin, spec.duty, spec.load_ohms);
    const std::vector<bool> all_on(4, true);

    // S1 on: every diode conducts except D1.
    const auto c1 = sim.resolve_conduction(x, {true, false, false, false}, all_on);
    CHECK(c1.diode == std::vector<bool>{false, true, true, true});
    // All switches off: all diodes conduct.
    const auto c0 = sim.resolve_conduction(x, std::vector<bool>(4, false), {false, false, true, false});
    CHECK(c0.diode == all_on);
    // Phase 2 current at zero and pulled negative while freewheeling: D2 blocks.
    Eigen::VectorXd xd = x;
    xd(1) = -1e-3;
    const auto cd = sim.resolve_conduction(xd, std::vector<bool>(4, false), all_on);
    CHECK(cd.diode == std::vector<bool>{true, false, true, true});
}

TEST_CASE("active inductor voltage matches the ladder relation in mode S1 on")
{
    const auto spec = table1();
    const Netlist net = build_converter(spec);
    Simulator sim(net, spec.vin);
    const Eigen::VectorXd x = analytic_state(net, spec.vin, spec.duty, spec.load_ohms);
    const Conduction c{{true, false, false, false}, {false, true, true, true}};
    const Eigen::VectorXd z = sim.solve(x, c);
    const NetworkSolver solver(net);
    const double vf = solver.node_voltage(z, net.node("F"));
    const double vl1 = solver.inductor_voltage(z, x, net.find("L_1"));
    const auto& L = sim.layout();
    CHECK(vl1 == doctest::Approx(x(L.vc1()) + x(L.vc2()) - x(L.vcb(0)) - vf).epsilon(1e-4));
}

TEST_CASE("four-phase reference design reaches the ideal output")
{
    const auto spec = table1();
    const auto sched = interleaved_schedule(4, spec.duty, spec.fsw);
    Simulator sim(build_converter(spec), spec.vin);
    sim.set_state(analytic_state(sim.netlist(), spec.vin, spec.duty, spec.load_ohms));
    const Trace tr = simulate(sim, sched, 200 * sched.period);
    CHECK(mean(tr.column("v_out")) == doctest::Approx(24.97).epsilon(0.01));
    CHECK(tr.rows.size() == 4001u);
    // Universal KCL at every sample.
    const int iin = tr.col("i_in"), ilo = tr.col("il_o");
    for (const auto& r : tr.rows) {
        double s = -r[ilo];
        for (int k = 1; k <= 4; ++k) s += r[k];
        CHECK(r[iin] == doctest::Approx(s).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("eight-phase steady state and cold-start uniqueness")
{
    const auto spec = eight();
    const auto sched = interleaved_schedule(8, spec.duty, spec.fsw);
    const auto warm = run_to_steady_state(spec, sched);
    CHECK(warm.converged);
    CHECK(mean(warm.cycle.column("v_out")) == doctest::Approx(12.37).epsilon(0.01));
    SteadyOptions cold;
    cold.warm_start = false;
    const auto c = run_to_steady_state(spec, sched, cold);
    CHECK(c.converged);
    CHECK((c.state - warm.state).lpNorm<Eigen::Infinity>() / warm.state.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("already periodic state converges immediately")
{
    const auto spec = table1();
    const auto sched = interleaved_schedule(4, spec.duty, spec.fsw);
    const Netlist net = build_converter(spec);
    const auto first = run_to_steady_state(spec, sched);
    Simulator sim(net, spec.vin);
    sim.set_state(first.state);
    SteadyOptions opt;
    opt.shooting_iterations = 0;
    const auto again = run_to_steady_state(sim, sched, opt);
    CHECK(again.converged);
    CHECK(again.residual_history.size() == 1u);
}

TEST_CASE("zero duty decays to rest")
{
    auto spec = table1();
    spec.duty = 0.0;
    const Netlist net = build_converter(spec, true);
    Simulator sim(net, spec.vin);
    sim.set_state(analytic_state(net, spec.vin, 0.235, spec.load_ohms));
    const auto sched = interleaved_schedule(4, 0.0, spec.fsw);
    const Trace tr = simulate(sim, sched, 300 * sched.period);
    CHECK(std::abs(tr.column("v_out").back()) < 0.05);
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(tr.column("il_" + std::to_string(k)).back()) < 0.05);
}

TEST_CASE("integrators agree and linearity in v_in")
{
    const auto sched = interleaved_schedule(8, 0.2, 30e3);
    SimOptions exact;
    exact.integrator = Integrator::Exact;
    const auto a = run_to_steady_state(eight(400, 0.2), sched);
    const auto b = run_to_steady_state(eight(400, 0.2), sched, {}, exact);
    CHECK(mean(a.cycle.column("v_out")) == doctest::Approx(mean(b.cycle.column("v_out"))).epsilon(1e-4));
    const auto c = run_to_steady_state(eight(800, 0.2), sched);
    CHECK((c.state - 2.0 * a.state).lpNorm<Eigen::Infinity>() < 1e-5 * c.state.lpNorm<Eigen::Infinity>());
}

TEST_CASE("trace csv header")
{
    const auto spec = table1();
    const auto sched = interleaved_schedule(4, spec.duty, spec.fsw);
    SimOptions o;
    o.steps_per_cycle = 40;
    const Trace tr = simulate(build_converter(spec), sched, spec.vin, sched.period, o);
    std::ostringstream os;
    write_trace_csv(tr, os);
    const std::string head = os.str().substr(0, os.str().find('\n'));
    CHECK(head ==
          "t,il_1,il_2,il_3,il_4,il_o,vc_1,vc_2,vcb_1,vcb_2,vcb_3,vc_o,i_in,v_out,v_f,"
          "vs_1,vs_2,vs_3,vs_4,vd_1,vd_2,vd_3,vd_4,p_in,p_out");
    CHECK(format_number(0.1) == "0.1");
}
