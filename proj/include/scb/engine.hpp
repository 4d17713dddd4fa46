// Transient simulation of a converter netlist under a gate schedule.
#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "scb/gates.hpp"
#include "scb/network.hpp"
#include "scb/spec.hpp"
#include "scb/topology.hpp"

namespace scb {

// Conduction resolution or steady-state iteration failed (CLI exit code 2).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Integrator {
    Trapezoidal,  // trapezoidal rule, one backward-Euler step after each conduction change
    Exact,        // matrix-exponential propagator of each linear mode
};

struct SimOptions {
    int steps_per_cycle = 4000;
    Integrator integrator = Integrator::Trapezoidal;
    double tol_i = -1.0;  // diode current tolerance (A); < 0 selects 1e-6 * rated current
    double tol_v = -1.0;  // diode voltage tolerance (V); < 0 selects 1e-6 * v_in
};

// Sampled waveforms. Columns follow the documented CSV header.
struct Trace {
    int phases = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<double> p_loss;  // total modeled dissipation per sample (W)
    // Energy integrals over the recorded span (J), integrated per step.
    double e_in = 0.0, e_out = 0.0, e_loss = 0.0;
    double t_begin = 0.0, t_end = 0.0;

    int col(const std::string& name) const;  // throws std::out_of_range
    std::vector<double> column(const std::string& name) const;
    std::size_t size() const { return rows.size(); }
    void append(const Trace& other);  // concatenates samples and energies
};

std::vector<std::string> trace_columns(int phases);
void write_trace_csv(const Trace& tr, std::ostream& os);
// Shortest round-trip decimal representation, locale independent.
std::string format_number(double v);

// Analytic operating point: capacitor voltages from the ladder solution, v_Co at the
// ideal output, phase currents I_Lo/(N-D), i_Lo = V_o/R.
Eigen::VectorXd analytic_state(const Netlist& net, double vin, double duty, double load_ohms);

class Simulator {
public:
    Simulator(const Netlist& net, double vin, const SimOptions& opt = {});

    const Netlist& netlist() const { return solver_.netlist(); }
    const StateLayout& layout() const { return solver_.layout(); }
    const Eigen::VectorXd& state() const { return x_; }
    void set_state(const Eigen::VectorXd& x);
    double time() const { return t_; }
    void set_time(double t) { t_ = t; }
    double vin() const { return vin_; }
    void set_vin(double v) { vin_ = v; }
    const Conduction& conduction() const { return cond_; }
    int steps_per_cycle() const { return opt_.steps_per_cycle; }

    // Advances exactly one switching period of `sched` (t is taken as a cycle start).
    // When `rec` is non-null, samples (including the cycle-start sample if rec is empty)
    // and energy integrals are appended.
    // When `phi`/`gamma` are non-null the affine cycle map x(T) = phi x(0) + gamma of the
    // conduction sequence actually taken is accumulated alongside.
    void run_cycle(const GateSchedule& sched, Trace* rec = nullptr, Eigen::MatrixXd* phi = nullptr,
                   Eigen::VectorXd* gamma = nullptr);

    // Ideal-diode fixed point for the given switch states starting from `guess`.
    Conduction resolve_conduction(const Eigen::VectorXd& x, const std::vector<bool>& sw,
                                  const std::vector<bool>& guess) const;

    const ModeModel& mode(const Conduction& c) const;
    // Solved network unknowns for state x under conduction c.
    Eigen::VectorXd solve(const Eigen::VectorXd& x, const Conduction& c) const;

    std::size_t cached_modes() const { return modes_.size(); }

private:
    const Propagator& propagator(const Conduction& c, double h, bool backward_euler) const;
    const std::vector<Frac>& step_points(const GateSchedule& sched) const;
    std::vector<double> sample_row(double t, const Eigen::VectorXd& x, const Conduction& c,
                                   const Eigen::VectorXd& z, double* p_in, double* p_out,
                                   double* p_loss) const;

    NetworkSolver solver_;
    SimOptions opt_;
    double vin_;
    double tol_i_, tol_v_;
    Eigen::VectorXd x_;
    double t_ = 0.0;
    Conduction cond_;
    bool first_step_ = true;
    int f_node_, out_node_, vin_branch_;
    double r_load_;
    std::vector<int> sw_branch_, d_branch_;

    mutable std::unordered_map<std::uint64_t, ModeModel> modes_;
    mutable std::map<std::tuple<std::uint64_t, int, double>, Propagator> props_;
    mutable std::map<std::vector<Frac>, std::vector<Frac>> points_cache_;
};

// Integrates from the simulator's current state for t_end seconds; records the final
// `record_cycles` cycles (all cycles when <= 0).
Trace simulate(Simulator& sim, const GateSchedule& sched, double t_end, int record_cycles = 1);
Trace simulate(const Netlist& net, const GateSchedule& sched, double vin, double t_end,
               const SimOptions& opt = {}, int record_cycles = 1);

struct SteadyOptions {
    double tol = 1e-6;
    int max_cycles = 50000;
    bool warm_start = true;
    bool throw_on_failure = true;
    // Newton-shooting refinement on the affine cycle map before plain cycle iteration.
    int shooting_iterations = 20;
};

struct SteadyResult {
    Trace cycle;                          // final full cycle
    int cycles = 0;                       // cycles integrated
    bool converged = false;
    std::vector<double> residual_history; // relative change per cycle
    int shooting_steps = 0;               // shooting refinements applied
    Eigen::VectorXd state;                // state at the end of the final cycle
};

// Iterates whole cycles until the max-norm relative change at cycle boundaries < tol.
SteadyResult run_to_steady_state(Simulator& sim, const GateSchedule& sched, const SteadyOptions& opt = {});
SteadyResult run_to_steady_state(const ConverterSpec& spec, const GateSchedule& sched,
                                 const SteadyOptions& opt = {}, const SimOptions& sim_opt = {},
                                 bool allow_invalid = false);

}  // namespace scb
