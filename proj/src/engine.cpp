#include "scb/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace scb {

// ---------------------------------------------------------------- trace

std::vector<std::string> trace_columns(int n)
{
    std::vector<std::string> c{"t"};
    for (int k = 1; k <= n; ++k) c.push_back("il_" + std::to_string(k));
    c.push_back("il_o");
    c.push_back("vc_1");
    c.push_back("vc_2");
    for (int j = 1; j <= n - 1; ++j) c.push_back("vcb_" + std::to_string(j));
    c.push_back("vc_o");
    c.push_back("i_in");
    c.push_back("v_out");
    c.push_back("v_f");
    for (int k = 1; k <= n; ++k) c.push_back("vs_" + std::to_string(k));
    for (int k = 1; k <= n; ++k) c.push_back("vd_" + std::to_string(k));
    c.push_back("p_in");
    c.push_back("p_out");
    return c;
}

int Trace::col(const std::string& name) const
{
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("unknown trace signal " + name);
    return static_cast<int>(it - columns.begin());
}

std::vector<double> Trace::column(const std::string& name) const
{
    const int c = col(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

void Trace::append(const Trace& o)
{
    if (rows.empty()) {
        *this = o;
        return;
    }
    // Drop the duplicated boundary sample when the spans are contiguous.
    const std::size_t skip = (!o.rows.empty() && o.rows.front()[0] == rows.back()[0]) ? 1 : 0;
    rows.insert(rows.end(), o.rows.begin() + static_cast<long>(skip), o.rows.end());
    p_loss.insert(p_loss.end(), o.p_loss.begin() + static_cast<long>(skip), o.p_loss.end());
    e_in += o.e_in;
    e_out += o.e_out;
    e_loss += o.e_loss;
    t_end = o.t_end;
}

std::string format_number(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_trace_csv(const Trace& tr, std::ostream& os)
{
    for (std::size_t i = 0; i < tr.columns.size(); ++i) os << (i ? "," : "") << tr.columns[i];
    os << '\n';
    for (const auto& r : tr.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
        os << '\n';
    }
}

// ---------------------------------------------------------------- warm start

Eigen::VectorXd analytic_state(const Netlist& net, double vin, double duty, double load_ohms)
{
    const StateLayout L = make_layout(net);
    const int n = net.phases;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(L.dim());
    const double s = vin / (n - duty);
    const double vo = vin * duty / (n - duty);
    const double ilo = vo / load_ohms;
    for (int k = 0; k < n; ++k) x(L.il(k)) = ilo / (n - duty);
    x(L.ilo()) = ilo;
    x(L.vc1()) = x(L.vc2()) = 0.5 * n * s;
    for (int j = 0; j < n - 1; ++j) x(L.vcb(j)) = (n - 1 - j) * s;
    x(L.vco()) = vo;
    return x;
}

// ---------------------------------------------------------------- simulator

Simulator::Simulator(const Netlist& net, double vin, const SimOptions& opt)
    : solver_(net), opt_(opt), vin_(vin)
{
    if (opt_.steps_per_cycle < 1) throw std::invalid_argument("steps_per_cycle must be >= 1");
    const int n = net.phases;
    r_load_ = net.at("RLOAD").value;
    tol_v_ = opt.tol_v > 0 ? opt.tol_v : 1e-6 * vin;
    tol_i_ = opt.tol_i > 0 ? opt.tol_i : 1e-6 * std::max(1.0, vin / (n * r_load_));
    x_ = Eigen::VectorXd::Zero(solver_.layout().dim());
    cond_.sw.assign(n, false);
    cond_.diode.assign(n, true);
    f_node_ = net.node("F");
    out_node_ = net.node("OUT");
    vin_branch_ = net.find("VIN");
    for (int k = 1; k <= n; ++k) {
        sw_branch_.push_back(net.find("S_" + std::to_string(k)));
        d_branch_.push_back(net.find("D_" + std::to_string(k)));
    }
}

void Simulator::set_state(const Eigen::VectorXd& x)
{
    if (x.size() != solver_.layout().dim()) throw std::invalid_argument("state dimension mismatch");
    x_ = x;
}

const ModeModel& Simulator::mode(const Conduction& c) const
{
    const auto key = c.key();
    auto it = modes_.find(key);
    if (it == modes_.end()) it = modes_.emplace(key, solver_.build(c)).first;
    return it->second;
}

Eigen::VectorXd Simulator::solve(const Eigen::VectorXd& x, const Conduction& c) const
{
    const ModeModel& m = mode(c);
    return m.Zx * x + m.Zu * Eigen::Vector2d(vin_, netlist().losses.v_diode);
}

Conduction Simulator::resolve_conduction(const Eigen::VectorXd& x, const std::vector<bool>& sw,
                                         const std::vector<bool>& guess) const
{
    const int n = netlist().phases;
    const double vd = netlist().losses.v_diode;
    Conduction c{sw, guess};
    std::vector<int> flipped;
    for (int iter = 0; iter <= 4 * n; ++iter) {
        const Eigen::VectorXd z = solve(x, c);
        int flip = -1;
        for (int k = 0; k < n && flip < 0; ++k) {
            const int br = d_branch_[k];
            if (c.diode[k]) {
                if (solver_.branch_current(z, x, c, br, vd) < -tol_i_) flip = k;
            } else if (solver_.branch_voltage(z, br) - vd > tol_v_) {
                flip = k;
            }
        }
        if (flip < 0) return c;
        c.diode[flip] = !c.diode[flip];
        flipped.push_back(flip + 1);
    }
    std::ostringstream os;
    os << "conduction resolution did not reach a fixed point at t=" << t_ << " s; flipping diodes:";
    for (int k : flipped) os << " D" << k;
    throw ConvergenceError(os.str());
}

const Propagator& Simulator::propagator(const Conduction& c, double h, bool be) const
{
    const StepRule rule = be ? StepRule::BackwardEuler
                             : (opt_.integrator == Integrator::Exact ? StepRule::Exact : StepRule::Trapezoidal);
    const auto key = std::make_tuple(c.key(), static_cast<int>(rule), h);
    auto it = props_.find(key);
    if (it == props_.end()) it = props_.emplace(key, make_propagator(mode(c), h, rule)).first;
    return it->second;
}

const std::vector<Frac>& Simulator::step_points(const GateSchedule& sched) const
{
    const auto edges = sched.edges();
    auto it = points_cache_.find(edges);
    if (it != points_cache_.end()) return it->second;
    std::vector<Frac> pts = edges;
    const int S = opt_.steps_per_cycle;
    for (int k = 0; k <= S; ++k) pts.emplace_back(k, S);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return points_cache_.emplace(edges, std::move(pts)).first->second;
}

std::vector<double> Simulator::sample_row(double t, const Eigen::VectorXd& x, const Conduction& c,
                                          const Eigen::VectorXd& z, double* p_in, double* p_out,
                                          double* p_loss) const
{
    const int n = netlist().phases;
    const double vd = netlist().losses.v_diode;
    std::vector<double> r;
    r.reserve(3 * n + 12 + x.size());
    r.push_back(t);
    for (int i = 0; i < x.size(); ++i) r.push_back(x(i));
    const double iin = -solver_.branch_current(z, x, c, vin_branch_, vd);
    const double vout = solver_.node_voltage(z, out_node_);
    r.push_back(iin);
    r.push_back(vout);
    r.push_back(solver_.node_voltage(z, f_node_));
    for (int k = 0; k < n; ++k) r.push_back(solver_.branch_voltage(z, sw_branch_[k]));
    for (int k = 0; k < n; ++k) r.push_back(-solver_.branch_voltage(z, d_branch_[k]));
    *p_in = vin_ * iin;
    *p_out = vout * vout / r_load_;
    double loss = 0.0;
    const auto& br = netlist().branches;
    for (std::size_t i = 0; i < br.size(); ++i) {
        if (br[i].kind == BranchKind::VoltageSource || br[i].role == "RLOAD") continue;
        loss += solver_.branch_power(z, x, c, static_cast<int>(i), vd);
    }
    *p_loss = loss;
    r.push_back(*p_in);
    r.push_back(*p_out);
    return r;
}

void Simulator::run_cycle(const GateSchedule& sched, Trace* rec, Eigen::MatrixXd* phi,
                          Eigen::VectorXd* gamma)
{
    const int n = netlist().phases;
    if (sched.phases() != n) throw std::invalid_argument("schedule phase count does not match netlist");
    const std::vector<Frac>& pts = step_points(sched);
    const auto edges = sched.edges();
    const double T = sched.period;
    const double t0 = t_;
    const Eigen::Vector2d u(vin_, netlist().losses.v_diode);

    if (rec && rec->rows.empty()) {
        rec->phases = n;
        rec->columns = trace_columns(n);
        rec->t_begin = t0;
        const Conduction c = resolve_conduction(x_, sched.states_after(Frac(0)), cond_.diode);
        double a, b, l;
        rec->rows.push_back(sample_row(t0, x_, c, solve(x_, c), &a, &b, &l));
        rec->p_loss.push_back(l);
    }

    if (phi) {
        *phi = Eigen::MatrixXd::Identity(x_.size(), x_.size());
        *gamma = Eigen::VectorXd::Zero(x_.size());
    }
    std::size_t edge_i = 0;
    std::vector<bool> sw = sched.states_after(Frac(0));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        while (edge_i < edges.size() && edges[edge_i] <= pts[i]) {
            sw = sched.states_after(edges[edge_i]);
            ++edge_i;
        }
        const double h = to_double(pts[i + 1] - pts[i]) * T;
        const Conduction c = resolve_conduction(x_, sw, cond_.diode);
        const bool changed = first_step_ || !(c == cond_);
        cond_ = c;
        first_step_ = false;
        const bool be = changed && opt_.integrator == Integrator::Trapezoidal;
        const Propagator& p = propagator(c, h, be);

        double pi0 = 0, po0 = 0, pl0 = 0;
        if (rec) sample_row(t_, x_, c, solve(x_, c), &pi0, &po0, &pl0);
        x_ = p.P * x_ + p.Q * u;
        if (phi) {
            *phi = p.P * *phi;
            *gamma = p.P * *gamma + p.Q * u;
        }
        t_ = t0 + to_double(pts[i + 1]) * T;
        if (rec) {
            double pi1, po1, pl1;
            rec->rows.push_back(sample_row(t_, x_, c, solve(x_, c), &pi1, &po1, &pl1));
            rec->p_loss.push_back(pl1);
            rec->e_in += 0.5 * h * (pi0 + pi1);
            rec->e_out += 0.5 * h * (po0 + po1);
            rec->e_loss += 0.5 * h * (pl0 + pl1);
        }
    }
    t_ = t0 + T;
    if (rec) rec->t_end = t_;
    if (!x_.allFinite()) throw ConvergenceError("state became non-finite at t=" + std::to_string(t_));
}

// ---------------------------------------------------------------- drivers

Trace simulate(Simulator& sim, const GateSchedule& sched, double t_end, int record_cycles)
{
    if (!(t_end > 0)) throw std::invalid_argument("t_end must be positive");
    const int cycles = std::max(1, static_cast<int>(std::ceil(t_end / sched.period - 1e-9)));
    Trace tr;
    for (int c = 0; c < cycles; ++c) {
        const bool rec = record_cycles <= 0 || c >= cycles - record_cycles;
        sim.run_cycle(sched, rec ? &tr : nullptr);
    }
    return tr;
}

Trace simulate(const Netlist& net, const GateSchedule& sched, double vin, double t_end,
               const SimOptions& opt, int record_cycles)
{
    Simulator sim(net, vin, opt);
    return simulate(sim, sched, t_end, record_cycles);
}

SteadyResult run_to_steady_state(Simulator& sim, const GateSchedule& sched, const SteadyOptions& opt)
{
    if (!(opt.tol > 0)) throw std::invalid_argument("tol must be positive");
    SteadyResult res;
    const auto rel_change = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (a - b).lpNorm<Eigen::Infinity>() / std::max(a.lpNorm<Eigen::Infinity>(), 1e-12);
    };
    // The cycle map is affine for a fixed conduction sequence, so its fixed point is
    // solved directly; the minimum-norm correction leaves conserved modes untouched.
    for (int it = 0; it < opt.shooting_iterations && res.cycles < opt.max_cycles; ++it) {
        const Eigen::VectorXd x0 = sim.state();
        Eigen::MatrixXd phi;
        Eigen::VectorXd gamma;
        sim.run_cycle(sched, nullptr, &phi, &gamma);
        ++res.cycles;
        const Eigen::VectorXd x1 = sim.state();
        const double change = rel_change(x1, x0);
        res.residual_history.push_back(change);
        if (change < opt.tol) break;
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(phi.rows(), phi.cols());
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
        cod.setThreshold(1e-9);
        cod.compute(I - phi);
        const Eigen::VectorXd delta = cod.solve(x1 - x0);
        if (!delta.allFinite()) break;
        sim.set_state(x0 + delta);
        ++res.shooting_steps;
    }
    Eigen::VectorXd prev = sim.state();
    while (res.cycles < opt.max_cycles) {
        sim.run_cycle(sched);
        ++res.cycles;
        const Eigen::VectorXd& x = sim.state();
        const double change = rel_change(x, prev);
        res.residual_history.push_back(change);
        prev = x;
        if (change < opt.tol) {
            res.converged = true;
            break;
        }
    }
    // Record one further cycle as the reported steady cycle.
    sim.run_cycle(sched, &res.cycle);
    ++res.cycles;
    res.state = sim.state();
    if (!res.converged && opt.throw_on_failure) {
        std::ostringstream os;
        os << "steady state not reached after " << res.cycles << " cycles; last relative changes:";
        const auto& h = res.residual_history;
        for (std::size_t i = h.size() > 5 ? h.size() - 5 : 0; i < h.size(); ++i) os << ' ' << h[i];
        throw ConvergenceError(os.str());
    }
    return res;
}

SteadyResult run_to_steady_state(const ConverterSpec& spec, const GateSchedule& sched,
                                 const SteadyOptions& opt, const SimOptions& sim_opt, bool allow_invalid)
{
    const Netlist net = build_converter(spec, allow_invalid);
    Simulator sim(net, spec.vin, sim_opt);
    if (opt.warm_start) sim.set_state(analytic_state(net, spec.vin, spec.duty, spec.load_ohms));
    return run_to_steady_state(sim, sched, opt);
}

}  // namespace scb
