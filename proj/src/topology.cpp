#include "scb/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

#include "scb/network.hpp"

namespace scb {

const char* to_string(BranchKind k)
{
    switch (k) {
    case BranchKind::VoltageSource: return "voltage-source";
    case BranchKind::Capacitor: return "capacitor";
    case BranchKind::Inductor: return "inductor";
    case BranchKind::Switch: return "switch";
    case BranchKind::Diode: return "diode";
    case BranchKind::Resistor: return "resistor";
    }
    return "?";
}

int Netlist::node(const std::string& name) const
{
    auto it = std::find(nodes.begin(), nodes.end(), name);
    if (it == nodes.end()) throw std::out_of_range("unknown node " + name);
    return static_cast<int>(it - nodes.begin());
}

int Netlist::find(const std::string& role) const
{
    for (std::size_t i = 0; i < branches.size(); ++i)
        if (branches[i].role == role) return static_cast<int>(i);
    return -1;
}

const Branch& Netlist::at(const std::string& role) const
{
    const int i = find(role);
    if (i < 0) throw std::out_of_range("unknown role " + role);
    return branches[i];
}

int Netlist::count(BranchKind k) const
{
    return static_cast<int>(
        std::count_if(branches.begin(), branches.end(), [k](const Branch& b) { return b.kind == k; }));
}

std::vector<int> ladder_order(int phases)
{
    std::vector<int> order;
    for (int k = 1; k <= phases; k += 2) order.push_back(k);
    for (int k = 2; k <= phases; k += 2) order.push_back(k);
    return order;
}

int state_dimension(int phases) { return 2 * phases + 3; }
int state_dimension(const ConverterSpec& spec) { return state_dimension(spec.phases); }

Netlist build_converter(const ConverterSpec& spec, bool allow_invalid)
{
    spec.validate(allow_invalid);
    const int n = spec.phases;
    Netlist net;
    net.phases = n;
    net.losses = spec.losses;
    net.nodes = {"0", "X", "M", "F", "OUT"};
    for (int p = 1; p < n; ++p) net.nodes.push_back("T" + std::to_string(p));
    for (int p = 1; p <= n; ++p) net.nodes.push_back("P" + std::to_string(p));
    const int X = 1, M = 2, F = 3, OUT = 4;
    auto T = [&](int p) { return 4 + p; };          // ladder tap above position p
    auto P = [&](int p) { return 4 + (n - 1) + p; };  // phase node of position p

    auto add = [&](BranchKind k, std::string role, int a, int b, double v, int idx = 0) {
        net.branches.push_back({k, std::move(role), a, b, v, idx});
    };

    add(BranchKind::VoltageSource, "VIN", X, F, spec.vin);
    add(BranchKind::Capacitor, "C1", X, M, spec.c_in);
    add(BranchKind::Capacitor, "C2", M, 0, spec.c_in);

    const auto order = ladder_order(n);
    net.phase_at_position = order;
    net.position_of_phase.assign(n + 1, -1);
    for (int p = 1; p <= n; ++p) {
        const int k = order[p - 1];
        net.position_of_phase[k] = p - 1;
        const std::string ks = std::to_string(k);
        const int top = (p == 1) ? X : T(p - 1);
        const int below = (p < n) ? T(p) : P(p);
        add(BranchKind::Switch, "S_" + ks, top, below, spec.losses.r_switch_on, k);
        if (p < n) add(BranchKind::Capacitor, "CB_" + std::to_string(p), T(p), P(p), spec.c_block, p);
        add(BranchKind::Diode, "D_" + ks, 0, P(p), spec.losses.r_diode_on, k);
        add(BranchKind::Inductor, "L_" + ks, P(p), F, spec.l_phase, k);
    }
    net.position_of_phase.erase(net.position_of_phase.begin());  // 0-based phase index

    add(BranchKind::Inductor, "LO", F, OUT, spec.l_out);
    add(BranchKind::Capacitor, "CO", OUT, 0, spec.c_out);
    add(BranchKind::Resistor, "RLOAD", OUT, 0, spec.load_ohms);

    check_structure(net);
    return net;
}

void check_structure(const Netlist& net)
{
    const int n = net.phases;
    std::map<std::string, int> seen;
    for (const auto& b : net.branches) {
        if (b.a < 0 || b.b < 0 || b.a >= static_cast<int>(net.nodes.size()) ||
            b.b >= static_cast<int>(net.nodes.size()) || b.a == b.b)
            throw std::logic_error("branch " + b.role + " has invalid terminals");
        if (++seen[b.role] > 1) throw std::logic_error("duplicate role " + b.role);
    }
    std::vector<std::string> required = {"VIN", "C1", "C2", "LO", "CO", "RLOAD"};
    for (int k = 1; k <= n; ++k)
        for (const char* r : {"L_", "S_", "D_"}) required.push_back(r + std::to_string(k));
    for (int j = 1; j <= n - 1; ++j) required.push_back("CB_" + std::to_string(j));
    for (const auto& r : required)
        if (!seen.count(r)) throw std::logic_error("missing role " + r);
    if (seen.size() != required.size()) throw std::logic_error("unexpected extra roles in netlist");

    // Connectivity via union-find over nodes.
    std::vector<int> parent(net.nodes.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> root = [&](int v) { return parent[v] == v ? v : parent[v] = root(parent[v]); };
    for (const auto& b : net.branches) parent[root(b.a)] = root(b.b);
    for (std::size_t i = 0; i < parent.size(); ++i)
        if (root(static_cast<int>(i)) != root(0)) throw std::logic_error("netlist is not connected");
}

bool ContractReport::all_pass() const { return failures() == 0 && !rows.empty(); }

int ContractReport::failures() const
{
    return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const ContractRow& r) { return !r.pass; }));
}

ContractReport verify_mode_contract(const Netlist& net_in, const ConverterSpec& spec, const ContractOptions& opt)
{
    check_structure(net_in);
    // Ideal relations: drop parasitics, keep the off-device conditioning.
    Netlist net = net_in;
    net.losses.r_switch_on = 1e-6;
    net.losses.r_diode_on = 1e-6;
    net.losses.v_diode = 0.0;
    net.losses.r_inductor = 0.0;
    net.losses.r_cap = 0.0;
    const NetworkSolver solver(net);
    const StateLayout& L = solver.layout();
    const int n = net.phases;
    const double vin = spec.vin;
    const double s = vin / (n - spec.duty);
    const int f_node = net.node("F");
    const int vin_branch = net.find("VIN");

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    std::uniform_real_distribution<double> amps(0.2, 3.0);

    ContractReport rep;
    for (int active = 0; active <= n; ++active) {  // active == 0 means all switches off
        Conduction c;
        c.sw.assign(n, false);
        c.diode.assign(n, true);
        std::string cfg = "all off";
        if (active > 0) {
            c.sw[active - 1] = true;
            c.diode[active - 1] = false;
            cfg = "S" + std::to_string(active) + " on";
        }
        const ModeModel mm = solver.build(c);

        for (int trial = 0; trial < opt.trials; ++trial) {
            Eigen::VectorXd x(L.dim());
            double isum = 0.0;
            for (int k = 0; k <= n; ++k) isum += std::abs(x(k) = amps(rng));
            x(L.vc1()) = 0.5 * n * s * jitter(rng);
            x(L.vc2()) = 0.5 * n * s * jitter(rng);
            for (int j = 0; j < n - 1; ++j) x(L.vcb(j)) = (n - 1 - j) * s * jitter(rng);
            x(L.vco()) = vin * spec.duty / (n - spec.duty) * jitter(rng);
            Eigen::Vector2d u(vin, 0.0);
            const Eigen::VectorXd z = mm.Zx * x + mm.Zu * u;
            const double vf = solver.node_voltage(z, f_node);
            const double vtol = opt.rel_tol * vin;
            const double itol = opt.rel_tol * isum;
            const std::string tag = " #" + std::to_string(trial + 1);
            auto push = [&](std::string rel, double expected, double observed, double tol) {
                const double err = std::abs(expected - observed);
                rep.rows.push_back({cfg, std::move(rel) + tag, expected, observed, err, err <= tol});
            };

            for (int k = 1; k <= n; ++k) {
                const int br = net.find("L_" + std::to_string(k));
                const double vl = solver.inductor_voltage(z, x, br);
                if (k == active) {
                    const int p = net.position_of_phase[k - 1];
                    const double top = (p == 0) ? x(L.vc1()) + x(L.vc2()) : x(L.vcb(p - 1));
                    const double cap = (p < n - 1) ? x(L.vcb(p)) : 0.0;
                    push("active L_" + std::to_string(k), top - cap - vf, vl, vtol);
                } else {
                    push("freewheel L_" + std::to_string(k), -vf, vl, vtol);
                }
            }
            push("v_f identity", x(L.vc1()) + x(L.vc2()) - vin, vf, vtol);
            double kcl = -x(L.ilo());
            for (int k = 0; k < n; ++k) kcl += x(L.il(k));
            const double iin = -solver.branch_current(z, x, c, vin_branch, 0.0);
            push("input KCL", kcl, iin, itol);
        }
    }
    return rep;
}

}  // namespace scb
