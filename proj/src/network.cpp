#include "scb/network.hpp"

#include <algorithm>
#include <unsupported/Eigen/MatrixFunctions>

namespace scb {

namespace {

constexpr double kMinResistance = 1e-9;

}  // namespace

std::uint64_t Conduction::key() const
{
    std::uint64_t k = 0;
    const std::size_t n = sw.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (sw[i]) k |= std::uint64_t{1} << i;
        if (diode[i]) k |= std::uint64_t{1} << (n + i);
    }
    return k;
}

std::vector<std::string> StateLayout::names() const
{
    std::vector<std::string> out;
    for (int k = 1; k <= phases; ++k) out.push_back("il_" + std::to_string(k));
    out.push_back("il_o");
    out.push_back("vc_1");
    out.push_back("vc_2");
    for (int j = 1; j <= phases - 1; ++j) out.push_back("vcb_" + std::to_string(j));
    out.push_back("vc_o");
    return out;
}

StateLayout make_layout(const Netlist& net)
{
    StateLayout l;
    l.phases = net.phases;
    if (net.phases > 0) {
        for (int k = 1; k <= net.phases; ++k) l.branch_of_state.push_back(net.find("L_" + std::to_string(k)));
        l.branch_of_state.push_back(net.find("LO"));
        l.branch_of_state.push_back(net.find("C1"));
        l.branch_of_state.push_back(net.find("C2"));
        for (int j = 1; j <= net.phases - 1; ++j)
            l.branch_of_state.push_back(net.find("CB_" + std::to_string(j)));
        l.branch_of_state.push_back(net.find("CO"));
    } else {
        // Generic circuit: inductors then capacitors in branch order.
        for (auto kind : {BranchKind::Inductor, BranchKind::Capacitor})
            for (std::size_t i = 0; i < net.branches.size(); ++i)
                if (net.branches[i].kind == kind) l.branch_of_state.push_back(static_cast<int>(i));
    }
    l.state_of_branch.assign(net.branches.size(), -1);
    for (int s = 0; s < l.dim(); ++s) {
        if (l.branch_of_state[s] < 0) throw std::logic_error("netlist is missing a state-carrying role");
        l.state_of_branch[l.branch_of_state[s]] = s;
    }
    return l;
}

Propagator make_propagator(const ModeModel& m, double h, StepRule rule)
{
    const int nx = static_cast<int>(m.A.rows());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nx, nx);
    Propagator p;
    switch (rule) {
    case StepRule::Exact: {
        Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nx + 2, nx + 2);
        aug.topLeftCorner(nx, nx) = m.A * h;
        aug.topRightCorner(nx, 2) = m.B * h;
        const Eigen::MatrixXd e = aug.exp();
        p.P = e.topLeftCorner(nx, nx);
        p.Q = e.topRightCorner(nx, 2);
        break;
    }
    case StepRule::BackwardEuler: {
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - h * m.A);
        p.P = lu.solve(I);
        p.Q = lu.solve(h * m.B);
        break;
    }
    case StepRule::Trapezoidal: {
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - 0.5 * h * m.A);
        p.P = lu.solve(I + 0.5 * h * m.A);
        p.Q = lu.solve(h * m.B);
        break;
    }
    }
    return p;
}

NetworkSolver::NetworkSolver(const Netlist& net)
    : net_(net), layout_(make_layout(net)), n_nodes_(static_cast<int>(net.nodes.size()))
{
    vrow_of_branch_.assign(net_.branches.size(), -1);
    for (std::size_t i = 0; i < net_.branches.size(); ++i) {
        const auto k = net_.branches[i].kind;
        if (k == BranchKind::VoltageSource || k == BranchKind::Capacitor) {
            vrow_of_branch_[i] = n_nodes_ - 1 + static_cast<int>(vbranches_.size());
            vbranches_.push_back(static_cast<int>(i));
        }
    }
}

bool NetworkSolver::branch_on(const Branch& b, const Conduction& c) const
{
    if (b.kind == BranchKind::Switch) return c.sw.at(b.index - 1);
    if (b.kind == BranchKind::Diode) return c.diode.at(b.index - 1);
    return true;
}

double NetworkSolver::conductance(const Branch& b, const Conduction& c) const
{
    const LossParams& p = net_.losses;
    switch (b.kind) {
    case BranchKind::Switch:
        return branch_on(b, c) ? 1.0 / std::max(p.r_switch_on, kMinResistance) : 1.0 / p.r_off;
    case BranchKind::Diode:
        return branch_on(b, c) ? 1.0 / std::max(p.r_diode_on, kMinResistance) : 1.0 / p.r_off;
    case BranchKind::Resistor:
        return 1.0 / std::max(b.value, kMinResistance);
    default:
        return 0.0;
    }
}

ModeModel NetworkSolver::build(const Conduction& c) const
{
    const int m = unknowns();
    const int nx = layout_.dim();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd Rx = Eigen::MatrixXd::Zero(m, nx);
    Eigen::MatrixXd Ru = Eigen::MatrixXd::Zero(m, 2);
    auto row = [](int node) { return node - 1; };  // -1 for ground

    for (std::size_t i = 0; i < net_.branches.size(); ++i) {
        const Branch& b = net_.branches[i];
        const int ra = row(b.a), rb = row(b.b);
        switch (b.kind) {
        case BranchKind::Switch:
        case BranchKind::Diode:
        case BranchKind::Resistor: {
            const double g = conductance(b, c);
            if (ra >= 0) G(ra, ra) += g;
            if (rb >= 0) G(rb, rb) += g;
            if (ra >= 0 && rb >= 0) {
                G(ra, rb) -= g;
                G(rb, ra) -= g;
            }
            if (b.kind == BranchKind::Diode && branch_on(b, c)) {
                if (ra >= 0) Ru(ra, 1) += g;
                if (rb >= 0) Ru(rb, 1) -= g;
            }
            break;
        }
        case BranchKind::Inductor: {
            const int s = layout_.state_of_branch[i];
            if (ra >= 0) Rx(ra, s) -= 1.0;
            if (rb >= 0) Rx(rb, s) += 1.0;
            break;
        }
        case BranchKind::VoltageSource:
        case BranchKind::Capacitor: {
            const int j = vrow_of_branch_[i];
            if (ra >= 0) {
                G(ra, j) += 1.0;
                G(j, ra) += 1.0;
            }
            if (rb >= 0) {
                G(rb, j) -= 1.0;
                G(j, rb) -= 1.0;
            }
            if (b.kind == BranchKind::Capacitor) {
                G(j, j) -= net_.losses.r_cap;
                Rx(j, layout_.state_of_branch[i]) = 1.0;
            } else {
                Ru(j, 0) = 1.0;
            }
            break;
        }
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (!lu.isInvertible())
        throw StructuralError("network matrix is singular after conditioning");

    ModeModel mm;
    mm.Zx = lu.solve(Rx);
    mm.Zu = lu.solve(Ru);
    mm.A = Eigen::MatrixXd::Zero(nx, nx);
    mm.B = Eigen::MatrixXd::Zero(nx, 2);
    for (int s = 0; s < nx; ++s) {
        const Branch& b = net_.branches[layout_.branch_of_state[s]];
        if (b.kind == BranchKind::Capacitor) {
            const int j = vrow_of_branch_[layout_.branch_of_state[s]];
            mm.A.row(s) = mm.Zx.row(j) / b.value;
            mm.B.row(s) = mm.Zu.row(j) / b.value;
        } else {
            const int ra = row(b.a), rb = row(b.b);
            if (ra >= 0) {
                mm.A.row(s) += mm.Zx.row(ra);
                mm.B.row(s) += mm.Zu.row(ra);
            }
            if (rb >= 0) {
                mm.A.row(s) -= mm.Zx.row(rb);
                mm.B.row(s) -= mm.Zu.row(rb);
            }
            mm.A(s, s) -= net_.losses.r_inductor;
            mm.A.row(s) /= b.value;
            mm.B.row(s) /= b.value;
        }
    }
    return mm;
}

double NetworkSolver::node_voltage(const Eigen::VectorXd& z, int node) const
{
    return node == 0 ? 0.0 : z(node - 1);
}

double NetworkSolver::branch_voltage(const Eigen::VectorXd& z, int branch) const
{
    const Branch& b = net_.branches[branch];
    return node_voltage(z, b.a) - node_voltage(z, b.b);
}

double NetworkSolver::branch_current(const Eigen::VectorXd& z, const Eigen::VectorXd& x,
                                     const Conduction& c, int branch, double v_diode) const
{
    const Branch& b = net_.branches[branch];
    switch (b.kind) {
    case BranchKind::Inductor:
        return x(layout_.state_of_branch[branch]);
    case BranchKind::VoltageSource:
    case BranchKind::Capacitor:
        return z(vrow_of_branch_[branch]);
    case BranchKind::Diode: {
        const double v = branch_voltage(z, branch);
        return conductance(b, c) * (branch_on(b, c) ? v - v_diode : v);
    }
    default:
        return conductance(b, c) * branch_voltage(z, branch);
    }
}

double NetworkSolver::branch_power(const Eigen::VectorXd& z, const Eigen::VectorXd& x,
                                   const Conduction& c, int branch, double v_diode) const
{
    const Branch& b = net_.branches[branch];
    const double i = branch_current(z, x, c, branch, v_diode);
    switch (b.kind) {
    case BranchKind::Inductor:
        return net_.losses.r_inductor * i * i;
    case BranchKind::Capacitor:
        return net_.losses.r_cap * i * i;
    default:
        return branch_voltage(z, branch) * i;
    }
}

double NetworkSolver::inductor_voltage(const Eigen::VectorXd& z, const Eigen::VectorXd& x,
                                       int branch) const
{
    return branch_voltage(z, branch) -
           net_.losses.r_inductor * x(layout_.state_of_branch[branch]);
}

}  // namespace scb
