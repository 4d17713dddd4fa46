// Resistive-companion network solve for one fixed conduction configuration.
//
// Capacitors (with series resistance) and the input source enter as voltage-type
// branches, inductors as current sources. The solution is linear in the state
// vector x and the input vector u = [v_in, v_diode], so each configuration is
// reduced once to z = Zx x + Zu u and dx/dt = A x + B u.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "scb/topology.hpp"

namespace scb {

// Raised when a configuration yields a singular system after conditioning.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Switch and diode on/off vectors, indexed by 0-based phase label.
struct Conduction {
    std::vector<bool> sw;
    std::vector<bool> diode;

    std::uint64_t key() const;
    bool operator==(const Conduction&) const = default;
};

// State vector layout: [i_L1..i_LN, i_Lo, v_C1, v_C2, v_CB1..v_CB(N-1), v_Co].
// A netlist with phases == 0 is treated as a generic circuit: inductors then capacitors.
struct StateLayout {
    int phases = 0;
    std::vector<int> branch_of_state;  // branch index for each state
    std::vector<int> state_of_branch;  // -1 for non-state branches

    int dim() const { return static_cast<int>(branch_of_state.size()); }
    int il(int k) const { return k; }  // 0-based phase
    int ilo() const { return phases; }
    int vc1() const { return phases + 1; }
    int vc2() const { return phases + 2; }
    int vcb(int j) const { return phases + 3 + j; }  // 0-based ladder position
    int vco() const { return 2 * phases + 2; }
    std::vector<std::string> names() const;  // il_1.., il_o, vc_1, vc_2, vcb_1.., vc_o
};

StateLayout make_layout(const Netlist& net);

struct ModeModel {
    Eigen::MatrixXd Zx, Zu;  // unknowns (node voltages then vsource currents)
    Eigen::MatrixXd A, B;    // state derivative
};

enum class StepRule { Trapezoidal, BackwardEuler, Exact };

// One-step affine update x(t+h) = P x(t) + Q u for a fixed configuration.
struct Propagator {
    Eigen::MatrixXd P, Q;
};

Propagator make_propagator(const ModeModel& m, double h, StepRule rule);

class NetworkSolver {
public:
    explicit NetworkSolver(const Netlist& net);

    const Netlist& netlist() const { return net_; }
    const StateLayout& layout() const { return layout_; }
    int unknowns() const { return n_nodes_ - 1 + static_cast<int>(vbranches_.size()); }

    ModeModel build(const Conduction& c) const;

    // Helpers evaluated on a solved unknown vector z.
    double node_voltage(const Eigen::VectorXd& z, int node) const;
    double branch_voltage(const Eigen::VectorXd& z, int branch) const;
    double branch_current(const Eigen::VectorXd& z, const Eigen::VectorXd& x, const Conduction& c,
                          int branch, double v_diode) const;
    // Power absorbed by a branch (source power is negative when delivering).
    double branch_power(const Eigen::VectorXd& z, const Eigen::VectorXd& x, const Conduction& c,
                        int branch, double v_diode) const;
    // Pure inductive voltage L di/dt of an inductor branch (excludes series resistance).
    double inductor_voltage(const Eigen::VectorXd& z, const Eigen::VectorXd& x, int branch) const;

    double conductance(const Branch& b, const Conduction& c) const;
    bool branch_on(const Branch& b, const Conduction& c) const;

private:
    Netlist net_;
    StateLayout layout_;
    int n_nodes_ = 0;
    std::vector<int> vbranches_;    // VIN and capacitor branches
    std::vector<int> vrow_of_branch_;
};

}  // namespace scb
