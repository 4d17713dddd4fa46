// Netlist construction for the N-phase series-capacitor buck family and the
// per-mode KVL/KCL contract checker.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scb/spec.hpp"

namespace scb {

enum class BranchKind { VoltageSource, Capacitor, Inductor, Switch, Diode, Resistor };

const char* to_string(BranchKind k);

// Branch voltage is v(a) - v(b); branch current flows a -> b through the element.
// Diodes have anode a, cathode b. Switches block v(a) - v(b) when off.
struct Branch {
    BranchKind kind;
    std::string role;   // VIN, C1, C2, CB_j, L_k, LO, CO, RLOAD, S_k, D_k
    int a = 0;
    int b = 0;
    double value = 0.0; // volts, farads, henries or ohms depending on kind
    int index = 0;      // 1-based label index for L/S/D/CB roles, 0 otherwise
};

struct Netlist {
    int phases = 0;
    std::vector<std::string> nodes;  // nodes[0] is ground
    std::vector<Branch> branches;
    LossParams losses;

    // Ladder position (0-based) of switch/phase k (1-based label), and the inverse.
    std::vector<int> position_of_phase;
    std::vector<int> phase_at_position;

    int node(const std::string& name) const;
    int find(const std::string& role) const;  // branch index or -1
    const Branch& at(const std::string& role) const;
    int count(BranchKind k) const;
};

// Order in which switches appear along the ladder: odd switches then even ones.
std::vector<int> ladder_order(int phases);

Netlist build_converter(const ConverterSpec& spec, bool allow_invalid = false);

// Dynamic states: N phase inductors + Lo + C1 + C2 + (N-1) blocking caps + Co.
int state_dimension(const ConverterSpec& spec);
int state_dimension(int phases);

// Structural checks: connectivity, role census, label uniqueness. Throws std::logic_error.
void check_structure(const Netlist& net);

struct ContractRow {
    std::string configuration;  // "S3 on" or "all off"
    std::string relation;       // relation identifier
    double expected = 0.0;
    double observed = 0.0;
    double abs_error = 0.0;
    bool pass = false;
};

struct ContractReport {
    std::vector<ContractRow> rows;
    bool all_pass() const;
    int failures() const;
};

struct ContractOptions {
    double rel_tol = 1e-6;
    int trials = 3;
    std::uint64_t seed = 12345;
};

// Checks every single-switch-on configuration (own diode off, all others on) and
// the all-off configuration against the ladder relations at randomized states.
ContractReport verify_mode_contract(const Netlist& net, const ConverterSpec& spec,
                                    const ContractOptions& opt = {});

}  // namespace scb
