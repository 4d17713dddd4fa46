// Closed-form averaged-model results and metric extraction from simulated traces.
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "scb/engine.hpp"
#include "scb/gates.hpp"
#include "scb/spec.hpp"

namespace scb {

// A computed duty falls outside 0 < D < 2/N.
class ValidityError : public std::runtime_error {
public:
    ValidityError(const std::string& what, double duty) : std::runtime_error(what), duty(duty) {}
    double duty;
};

// M = D / (N - D), exact for rational D.
Frac ideal_gain(int phases, const Frac& duty);
double ideal_gain(int phases, double duty);

// Inverse of ideal_gain: D = N M / (1 + M), M = vo / vin. Throws ValidityError if D >= 2/N.
Frac duty_for_target_exact(int phases, const Frac& vin, const Frac& vo);
double duty_for_target(int phases, double vin, double vo);

struct FormulaReport {
    int phases = 0;
    double vin = 0.0, duty = 0.0;
    double gain = 0.0;
    double vout = 0.0;
    double v_c1 = 0.0, v_c2 = 0.0;
    std::vector<double> v_cb;          // ladder positions 1..N-1
    double i_lo = 0.0;                 // output current (needs a load)
    double i_phase = 0.0;              // mean phase current
    double i_in = 0.0;                 // mean input current
    double v_s1 = 0.0;                 // blocking voltage of the first ladder switch
    double v_s_other = 0.0;            // peak blocking voltage of the remaining switches
    std::vector<std::string> notes;
};

// Ladder solution of the volt-second / charge balance: with s = vin/(N-D),
// V_C1 = V_C2 = (N/2) s, V_CB(p) = (N-p) s, I_phase = I_Lo/(N-D), I_in = I_Lo D/(N-D).
FormulaReport stress_formulas(int phases, double vin, double duty, double load_ohms = 0.0);

struct Verdict {
    bool valid = false;
    double formula_gain = 0.0;
    std::string message;
};

Verdict validity_check(int phases, double duty, double vin = 0.0);

struct Residuals {
    std::vector<double> inductor_volts;  // mean pure inductor voltage: L_1..L_N, LO
    std::vector<double> capacitor_amps;  // mean capacitor current: C1, C2, CB_1.., CO
};

// Mean inductor voltage L*di/T and mean capacitor current C*dv/T across the trace span.
Residuals vsb_charge_residuals(const Trace& tr, const ConverterSpec& spec);

struct SteadyReport {
    int phases = 0;
    double vout_mean = 0.0, vout_pp = 0.0;
    double ilo_mean = 0.0;
    std::vector<double> phase_mean, phase_ripple;
    double sharing_spread = 0.0;       // (max - min) / mean of phase means
    double iin_mean = 0.0, iin_min = 0.0;
    bool continuous = false;
    std::vector<double> peak_vs, peak_vd;
    double v_c1 = 0.0, v_c2 = 0.0, v_co = 0.0;
    std::vector<double> v_cb;
    double p_in = 0.0, p_out = 0.0, p_loss = 0.0;
    double efficiency = 0.0;
    double power_identity_error = 0.0; // |p_in - p_out - p_loss| / p_in
    Residuals residuals;
};

// Metrics over the final full cycle of the trace. Throws std::invalid_argument when
// the trace spans less than one period.
SteadyReport steady_metrics(const Trace& tr, const ConverterSpec& spec);

struct CrossRow {
    std::string name;
    double formula = 0.0;
    double simulated = 0.0;
    double rel_error = 0.0;
};

struct CrossCheck {
    FormulaReport formula;
    SteadyReport steady;
    std::vector<CrossRow> rows;
    int cycles = 0;
    double max_rel_error() const;
};

CrossCheck crosscheck(const ConverterSpec& spec, const GateSchedule& sched, const SimOptions& sim = {},
                      bool allow_invalid = false);
CrossCheck crosscheck(const ConverterSpec& spec, const SimOptions& sim = {}, bool allow_invalid = false);

void write_report_csv(const std::vector<CrossRow>& rows, std::ostream& os);
void print_formula_report(const FormulaReport& f, std::ostream& os);
void print_steady_report(const SteadyReport& r, std::ostream& os);

}  // namespace scb
