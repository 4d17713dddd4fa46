// Converter parameters shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace scb {

// Raised for invalid user-supplied parameters (maps to CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LossParams {
    double r_switch_on = 1e-3;  // ohms
    double v_diode = 0.0;       // volts, forward drop while conducting
    double r_diode_on = 1e-3;   // ohms
    double r_inductor = 0.0;    // ohms, series with every inductor
    double r_cap = 0.0;         // ohms, series with every capacitor
    double r_off = 1e7;         // ohms, off-device conditioning resistance

    static LossParams ideal() { return {}; }
    void validate() const;
};

struct ConverterSpec {
    int phases = 4;
    double vin = 400.0;
    double fsw = 30e3;
    double duty = 0.235;
    double l_phase = 330e-6;
    double l_out = 10e-6;
    double c_in = 100e-6;
    double c_block = 10e-6;
    double c_out = 470e-6;
    double load_ohms = 1.152;
    LossParams losses;

    double period() const { return 1.0 / fsw; }

    // Throws ConfigError on any violated invariant. The duty bound 0 < D < 2/N
    // is skipped when allow_invalid is set (D must still lie in [0, 1)).
    void validate(bool allow_invalid = false) const;
};

// Upper duty bound 2/N for which the gain law holds.
double duty_limit(int phases);

}  // namespace scb
