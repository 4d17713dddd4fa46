#include "scb/spec.hpp"

#include <cmath>

namespace scb {

namespace {

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(std::string(name) + " must be a positive finite number");
}

void require_non_negative(double v, const char* name)
{
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError(std::string(name) + " must be >= 0");
}

}  // namespace

double duty_limit(int phases) { return 2.0 / phases; }

void LossParams::validate() const
{
    require_non_negative(r_switch_on, "r_switch_on");
    require_non_negative(v_diode, "v_diode");
    require_non_negative(r_diode_on, "r_diode_on");
    require_non_negative(r_inductor, "r_inductor");
    require_non_negative(r_cap, "r_cap");
    require_positive(r_off, "r_off");
}

void ConverterSpec::validate(bool allow_invalid) const
{
    if (phases < 4 || phases % 2 != 0)
        throw ConfigError("phases must be even >= 4");
    require_positive(vin, "vin");
    require_positive(fsw, "fsw");
    require_positive(l_phase, "l_phase");
    require_positive(l_out, "l_out");
    require_positive(c_in, "c_in");
    require_positive(c_block, "c_block");
    require_positive(c_out, "c_out");
    require_positive(load_ohms, "load_ohms");
    losses.validate();
    if (!(duty >= 0.0 && duty < 1.0))
        throw ConfigError("duty must lie in [0, 1)");
    if (!allow_invalid && !(duty > 0.0 && duty < duty_limit(phases)))
        throw ConfigError("duty must satisfy 0 < duty < 2/phases (got " + std::to_string(duty) +
                          "); pass --allow-invalid to override");
}

}  // namespace scb
