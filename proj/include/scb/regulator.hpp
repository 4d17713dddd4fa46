// Feed-forward duty regulation from a quantized input-voltage measurement.
#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "scb/engine.hpp"
#include "scb/spec.hpp"

namespace scb {

struct SensingChain {
    double divider_ratio = 101.0;
    int adc_bits = 12;
    double full_scale = 5.0;  // volts at the measurement pin
    int update_period = 1;    // switching cycles per duty update

    int max_code() const { return (1 << adc_bits) - 1; }
    double lsb_volts() const { return divider_ratio * full_scale / max_code(); }
    // Throws ConfigError; max_vin > 0 additionally checks the sensing range.
    void validate(double max_vin = 0.0) const;
};

struct RegulatorConfig {
    double vo_target = 12.0;
    double duty_min = 0.01;
    double duty_max = -1.0;  // < 0 selects 2/N - max(gap, 0.01)

    double resolved_duty_max(int phases, double gap_fraction = 0.0) const;
    void validate(int phases, double gap_fraction = 0.0) const;
};

// round(vin / divider / full_scale * (2^bits - 1)), clamped to [0, 2^bits - 1].
int quantize_sense(double vin_true, const SensingChain& chain, bool* saturated = nullptr);
double reconstruct_vin(int code, const SensingChain& chain);
// duty_for_target clamped to [duty_min, duty_max]; `flagged` is set when clamped.
double compute_duty(int phases, double vin_est, const RegulatorConfig& cfg, bool* flagged = nullptr);

// Piecewise-constant input profile; the value at t is that of the last point with time <= t.
struct VinProfile {
    std::vector<std::pair<double, double>> points;  // (t_seconds, vin_volts), ascending t
    double at(double t) const;
    double max() const;
};

VinProfile read_profile_csv(std::istream& is);

struct RegulationSample {
    double t = 0.0;
    double vin_true = 0.0;
    int code = 0;
    double vin_est = 0.0;
    double duty = 0.0;
    bool flagged = false;    // duty clamped
    bool saturated = false;  // ADC overrange
    double vout_mean = 0.0;  // mean output over the cycle that follows
};

struct RegulationTrace {
    std::vector<RegulationSample> updates;  // one entry per switching cycle
    Trace trace;                            // engine samples when requested
    int saturation_events = 0;
    int clamp_events = 0;
};

struct ClosedLoopOptions {
    int cycles = 200;
    bool keep_trace = false;
    SimOptions sim;
};

RegulationTrace run_closed_loop(const ConverterSpec& spec, const SensingChain& chain, const RegulatorConfig& cfg,
                                const VinProfile& profile, const ClosedLoopOptions& opt = {});

void write_regulation_csv(const RegulationTrace& rt, std::ostream& os);

}  // namespace scb
