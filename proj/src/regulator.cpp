#include "scb/regulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "scb/analysis.hpp"

namespace scb {

void SensingChain::validate(double max_vin) const
{
    if (!(divider_ratio > 0)) throw ConfigError("divider_ratio must be positive");
    if (!(full_scale > 0)) throw ConfigError("full_scale must be positive");
    if (adc_bits < 8 || adc_bits > 24) throw ConfigError("adc_bits must lie in [8, 24]");
    if (update_period < 1) throw ConfigError("update_period must be >= 1");
    if (max_vin > divider_ratio * full_scale)
        throw ConfigError("sensing range divider_ratio*full_scale = " + std::to_string(divider_ratio * full_scale) +
                          " V is below the maximum input " + std::to_string(max_vin) + " V");
}

double RegulatorConfig::resolved_duty_max(int phases, double gap_fraction) const
{
    return duty_max > 0 ? duty_max : duty_limit(phases) - std::max(gap_fraction, 0.01);
}

void RegulatorConfig::validate(int phases, double gap_fraction) const
{
    const double dmax = resolved_duty_max(phases, gap_fraction);
    if (!(vo_target > 0)) throw ConfigError("vo_target must be positive");
    if (!(duty_min > 0 && duty_min < dmax && dmax < duty_limit(phases)))
        throw ConfigError("regulator bounds must satisfy 0 < duty_min < duty_max < 2/N");
}

int quantize_sense(double vin_true, const SensingChain& chain, bool* saturated)
{
    const double pin = vin_true / chain.divider_ratio;
    const long code = std::lround(pin / chain.full_scale * chain.max_code());
    const bool sat = code < 0 || code > chain.max_code() || pin > chain.full_scale;
    if (saturated) *saturated = sat;
    return static_cast<int>(std::clamp<long>(code, 0, chain.max_code()));
}

double reconstruct_vin(int code, const SensingChain& chain)
{
    return static_cast<double>(code) / chain.max_code() * chain.full_scale * chain.divider_ratio;
}

double compute_duty(int phases, double vin_est, const RegulatorConfig& cfg, bool* flagged)
{
    const double dmax = cfg.resolved_duty_max(phases);
    double d = dmax;
    bool clamp = true;
    if (vin_est > cfg.vo_target) {
        d = phases * cfg.vo_target / (vin_est + cfg.vo_target);  // inverse gain law
        clamp = d > dmax || d < cfg.duty_min;
        d = std::clamp(d, cfg.duty_min, dmax);
    }
    if (flagged) *flagged = clamp;
    return d;
}

double VinProfile::at(double t) const
{
    if (points.empty()) throw std::logic_error("empty input-voltage profile");
    double v = points.front().second;
    for (const auto& [tp, vp] : points) {
        if (tp > t) break;
        v = vp;
    }
    return v;
}

double VinProfile::max() const
{
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.second);
    return m;
}

VinProfile read_profile_csv(std::istream& is)
{
    VinProfile p;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double t, v;
        if (!(ls >> t >> v)) {
            if (p.points.empty() && lineno == 1) continue;  // header row
            throw ConfigError("profile line " + std::to_string(lineno) + ": expected 't_seconds, vin_volts'");
        }
        if (!p.points.empty() && t < p.points.back().first)
            throw ConfigError("profile line " + std::to_string(lineno) + ": times must be ascending");
        if (v < 0) throw ConfigError("profile line " + std::to_string(lineno) + ": negative voltage");
        p.points.emplace_back(t, v);
    }
    if (p.points.empty()) throw ConfigError("profile contains no data rows");
    return p;
}

RegulationTrace run_closed_loop(const ConverterSpec& spec, const SensingChain& chain, const RegulatorConfig& cfg,
                                const VinProfile& profile, const ClosedLoopOptions& opt)
{
    chain.validate();
    cfg.validate(spec.phases);
    RegulationTrace rt;
    const int n = spec.phases;
    const double T = spec.period();

    // Start from the operating point implied by the first sensed value.
    const double vin0 = profile.at(0.0);
    const double d0 = compute_duty(n, reconstruct_vin(quantize_sense(vin0, chain), chain), cfg);
    ConverterSpec s0 = spec;
    s0.vin = vin0;
    s0.duty = d0;
    const Netlist net = build_converter(s0);
    Simulator sim(net, vin0, opt.sim);
    sim.set_state(analytic_state(net, vin0, d0, spec.load_ohms));

    RegulationSample cur;
    for (int c = 0; c < opt.cycles; ++c) {
        const double t = c * T;
        sim.set_time(t);
        cur.t = t;
        cur.vin_true = profile.at(t);
        if (c % chain.update_period == 0) {
            cur.code = quantize_sense(cur.vin_true, chain, &cur.saturated);
            cur.vin_est = reconstruct_vin(cur.code, chain);
            cur.duty = compute_duty(n, cur.vin_est, cfg, &cur.flagged);
            rt.saturation_events += cur.saturated;
            rt.clamp_events += cur.flagged;
        }
        sim.set_vin(cur.vin_true);
        Trace tr;
        sim.run_cycle(interleaved_schedule(n, cur.duty, spec.fsw), &tr);
        double acc = 0.0;
        const int vo = tr.col("v_out");
        for (std::size_t i = 1; i < tr.rows.size(); ++i)
            acc += 0.5 * (tr.rows[i][vo] + tr.rows[i - 1][vo]) * (tr.rows[i][0] - tr.rows[i - 1][0]);
        cur.vout_mean = acc / T;
        rt.updates.push_back(cur);
        if (opt.keep_trace) rt.trace.append(tr);
    }
    return rt;
}

void write_regulation_csv(const RegulationTrace& rt, std::ostream& os)
{
    os << "t,vin_true,code,vin_est,duty\n";
    for (const auto& u : rt.updates)
        os << format_number(u.t) << ',' << format_number(u.vin_true) << ',' << u.code << ','
           << format_number(u.vin_est) << ',' << format_number(u.duty) << '\n';
}

}  // namespace scb
