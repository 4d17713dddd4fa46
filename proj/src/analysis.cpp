#include "scb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace scb {

Frac ideal_gain(int phases, const Frac& duty) { return duty / (Frac(phases) - duty); }

double ideal_gain(int phases, double duty) { return duty / (phases - duty); }

Frac duty_for_target_exact(int phases, const Frac& vin, const Frac& vo)
{
    if (!(vo > Frac(0) && vo < vin)) throw std::invalid_argument("duty_for_target requires 0 < vo < vin");
    const Frac m = vo / vin;
    const Frac d = Frac(phases) * m / (Frac(1) + m);
    if (d >= Frac(2, phases))
        throw ValidityError("required duty " + std::to_string(to_double(d)) + " is not below 2/N", to_double(d));
    return d;
}

double duty_for_target(int phases, double vin, double vo)
{
    if (!(vo > 0.0 && vo < vin)) throw std::invalid_argument("duty_for_target requires 0 < vo < vin");
    const double d = phases * vo / (vin + vo);
    if (d >= duty_limit(phases))
        throw ValidityError("required duty " + std::to_string(d) + " is not below 2/N", d);
    return d;
}

FormulaReport stress_formulas(int phases, double vin, double duty, double load_ohms)
{
    FormulaReport f;
    f.phases = phases;
    f.vin = vin;
    f.duty = duty;
    f.gain = ideal_gain(phases, duty);
    f.vout = f.gain * vin;
    const double s = vin / (phases - duty);
    f.v_c1 = f.v_c2 = 0.5 * phases * s;
    for (int p = 1; p <= phases - 1; ++p) f.v_cb.push_back((phases - p) * s);
    if (load_ohms > 0.0) {
        f.i_lo = f.vout / load_ohms;
        f.i_phase = f.i_lo / (phases - duty);
        f.i_in = f.i_lo * duty / (phases - duty);
    }
    f.v_s1 = s;
    f.v_s_other = 2.0 * s;
    if (!validity_check(phases, duty).valid) f.notes.push_back("duty outside 0 < D < 2/N: the gain law does not apply");
    return f;
}

Verdict validity_check(int phases, double duty, double vin)
{
    Verdict v;
    v.formula_gain = ideal_gain(phases, duty);
    v.valid = duty > 0.0 && duty < duty_limit(phases);
    std::ostringstream os;
    if (v.valid) {
        os << "valid: D=" << duty << " < 2/N=" << duty_limit(phases);
    } else {
        os << "invalid: D=" << duty << " outside (0, 2/N=" << duty_limit(phases) << "); formula predicts gain "
           << v.formula_gain;
        if (vin > 0) os << " (" << v.formula_gain * vin << " V at " << vin << " V input)";
        os << " but simulation will diverge from it";
    }
    v.message = os.str();
    return v;
}

namespace {

// Trapezoidal time average of column c over rows [first, rows.size()).
double time_mean(const Trace& tr, int c, std::size_t first)
{
    double acc = 0.0;
    const int t = 0;
    for (std::size_t i = first + 1; i < tr.rows.size(); ++i)
        acc += 0.5 * (tr.rows[i][c] + tr.rows[i - 1][c]) * (tr.rows[i][t] - tr.rows[i - 1][t]);
    return acc / (tr.rows.back()[t] - tr.rows[first][t]);
}

std::size_t last_cycle_start(const Trace& tr, double period)
{
    if (tr.rows.size() < 2 || tr.rows.back()[0] - tr.rows.front()[0] < period * (1 - 1e-9))
        throw std::invalid_argument("trace is shorter than one switching period");
    const double t0 = tr.rows.back()[0] - period;
    std::size_t i = tr.rows.size() - 1;
    while (i > 0 && tr.rows[i - 1][0] >= t0 - 1e-12 * period) --i;
    return i;
}

}  // namespace

Residuals vsb_charge_residuals(const Trace& tr, const ConverterSpec& spec)
{
    const int n = spec.phases;
    const auto& a = tr.rows.front();
    const auto& b = tr.rows.back();
    const double span = b[0] - a[0];
    if (!(span > 0)) throw std::invalid_argument("trace has no duration");
    Residuals r;
    auto delta = [&](const std::string& name) { return b[tr.col(name)] - a[tr.col(name)]; };
    for (int k = 1; k <= n; ++k) r.inductor_volts.push_back(spec.l_phase * delta("il_" + std::to_string(k)) / span);
    r.inductor_volts.push_back(spec.l_out * delta("il_o") / span);
    r.capacitor_amps.push_back(spec.c_in * delta("vc_1") / span);
    r.capacitor_amps.push_back(spec.c_in * delta("vc_2") / span);
    for (int j = 1; j <= n - 1; ++j) r.capacitor_amps.push_back(spec.c_block * delta("vcb_" + std::to_string(j)) / span);
    r.capacitor_amps.push_back(spec.c_out * delta("vc_o") / span);
    return r;
}

SteadyReport steady_metrics(const Trace& full, const ConverterSpec& spec)
{
    const int n = spec.phases;
    const std::size_t first = last_cycle_start(full, spec.period());
    Trace tr;
    tr.phases = full.phases;
    tr.columns = full.columns;
    tr.rows.assign(full.rows.begin() + static_cast<long>(first), full.rows.end());

    SteadyReport r;
    r.phases = n;
    auto mean = [&](const std::string& c) { return time_mean(tr, tr.col(c), 0); };
    auto colmax = [&](const std::string& c) {
        const int i = tr.col(c);
        double m = -INFINITY;
        for (const auto& row : tr.rows) m = std::max(m, row[i]);
        return m;
    };
    auto colmin = [&](const std::string& c) {
        const int i = tr.col(c);
        double m = INFINITY;
        for (const auto& row : tr.rows) m = std::min(m, row[i]);
        return m;
    };

    r.vout_mean = mean("v_out");
    r.vout_pp = colmax("v_out") - colmin("v_out");
    r.ilo_mean = mean("il_o");
    for (int k = 1; k <= n; ++k) {
        const std::string c = "il_" + std::to_string(k);
        r.phase_mean.push_back(mean(c));
        r.phase_ripple.push_back(colmax(c) - colmin(c));
        r.peak_vs.push_back(colmax("vs_" + std::to_string(k)));
        r.peak_vd.push_back(colmax("vd_" + std::to_string(k)));
    }
    const auto [lo, hi] = std::minmax_element(r.phase_mean.begin(), r.phase_mean.end());
    double avg = 0.0;
    for (double v : r.phase_mean) avg += v;
    avg /= n;
    r.sharing_spread = (*hi - *lo) / std::abs(avg);
    r.iin_mean = mean("i_in");
    r.iin_min = colmin("i_in");
    r.continuous = r.iin_min > 1e-3 * r.iin_mean;
    r.v_c1 = mean("vc_1");
    r.v_c2 = mean("vc_2");
    for (int j = 1; j <= n - 1; ++j) r.v_cb.push_back(mean("vcb_" + std::to_string(j)));
    r.v_co = mean("vc_o");

    const double span = tr.rows.back()[0] - tr.rows.front()[0];
    if (first == 0 && full.e_in != 0.0) {
        // Energy integrals from the engine are exact per step; use them when they cover the cycle.
        r.p_in = full.e_in / span;
        r.p_out = full.e_out / span;
        r.p_loss = full.e_loss / span;
    } else {
        r.p_in = mean("p_in");
        r.p_out = mean("p_out");
        double acc = 0.0;
        for (std::size_t i = first + 1; i < full.rows.size(); ++i)
            acc += 0.5 * (full.p_loss[i] + full.p_loss[i - 1]) * (full.rows[i][0] - full.rows[i - 1][0]);
        r.p_loss = acc / span;
    }
    r.efficiency = r.p_out / r.p_in;
    r.power_identity_error = std::abs(r.p_in - r.p_out - r.p_loss) / std::abs(r.p_in);
    r.residuals = vsb_charge_residuals(tr, spec);
    return r;
}

double CrossCheck::max_rel_error() const
{
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.rel_error);
    return m;
}

CrossCheck crosscheck(const ConverterSpec& spec, const GateSchedule& sched, const SimOptions& sim,
                      bool allow_invalid)
{
    CrossCheck cc;
    cc.formula = stress_formulas(spec.phases, spec.vin, to_double(sched.duty), spec.load_ohms);
    const SteadyResult ss = run_to_steady_state(spec, sched, {}, sim, allow_invalid);
    cc.cycles = ss.cycles;
    cc.steady = steady_metrics(ss.cycle, spec);
    auto add = [&](std::string name, double f, double s) {
        cc.rows.push_back({std::move(name), f, s, std::abs(s - f) / std::max(std::abs(f), 1e-300)});
    };
    const auto& f = cc.formula;
    const auto& s = cc.steady;
    add("gain", f.gain, s.vout_mean / spec.vin);
    add("v_out", f.vout, s.vout_mean);
    add("v_c1", f.v_c1, s.v_c1);
    add("v_c2", f.v_c2, s.v_c2);
    for (std::size_t j = 0; j < f.v_cb.size(); ++j) add("v_cb_" + std::to_string(j + 1), f.v_cb[j], s.v_cb[j]);
    for (int k = 0; k < spec.phases; ++k) add("i_l_" + std::to_string(k + 1), f.i_phase, s.phase_mean[k]);
    add("i_lo", f.i_lo, s.ilo_mean);
    add("i_in", f.i_in, s.iin_mean);
    return cc;
}

CrossCheck crosscheck(const ConverterSpec& spec, const SimOptions& sim, bool allow_invalid)
{
    return crosscheck(spec, interleaved_schedule(spec.phases, spec.duty, spec.fsw), sim, allow_invalid);
}

void write_report_csv(const std::vector<CrossRow>& rows, std::ostream& os)
{
    os << "name,formula_value,simulated_value,rel_error\n";
    for (const auto& r : rows)
        os << r.name << ',' << format_number(r.formula) << ',' << format_number(r.simulated) << ','
           << format_number(r.rel_error) << '\n';
}

void print_formula_report(const FormulaReport& f, std::ostream& os)
{
    os << std::setprecision(6);
    os << "phases N        = " << f.phases << "\n"
       << "input voltage   = " << f.vin << " V\n"
       << "duty D          = " << f.duty << "\n"
       << "gain M          = " << f.gain << "  (D/(N-D))\n"
       << "output voltage  = " << f.vout << " V\n"
       << "V_C1 = V_C2     = " << f.v_c1 << " V\n";
    for (std::size_t j = 0; j < f.v_cb.size(); ++j) os << "V_CB" << j + 1 << std::setw(13) << "= " << f.v_cb[j] << " V\n";
    if (f.i_lo > 0)
        os << "output current  = " << f.i_lo << " A\n"
           << "phase current   = " << f.i_phase << " A (each)\n"
           << "input current   = " << f.i_in << " A\n";
    os << "switch S1 block = " << f.v_s1 << " V\n"
       << "other switches  = " << f.v_s_other << " V (peak)\n";
    for (const auto& n : f.notes) os << "note: " << n << "\n";
}

void print_steady_report(const SteadyReport& r, std::ostream& os)
{
    os << std::setprecision(6);
    os << "mean v_out      = " << r.vout_mean << " V (ripple " << r.vout_pp << " V p-p)\n"
       << "mean i_Lo       = " << r.ilo_mean << " A\n";
    for (int k = 0; k < r.phases; ++k)
        os << "i_L" << k + 1 << " mean       = " << r.phase_mean[k] << " A (ripple " << r.phase_ripple[k]
           << " A), peak v_S" << k + 1 << " = " << r.peak_vs[k] << " V, peak v_D" << k + 1 << " = " << r.peak_vd[k]
           << " V\n";
    os << "sharing spread  = " << 100 * r.sharing_spread << " %\n"
       << "input current   = mean " << r.iin_mean << " A, min " << r.iin_min << " A ("
       << (r.continuous ? "continuous" : "discontinuous") << ")\n"
       << "V_C1, V_C2      = " << r.v_c1 << ", " << r.v_c2 << " V\n";
    for (std::size_t j = 0; j < r.v_cb.size(); ++j) os << "V_CB" << j + 1 << " mean     = " << r.v_cb[j] << " V\n";
    os << "p_in, p_out     = " << r.p_in << ", " << r.p_out << " W; dissipation " << r.p_loss << " W\n"
       << "efficiency      = " << 100 * r.efficiency << " %\n"
       << "power identity  = " << 100 * r.power_identity_error << " % error\n";
}

}  // namespace scb
