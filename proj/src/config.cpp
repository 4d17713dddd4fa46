#include "scb/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "scb/engine.hpp"

namespace scb {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v)
{
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("'" + v + "' is not a number");
    return out;
}

int parse_int(const std::string& v)
{
    const double d = parse_double(v);
    if (d != static_cast<int>(d)) throw ConfigError("'" + v + "' is not an integer");
    return static_cast<int>(d);
}

using Setter = std::function<void(Scenario&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> m = {
        {"phases", [](Scenario& s, const std::string& v) { s.spec.phases = parse_int(v); }},
        {"vin", [](Scenario& s, const std::string& v) { s.spec.vin = parse_double(v); }},
        {"fsw", [](Scenario& s, const std::string& v) { s.spec.fsw = parse_double(v); }},
        {"duty", [](Scenario& s, const std::string& v) { s.spec.duty = parse_double(v); }},
        {"l_phase", [](Scenario& s, const std::string& v) { s.spec.l_phase = parse_double(v); }},
        {"l_out", [](Scenario& s, const std::string& v) { s.spec.l_out = parse_double(v); }},
        {"c_in", [](Scenario& s, const std::string& v) { s.spec.c_in = parse_double(v); }},
        {"c_block", [](Scenario& s, const std::string& v) { s.spec.c_block = parse_double(v); }},
        {"c_out", [](Scenario& s, const std::string& v) { s.spec.c_out = parse_double(v); }},
        {"load_ohms", [](Scenario& s, const std::string& v) { s.spec.load_ohms = parse_double(v); }},
        {"r_switch_on", [](Scenario& s, const std::string& v) { s.spec.losses.r_switch_on = parse_double(v); }},
        {"v_diode", [](Scenario& s, const std::string& v) { s.spec.losses.v_diode = parse_double(v); }},
        {"r_diode_on", [](Scenario& s, const std::string& v) { s.spec.losses.r_diode_on = parse_double(v); }},
        {"r_inductor", [](Scenario& s, const std::string& v) { s.spec.losses.r_inductor = parse_double(v); }},
        {"r_cap", [](Scenario& s, const std::string& v) { s.spec.losses.r_cap = parse_double(v); }},
        {"r_off", [](Scenario& s, const std::string& v) { s.spec.losses.r_off = parse_double(v); }},
        {"gap_fraction", [](Scenario& s, const std::string& v) { s.gap_fraction = parse_double(v); }},
        {"pwm_mode",
         [](Scenario& s, const std::string& v) {
             if (v == "interleaved") s.pwm_mode = PwmMode::Interleaved;
             else if (v == "sequential") s.pwm_mode = PwmMode::Sequential;
             else throw ConfigError("pwm_mode must be 'interleaved' or 'sequential'");
         }},
        {"vo_target", [](Scenario& s, const std::string& v) { s.regulator.vo_target = parse_double(v); }},
        {"duty_min", [](Scenario& s, const std::string& v) { s.regulator.duty_min = parse_double(v); }},
        {"duty_max", [](Scenario& s, const std::string& v) { s.regulator.duty_max = parse_double(v); }},
        {"divider_ratio", [](Scenario& s, const std::string& v) { s.chain.divider_ratio = parse_double(v); }},
        {"adc_bits", [](Scenario& s, const std::string& v) { s.chain.adc_bits = parse_int(v); }},
        {"full_scale", [](Scenario& s, const std::string& v) { s.chain.full_scale = parse_double(v); }},
        {"update_period", [](Scenario& s, const std::string& v) { s.chain.update_period = parse_int(v); }},
        {"name", [](Scenario& s, const std::string& v) { s.name = v; }},
    };
    return m;
}

// Effective value of every key, in file order of the setter table.
std::vector<std::pair<std::string, std::string>> effective(const Scenario& s)
{
    const auto& sp = s.spec;
    const auto& l = sp.losses;
    return {
        {"name", s.name},
        {"phases", std::to_string(sp.phases)},
        {"vin", format_number(sp.vin)},
        {"fsw", format_number(sp.fsw)},
        {"duty", format_number(sp.duty)},
        {"pwm_mode", s.pwm_mode == PwmMode::Interleaved ? "interleaved" : "sequential"},
        {"gap_fraction", format_number(s.gap_fraction)},
        {"l_phase", format_number(sp.l_phase)},
        {"l_out", format_number(sp.l_out)},
        {"c_in", format_number(sp.c_in)},
        {"c_block", format_number(sp.c_block)},
        {"c_out", format_number(sp.c_out)},
        {"load_ohms", format_number(sp.load_ohms)},
        {"r_switch_on", format_number(l.r_switch_on)},
        {"v_diode", format_number(l.v_diode)},
        {"r_diode_on", format_number(l.r_diode_on)},
        {"r_inductor", format_number(l.r_inductor)},
        {"r_cap", format_number(l.r_cap)},
        {"r_off", format_number(l.r_off)},
        {"vo_target", format_number(s.regulator.vo_target)},
        {"duty_min", format_number(s.regulator.duty_min)},
        {"duty_max", format_number(s.regulator.resolved_duty_max(sp.phases, s.gap_fraction))},
        {"divider_ratio", format_number(s.chain.divider_ratio)},
        {"adc_bits", std::to_string(s.chain.adc_bits)},
        {"full_scale", format_number(s.chain.full_scale)},
        {"update_period", std::to_string(s.chain.update_period)},
    };
}

}  // namespace

GateSchedule Scenario::schedule() const
{
    if (pwm_mode == PwmMode::Sequential) return sequential_schedule(spec.phases, gap_fraction, spec.fsw);
    return interleaved_schedule(spec.phases, spec.duty, spec.fsw);
}

std::vector<std::string> Scenario::defaulted() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : effective(*this))
        if (k != "name" && !explicit_keys.count(k)) out.push_back(k + " = " + v + " (default)");
    return out;
}

Scenario parse_config(std::istream& is, const std::string& origin, bool allow_invalid)
{
    Scenario s;
    std::string line;
    int lineno = 0;
    std::map<std::string, int> key_line;
    auto fail = [&](const std::string& msg) { throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg); };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) fail("unknown key '" + key + "'");
        if (s.explicit_keys.count(key)) fail("duplicate key '" + key + "'");
        try {
            it->second(s, val);
        } catch (const ConfigError& e) {
            fail(key + ": " + e.what());
        }
        s.explicit_keys.insert(key);
        key_line[key] = lineno;
    }
    lineno = 0;
    try {
        if (s.pwm_mode == PwmMode::Sequential) {
            if (s.spec.phases >= 1 && !(s.gap_fraction >= 0 && s.gap_fraction < 1.0 / s.spec.phases))
                throw ConfigError("gap_fraction must lie in [0, 1/phases)");
            const double d = 1.0 / s.spec.phases - s.gap_fraction;
            if (s.explicit_keys.count("duty") && std::abs(s.spec.duty - d) > 1e-9)
                throw ConfigError("duty conflicts with sequential mode (expected 1/phases - gap_fraction = " +
                                  format_number(d) + ")");
            s.spec.duty = d;
        }
        s.spec.validate(allow_invalid);
        s.chain.validate(s.spec.vin);
        s.regulator.validate(s.spec.phases, s.gap_fraction);
    } catch (const ConfigError& e) {
        // Validation messages start with the offending key; point at its line when present.
        const std::string msg = e.what();
        const auto it = key_line.find(msg.substr(0, msg.find(' ')));
        if (it != key_line.end()) throw ConfigError(origin + ":" + std::to_string(it->second) + ": " + msg);
        throw ConfigError(origin + ": " + msg);
    }
    return s;
}

Scenario load_config(const std::string& path, bool allow_invalid)
{
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open file");
    return parse_config(f, path, allow_invalid);
}

void write_config(const Scenario& s, std::ostream& os)
{
    for (const auto& [k, v] : effective(s)) {
        if (k == "name" && v.empty()) continue;
        os << k << " = " << v << '\n';
    }
}

}  // namespace scb
