// Flat `key = value` scenario files.
#pragma once

#include <iosfwd>
#include <set>
#include <string>

#include "scb/gates.hpp"
#include "scb/regulator.hpp"
#include "scb/spec.hpp"

namespace scb {

enum class PwmMode { Interleaved, Sequential };

struct Scenario {
    std::string name;
    ConverterSpec spec;
    PwmMode pwm_mode = PwmMode::Interleaved;
    double gap_fraction = 0.0;
    SensingChain chain;
    RegulatorConfig regulator;
    std::set<std::string> explicit_keys;  // keys present in the file

    GateSchedule schedule() const;
    // Keys that were filled from defaults, formatted as "key = value (default)".
    std::vector<std::string> defaulted() const;
};

// Parses and validates. Unknown keys, malformed values and violated invariants raise
// ConfigError prefixed with "origin:line:" where a line applies.
Scenario parse_config(std::istream& is, const std::string& origin, bool allow_invalid = false);
Scenario load_config(const std::string& path, bool allow_invalid = false);

// Writes the effective scenario in the same format (round-trips through parse_config).
void write_config(const Scenario& s, std::ostream& os);

}  // namespace scb
