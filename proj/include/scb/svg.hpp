// Deterministic SVG line plots of trace signals.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scb/engine.hpp"

namespace scb {

// Plots the named columns against time. Throws std::invalid_argument for an empty
// signal list and std::out_of_range for an unknown signal.
void write_svg(const Trace& tr, const std::vector<std::string>& signals, std::ostream& os);
void write_svg(const Trace& tr, const std::vector<std::string>& signals, const std::string& path);

}  // namespace scb
