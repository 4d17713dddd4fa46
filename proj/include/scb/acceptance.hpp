// Built-in acceptance suite: one verdict per numbered criterion.
#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace scb {

enum class Outcome { Pass, Fail, NotReproducible };

struct CriterionResult {
    int id = 0;
    std::string title;
    Outcome outcome = Outcome::Fail;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    int steps_per_cycle = 4000;
    unsigned seed = 20240611;
    std::set<int> only;  // empty runs every criterion
};

// Criteria whose failure is documented as unattainable with the modeled circuit.
const std::set<int>& documented_unattainable();

// Runs the suite, printing one line per criterion to `os` as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& os);

// True when every failing criterion is in documented_unattainable().
bool acceptance_ok(const std::vector<CriterionResult>& results);

std::string format_result(const CriterionResult& r);

}  // namespace scb
