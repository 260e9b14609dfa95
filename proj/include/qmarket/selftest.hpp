#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qmarket {

struct SelftestOptions {
    /// Constant of the n = 3 facets used in the LP-vs-facet check. Anything
    /// other than 1 is a deliberately corrupted fixture.
    double facet_bound = 1.0;
};

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;
    bool passed() const;
    std::vector<std::string> failed() const;
    nlohmann::json to_json() const;
};

/// Fast deterministic subset of the acceptance checks. No hidden state:
/// repeated calls return identical reports.
SelftestReport run_selftest(const SelftestOptions& options = {});

}  // namespace qmarket
