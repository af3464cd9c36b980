#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sboltz/coefficients.hpp"

namespace sboltz {

struct SuiteResult {
    std::string name;
    bool passed = false;
    double metric = 0.0;     // the quantity compared against threshold
    double threshold = 0.0;
    std::string detail;
    double seconds = 0.0;
};

const std::vector<std::string>& suite_names();

// Throws DomainError on an unknown suite name.
SuiteResult run_suite(const std::string& name, const CoeffTable& table);

nlohmann::json suite_json(const SuiteResult& r);

}  // namespace sboltz
