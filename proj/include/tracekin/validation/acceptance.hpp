#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tracekin/validation/config.hpp"

namespace tracekin::validation {

/// Plain table written as CSV next to the report.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    bool diagnostic = false;   ///< reported only, never fails the run
    std::string summary;       ///< one-line description of the measured quantity
    Table table;
    double seconds = 0.0;
    double budgetSeconds = 0.0;

    bool withinBudget() const { return budgetSeconds <= 0.0 || seconds <= budgetSeconds; }
    bool acceptable() const { return (passed || diagnostic) && withinBudget(); }
};

struct RunReport {
    std::string command;
    std::string configHash;
    std::string canonicalConfig;
    std::vector<CriterionResult> criteria;

    bool allPassed() const;
};

/// Criterion ids run by the suite, in order.
std::vector<int> acceptanceCriteria();
std::string criterionName(int id);

/// Runs one criterion on the given configuration.
CriterionResult runCriterion(int id, const RunConfig& config);

/// Runs the listed criteria (all when empty), calling `onResult` after each.
RunReport runAcceptanceSuite(const RunConfig& config, const std::string& command, const std::vector<int>& only = {},
                             const std::function<void(const CriterionResult&)>& onResult = {});
RunReport runAcceptanceSuite(const std::string& configPath, const std::string& command,
                             const std::vector<int>& only = {},
                             const std::function<void(const CriterionResult&)>& onResult = {});

}  // namespace tracekin::validation
