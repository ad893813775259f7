#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>

#include "tracekin/validation/acceptance.hpp"
#include "tracekin/validation/report.hpp"

int main(int argc, char** argv) {
    namespace v = tracekin::validation;
    CLI::App app{"Runs every acceptance criterion and prints one line per criterion."};
    std::string configPath;
    std::string outDir = "acceptance_report";
    std::vector<int> only;
    app.add_option("--config", configPath, "YAML run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", outDir, "directory for report.json and tables");
    app.add_option("--only", only, "criterion ids to run (default: all)");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto report = v::runAcceptanceSuite(configPath, "acceptance", only, [](const v::CriterionResult& r) {
            const char* status = r.acceptable() ? "PASS" : "FAIL";
            std::string note;
            if (r.diagnostic) note = " (diagnostic)";
            if (!r.withinBudget()) note += " (over time budget)";
            fmt::print("[{}] {:>2} {}{}: {} [{:.1f}s / {:.0f}s]\n", status, r.id, r.name, note, r.summary, r.seconds,
                       r.budgetSeconds);
            std::fflush(stdout);
        });
        v::writeReport(report, outDir);
        fmt::print("{} ({} criteria, report in {})\n", report.allPassed() ? "ALL PASSED" : "FAILURES",
                   report.criteria.size(), outDir);
        return report.allPassed() ? 0 : 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
}
