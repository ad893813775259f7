#include "tracekin/validation/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace tracekin::validation {

std::string formatNumber(double v) { return fmt::format("{:.17g}", v); }

namespace {

std::string csvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csvRow(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csvField(fields[i]);
    }
    return line + "\n";
}

}  // namespace

std::string toCsv(const Table& table) {
    std::string out = csvRow(table.header);
    for (const auto& row : table.rows) out += csvRow(row);
    return out;
}

bool RunReport::allPassed() const {
    for (const auto& c : criteria)
        if (!c.acceptable()) return false;
    return true;
}

std::string reportJson(const RunReport& report) {
    nlohmann::ordered_json j;
    j["schemaVersion"] = kReportSchemaVersion;
    j["command"] = report.command;
    j["configHash"] = report.configHash;
    j["config"] = report.canonicalConfig;
    auto& list = j["criteria"] = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& c : report.criteria) {
        nlohmann::ordered_json entry;
        entry["id"] = c.id;
        entry["name"] = c.name;
        entry["passed"] = c.passed;
        entry["diagnostic"] = c.diagnostic;
        entry["summary"] = c.summary;
        entry["table"] = fmt::format("criterion_{}.csv", c.id);
        list.push_back(std::move(entry));
        all = all && (c.passed || c.diagnostic);
    }
    j["allPassed"] = all;
    return j.dump(2) + "\n";
}

Table timingTable(const RunReport& report) {
    Table t{{"id", "name", "seconds", "budgetSeconds", "withinBudget"}, {}};
    for (const auto& c : report.criteria)
        t.rows.push_back({std::to_string(c.id), c.name, fmt::format("{:.3f}", c.seconds),
                          formatNumber(c.budgetSeconds), c.withinBudget() ? "true" : "false"});
    return t;
}

void writeText(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

void writeReport(const RunReport& report, const std::filesystem::path& outDir) {
    std::filesystem::create_directories(outDir);
    writeText(outDir / "report.json", reportJson(report));
    for (const auto& c : report.criteria) writeText(outDir / fmt::format("criterion_{}.csv", c.id), toCsv(c.table));
    writeText(outDir / "timings.csv", toCsv(timingTable(report)));
}

Table estimateTable(const MarginalEstimate& estimate) {
    Table t{{"order", "value", "stdError"}, {}};
    for (const auto& term : estimate.perOrderTerms)
        t.rows.push_back({std::to_string(term.order), formatNumber(term.value), formatNumber(term.stdError)});
    t.rows.push_back({"total", formatNumber(estimate.value), formatNumber(estimate.stdError)});
    return t;
}

}  // namespace tracekin::validation
