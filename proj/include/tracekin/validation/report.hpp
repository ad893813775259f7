#pragma once

#include <filesystem>
#include <string>

#include "tracekin/estimate.hpp"
#include "tracekin/validation/acceptance.hpp"

namespace tracekin::validation {

inline constexpr int kReportSchemaVersion = 1;

/// Decimal with 17 significant digits.
std::string formatNumber(double v);

std::string toCsv(const Table& table);

/// JSON report without timings, so equal inputs give equal bytes.
std::string reportJson(const RunReport& report);

/// One row per criterion with the measured wall time and its budget.
Table timingTable(const RunReport& report);

/// Writes report.json, criterion_<id>.csv for every criterion and timings.csv.
void writeReport(const RunReport& report, const std::filesystem::path& outDir);

/// Table of per-order terms of an estimate.
Table estimateTable(const MarginalEstimate& estimate);

void writeText(const std::filesystem::path& path, const std::string& text);

}  // namespace tracekin::validation
