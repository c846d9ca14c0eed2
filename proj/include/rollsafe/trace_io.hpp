#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rollsafe/harness.hpp"

namespace rollsafe {

inline constexpr const char* kTraceSchema = "rollsafe-trace/1";

// First line "# schema=rollsafe-trace/1", then the column header, then one
// row per record. Doubles use %.17g.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);
std::vector<std::string> trace_columns();

std::string summary_to_json(const RunSummary& summary, int indent = 2);
std::string comparison_to_json(const Scenario& base, const std::vector<ComparisonRow>& rows);
std::string run_to_json(const Scenario& scenario, const RunSummary& summary);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace rollsafe
