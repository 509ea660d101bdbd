#pragma once

#include <string>
#include <utility>
#include <vector>

#include "decon/attack.hpp"
#include "decon/metrics.hpp"
#include "decon/patterns.hpp"

namespace decon {

enum class ReportFormat { markdown, csv, json };

ReportFormat report_format_from_string(const std::string& s);

// Deterministic renderings; identical input gives identical bytes.
// The contamination report lists llm_type x category rows in the fixed
// generator/category order with a grand-total line.
std::string render_report(const ContaminationTable& table, ReportFormat format);
std::string render_report(const AttackReport& report, ReportFormat format);
std::string render_report(const std::vector<std::pair<std::string, EvalResult>>& rows,
                          ReportFormat format);

// 20325 -> "20,325"
std::string format_count(std::uint64_t n);

}  // namespace decon
