#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace crrbf {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportFormatVersion = 1;

// Formats a double with the shortest representation that round-trips.
std::string format_double(double value);
std::string format_fixed(double value, int decimals);

// Renderers over the report.json document. Scores and the text report are
// fully determined by the stored numbers; only timing.csv carries wall-clock
// values, which is why it is a separate file.
std::string render_scores_csv(const nlohmann::json& report);
std::string render_timing_csv(const nlohmann::json& report);
std::string render_report_text(const nlohmann::json& report);
std::string render_kernels_json(const nlohmann::json& report);

// Throws ValidationError when the document's format version is unsupported.
void check_report_version(const nlohmann::json& report);

// Writes report.json, report.txt, scores.csv, timing.csv and kernels.json.
void write_report_files(const nlohmann::json& report, const std::filesystem::path& out_dir);

}  // namespace crrbf
