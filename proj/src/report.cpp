#include "crrbf/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crrbf/errors.hpp"

namespace crrbf {

std::string format_double(double value) {
    char buffer[64];
    const auto [last, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    (void)ec;
    return std::string(buffer, last);
}

std::string format_fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
    return buffer;
}

void check_report_version(const nlohmann::json& report) {
    if (!report.contains("format_version") ||
        report.at("format_version").get<int>() != kReportFormatVersion)
        throw ValidationError("report format version mismatch: expected " +
                              std::to_string(kReportFormatVersion));
}

namespace {

std::vector<std::string> row_params(const nlohmann::json& row) {
    return row.at("params").get<std::vector<std::string>>();
}

}  // namespace

std::string render_scores_csv(const nlohmann::json& report) {
    check_report_version(report);
    const auto& table = report.at("table");
    std::string out;
    for (const auto& name : table.at("param_names")) {
        out += name.get<std::string>();
        out += ',';
    }
    out += "mean_oa,std_oa,mean_kappa\n";
    for (const auto& row : table.at("rows")) {
        for (const auto& p : row_params(row)) {
            out += p;
            out += ',';
        }
        out += format_double(row.at("mean_oa").get<double>());
        out += ',';
        out += format_double(row.at("std_oa").get<double>());
        out += ',';
        out += format_double(row.at("mean_kappa").get<double>());
        out += '\n';
    }
    return out;
}

std::string render_timing_csv(const nlohmann::json& report) {
    check_report_version(report);
    std::string out = "stage,seconds\n";
    const auto& table = report.at("table");
    const auto names = table.at("param_names").get<std::vector<std::string>>();
    for (const auto& row : table.at("rows")) {
        if (!row.contains("seconds")) continue;
        const auto params = row_params(row);
        std::string label;
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (i) label += ';';
            label += names[i] + "=" + params[i];
        }
        out += label + ',' + format_double(row.at("seconds").get<double>()) + '\n';
    }
    if (report.contains("timing")) {
        for (const auto& entry : report.at("timing").at("stages")) {
            out += entry.at("stage").get<std::string>() + ',' +
                   format_double(entry.at("seconds").get<double>()) + '\n';
        }
    }
    return out;
}

namespace {

std::string align(const std::string& text, std::size_t width) {
    std::string out = text;
    while (out.size() < width) out.insert(out.begin(), ' ');
    return out;
}

void render_table(std::string& out, const nlohmann::json& table) {
    const auto names = table.at("param_names").get<std::vector<std::string>>();
    std::vector<std::string> header = names;
    header.insert(header.end(), {"mean OA (%)", "std", "kappa"});

    std::vector<std::vector<std::string>> lines;
    for (const auto& row : table.at("rows")) {
        std::vector<std::string> line = row_params(row);
        line.push_back(format_fixed(100.0 * row.at("mean_oa").get<double>(), 2));
        line.push_back(format_fixed(100.0 * row.at("std_oa").get<double>(), 2));
        line.push_back(format_fixed(row.at("mean_kappa").get<double>(), 2));
        lines.push_back(std::move(line));
    }

    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        widths[c] = header[c].size();
        for (const auto& line : lines) widths[c] = std::max(widths[c], line[c].size());
    }

    for (std::size_t c = 0; c < header.size(); ++c)
        out += align(header[c], widths[c]) + (c + 1 < header.size() ? "  " : "");
    out += '\n';
    for (const auto& line : lines) {
        for (std::size_t c = 0; c < line.size(); ++c)
            out += align(line[c], widths[c]) + (c + 1 < line.size() ? "  " : "");
        out += '\n';
    }
}

void render_best(std::string& out, const nlohmann::json& best) {
    out += "Best parameters\n";
    for (auto it = best.begin(); it != best.end(); ++it) {
        if (!it->is_primitive()) continue;
        out += "  " + it.key() + ": ";
        if (it->is_number_float()) {
            const std::string key = it.key();
            const bool is_accuracy = key.find("oa") != std::string::npos;
            out += is_accuracy ? format_fixed(100.0 * it->get<double>(), 2)
                               : format_double(it->get<double>());
        } else {
            out += it->dump();
        }
        out += '\n';
    }
}

}  // namespace

std::string render_report_text(const nlohmann::json& report) {
    check_report_version(report);
    std::string out;
    out += "crrbf experiment report (tool " +
           report.at("tool_version").get<std::string>() + ")\n";
    out += "scenario: " + report.at("scenario").get<std::string>() + "\n";
    if (report.value("partial", false))
        out += "NOTE: run was interrupted; the report holds partial results only\n";
    if (report.value("non_converged", false))
        out += "NOTE: at least one SVM training run did not converge\n";
    out += '\n';

    if (report.contains("best") && !report.at("best").empty()) {
        render_best(out, report.at("best"));
        out += '\n';
    }

    out += "Scores (" + report.at("table").at("name").get<std::string>() + ")\n";
    render_table(out, report.at("table"));
    out += '\n';

    if (report.contains("tuning") && !report.at("tuning").empty()) {
        out += "Cross-validated parameters\n";
        for (const auto& t : report.at("tuning")) {
            out += "  " + t.at("kernel").get<std::string>() +
                   " fraction=" + format_double(t.at("fraction").get<double>()) + ":";
            if (t.contains("gamma"))
                out += " gamma=" + format_double(t.at("gamma").get<double>());
            if (t.contains("degree"))
                out += " degree=" + format_double(t.at("degree").get<double>());
            out += " trade_off=" + format_double(t.at("trade_off").get<double>());
            out += " cv_oa=" + format_fixed(100.0 * t.at("cv_oa").get<double>(), 2);
            out += '\n';
        }
        out += '\n';
    }

    if (report.contains("timing")) {
        out += "Timing (wall clock)\n";
        std::size_t width = 0;
        for (const auto& entry : report.at("timing").at("stages"))
            width = std::max(width, entry.at("stage").get<std::string>().size());
        for (const auto& entry : report.at("timing").at("stages")) {
            std::string stage = entry.at("stage").get<std::string>();
            stage.resize(width, ' ');
            out += "  " + stage + "  " +
                   format_fixed(entry.at("seconds").get<double>(), 3) + " s\n";
        }
    } else {
        out += "Timing: no timing section in this report\n";
    }
    return out;
}

std::string render_kernels_json(const nlohmann::json& report) {
    check_report_version(report);
    if (report.contains("kernels")) return report.at("kernels").dump(2) + "\n";
    return "[]\n";
}

void write_report_files(const nlohmann::json& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
        out << content;
    };
    write("report.json", report.dump(2) + "\n");
    write("report.txt", render_report_text(report));
    write("scores.csv", render_scores_csv(report));
    write("timing.csv", render_timing_csv(report));
    write("kernels.json", render_kernels_json(report));
}

}  // namespace crrbf
