#ifndef EXTENTLAB_REPORT_HPP_
#define EXTENTLAB_REPORT_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "extentlab/corpus.hpp"
#include "extentlab/io.hpp"
#include "extentlab/metrics.hpp"

namespace extentlab {

enum class ReportFormat { kStructured, kTabular };

// "structured" | "json" | "tabular" | "tsv" | "csv". Throws InvalidArgument
// otherwise.
ReportFormat report_format_from_string(std::string_view name);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_delimited(char delimiter) const;
};

// nlohmann adl hooks; the structured report form.
void to_json(Json& j, const MeanStd& value);
void from_json(const Json& j, MeanStd& value);
void to_json(Json& j, const LabelScores& value);
void from_json(const Json& j, LabelScores& value);
void to_json(Json& j, const EvalReport& value);
void from_json(const Json& j, EvalReport& value);
void to_json(Json& j, const AgreementReport& value);
void from_json(const Json& j, AgreementReport& value);
void to_json(Json& j, const BreakdownRow& value);
void from_json(const Json& j, BreakdownRow& value);
void to_json(Json& j, const ConfidenceTable& value);
void from_json(const Json& j, ConfidenceTable& value);
void to_json(Json& j, const HistogramTable& value);
void from_json(const Json& j, HistogramTable& value);
void to_json(Json& j, const GroupResult& value);
void from_json(const Json& j, GroupResult& value);
void to_json(Json& j, const GroupError& value);
void from_json(const Json& j, GroupError& value);
void to_json(Json& j, const AdversarialReport& value);
void from_json(const Json& j, AdversarialReport& value);
void to_json(Json& j, const StatsReport& value);
void from_json(const Json& j, StatsReport& value);

// One row per label / partition / group / class.
Table to_table(const EvalReport& report);
Table to_table(const AgreementReport& report);
Table to_table(const ConfidenceTable& report);
Table to_table(const HistogramTable& report);  // class,count,group
Table to_table(const AdversarialReport& report);
Table to_table(const StatsReport& report);

// Structured reports wrap the payload as {"meta": ..., "report": ...}.
// `meta` carries the seed and anything run specific, so comparisons can
// ignore it.
template <typename Report>
std::string render_report(const Report& report, ReportFormat format,
                          const Json& meta = Json::object()) {
  if (format == ReportFormat::kStructured) {
    Json out = {{"meta", meta}, {"report", report}};
    return out.dump(2) + "\n";
  }
  return to_table(report).to_delimited('\t');
}

template <typename Report>
void emit_report(const Report& report, ReportFormat format,
                 const std::filesystem::path& path,
                 const Json& meta = Json::object()) {
  write_file_atomic(path, render_report(report, format, meta));
}

// Reads the "report" payload of a structured report file.
template <typename Report>
Report load_report(const std::filesystem::path& path) {
  return Json::parse(read_file(path)).at("report").get<Report>();
}

}  // namespace extentlab

#endif  // EXTENTLAB_REPORT_HPP_
