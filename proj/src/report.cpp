#include "extentlab/report.hpp"

#include <sstream>

#include "extentlab/errors.hpp"

namespace extentlab {

namespace {

std::string number(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

std::string number(const std::optional<double>& value) {
  return value ? number(*value) : "";
}

std::string escape(const std::string& cell, char delimiter) {
  if (cell.find(delimiter) == std::string::npos &&
      cell.find('"') == std::string::npos && cell.find('\n') == std::string::npos) {
    return cell;
  }
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "structured" || name == "json") return ReportFormat::kStructured;
  if (name == "tabular" || name == "tsv" || name == "csv") return ReportFormat::kTabular;
  throw InvalidArgument("unknown report format '" + std::string(name) + "'");
}

std::string Table::to_delimited(char delimiter) const {
  std::string out;
  auto append_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += delimiter;
      out += escape(row[i], delimiter);
    }
    out += '\n';
  };
  append_row(header);
  for (const auto& row : rows) append_row(row);
  return out;
}

void to_json(Json& j, const MeanStd& value) {
  j = {{"mean", value.mean}, {"std", value.std}};
}
void from_json(const Json& j, MeanStd& value) {
  value.mean = j.at("mean").get<double>();
  value.std = j.at("std").get<double>();
}

void to_json(Json& j, const LabelScores& value) {
  j = {{"label", value.label},
       {"precision", value.precision},
       {"recall", value.recall},
       {"f1", value.f1},
       {"support", value.support}};
}
void from_json(const Json& j, LabelScores& value) {
  value.label = j.at("label").get<std::string>();
  value.precision = j.at("precision").get<double>();
  value.recall = j.at("recall").get<double>();
  value.f1 = j.at("f1").get<double>();
  value.support = j.at("support").get<int>();
}

void to_json(Json& j, const EvalReport& value) {
  j = {{"per_label", value.per_label},
       {"micro_f1", value.micro_f1},
       {"macro_f1", value.macro_f1},
       {"confusion", value.confusion},
       {"count", value.count}};
}
void from_json(const Json& j, EvalReport& value) {
  value.per_label = j.at("per_label").get<std::vector<LabelScores>>();
  value.micro_f1 = j.at("micro_f1").get<double>();
  value.macro_f1 = j.at("macro_f1").get<double>();
  value.confusion =
      j.at("confusion").get<std::map<std::string, std::map<std::string, int>>>();
  value.count = j.at("count").get<int>();
}

void to_json(Json& j, const AgreementReport& value) {
  j = {{"label_agreement", value.label_agreement},
       {"sc_coarse", value.sc_coarse},
       {"sc_fine", value.sc_fine},
       {"size_by_decider", value.size_by_decider},
       {"count", value.count}};
}
void from_json(const Json& j, AgreementReport& value) {
  value.label_agreement = j.at("label_agreement").get<double>();
  value.sc_coarse = j.at("sc_coarse").get<double>();
  value.sc_fine = j.at("sc_fine").get<double>();
  value.size_by_decider = j.at("size_by_decider").get<std::map<std::string, MeanStd>>();
  value.count = j.at("count").get<int>();
}

void to_json(Json& j, const BreakdownRow& value) {
  j = {{"name", value.name},
       {"count", value.count},
       {"confidence", value.confidence ? Json(*value.confidence) : Json()},
       {"micro_f1", value.micro_f1 ? Json(*value.micro_f1) : Json()},
       {"macro_f1", value.macro_f1 ? Json(*value.macro_f1) : Json()}};
}
void from_json(const Json& j, BreakdownRow& value) {
  value.name = j.at("name").get<std::string>();
  value.count = j.at("count").get<int>();
  value.confidence.reset();
  value.micro_f1.reset();
  value.macro_f1.reset();
  if (!j.at("confidence").is_null()) value.confidence = j.at("confidence").get<MeanStd>();
  if (!j.at("micro_f1").is_null()) value.micro_f1 = j.at("micro_f1").get<double>();
  if (!j.at("macro_f1").is_null()) value.macro_f1 = j.at("macro_f1").get<double>();
}

void to_json(Json& j, const ConfidenceTable& value) { j = {{"rows", value.rows}}; }
void from_json(const Json& j, ConfidenceTable& value) {
  value.rows = j.at("rows").get<std::vector<BreakdownRow>>();
}

void to_json(Json& j, const HistogramTable& value) { j = {{"counts", value.counts}}; }
void from_json(const Json& j, HistogramTable& value) {
  value.counts = j.at("counts").get<std::map<std::string, std::map<std::string, int>>>();
}

void to_json(Json& j, const GroupResult& value) {
  j = {{"group_id", value.group_id},
       {"original_prediction", value.original_prediction},
       {"variants", value.variants},
       {"changed", value.changed},
       {"accuracy", value.accuracy}};
}
void from_json(const Json& j, GroupResult& value) {
  value.group_id = j.at("group_id").get<std::string>();
  value.original_prediction = j.at("original_prediction").get<std::string>();
  value.variants = j.at("variants").get<int>();
  value.changed = j.at("changed").get<int>();
  value.accuracy = j.at("accuracy").get<double>();
}

void to_json(Json& j, const GroupError& value) {
  j = {{"group_id", value.group_id}, {"message", value.message}};
}
void from_json(const Json& j, GroupError& value) {
  value.group_id = j.at("group_id").get<std::string>();
  value.message = j.at("message").get<std::string>();
}

void to_json(Json& j, const AdversarialReport& value) {
  j = {{"groups", value.groups},
       {"accuracy", value.accuracy},
       {"variant_confidence", value.variant_confidence},
       {"rejected", value.rejected}};
}
void from_json(const Json& j, AdversarialReport& value) {
  value.groups = j.at("groups").get<std::vector<GroupResult>>();
  value.accuracy = j.at("accuracy").get<MeanStd>();
  value.variant_confidence = j.at("variant_confidence").get<MeanStd>();
  value.rejected = j.at("rejected").get<std::vector<GroupError>>();
}

void to_json(Json& j, const StatsReport& value) {
  j = {{"sample_count", value.sample_count},
       {"labels", value.labels},
       {"syntactic_classes", value.syntactic_classes},
       {"labels_by_genre", value.labels_by_genre},
       {"syntactic_classes_by_genre", value.syntactic_classes_by_genre}};
}
void from_json(const Json& j, StatsReport& value) {
  value.sample_count = j.at("sample_count").get<int>();
  value.labels = j.at("labels").get<Histogram>();
  value.syntactic_classes = j.at("syntactic_classes").get<Histogram>();
  value.labels_by_genre = j.at("labels_by_genre").get<std::map<std::string, Histogram>>();
  value.syntactic_classes_by_genre =
      j.at("syntactic_classes_by_genre").get<std::map<std::string, Histogram>>();
}

Table to_table(const EvalReport& report) {
  Table table{{"label", "precision", "recall", "f1", "support"}, {}};
  for (const auto& row : report.per_label) {
    table.rows.push_back({row.label, number(row.precision), number(row.recall),
                          number(row.f1), std::to_string(row.support)});
  }
  return table;
}

Table to_table(const AgreementReport& report) {
  Table table{{"metric", "value"}, {}};
  table.rows.push_back({"LA", number(report.label_agreement)});
  table.rows.push_back({"SC coarse", number(report.sc_coarse)});
  table.rows.push_back({"SC fine", number(report.sc_fine)});
  for (const auto& [decider, size] : report.size_by_decider) {
    table.rows.push_back({"SC size " + decider,
                          number(size.mean) + " +- " + number(size.std)});
  }
  return table;
}

Table to_table(const ConfidenceTable& report) {
  Table table{{"partition", "count", "confidence_mean", "confidence_std",
               "micro_f1", "macro_f1"},
              {}};
  for (const auto& row : report.rows) {
    table.rows.push_back(
        {row.name, std::to_string(row.count),
         row.confidence ? number(row.confidence->mean) : "",
         row.confidence ? number(row.confidence->std) : "", number(row.micro_f1),
         number(row.macro_f1)});
  }
  return table;
}

Table to_table(const HistogramTable& report) {
  Table table{{"class", "count", "group"}, {}};
  for (const auto& [group, counts] : report.counts) {
    for (int s = 0; s < kStageCount; ++s) {
      const std::string cls(to_string(static_cast<Stage>(s)));
      auto it = counts.find(cls);
      table.rows.push_back({cls, std::to_string(it == counts.end() ? 0 : it->second), group});
    }
  }
  return table;
}

Table to_table(const AdversarialReport& report) {
  Table table{{"group_id", "original_prediction", "variants", "changed", "accuracy"}, {}};
  for (const auto& group : report.groups) {
    table.rows.push_back({group.group_id, group.original_prediction,
                          std::to_string(group.variants), std::to_string(group.changed),
                          number(group.accuracy)});
  }
  return table;
}

Table to_table(const StatsReport& report) {
  Table table{{"kind", "genre", "name", "count"}, {}};
  for (const auto& [label, count] : report.labels) {
    table.rows.push_back({"label", "*", label, std::to_string(count)});
  }
  for (const auto& [cls, count] : report.syntactic_classes) {
    table.rows.push_back({"syntactic_class", "*", cls, std::to_string(count)});
  }
  for (const auto& [genre, histogram] : report.labels_by_genre) {
    for (const auto& [label, count] : histogram) {
      table.rows.push_back({"label", genre, label, std::to_string(count)});
    }
  }
  for (const auto& [genre, histogram] : report.syntactic_classes_by_genre) {
    for (const auto& [cls, count] : histogram) {
      table.rows.push_back({"syntactic_class", genre, cls, std::to_string(count)});
    }
  }
  return table;
}

}  // namespace extentlab
