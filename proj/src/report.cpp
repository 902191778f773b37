#include "livesurvey/report.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "livesurvey/document.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

std::string fmt(std::optional<double> v, int precision = 6) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

std::optional<double> flag(std::optional<bool> b) {
  if (!b) return std::nullopt;
  return *b ? 1.0 : 0.0;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

using Extractor = std::function<std::optional<double>(const StepEvaluation&)>;

// Similarity and disruption are taken over late-paper steps that ran; routing
// over late papers; abstention is handled separately from confusion counts.
const std::vector<std::pair<std::string, Extractor>>& extractors() {
  static const std::vector<std::pair<std::string, Extractor>> list = {
      {"bleu4", [](const StepEvaluation& e) { return e.bleu4; }},
      {"rouge_l", [](const StepEvaluation& e) { return e.rouge_l_f; }},
      {"bert_sim", [](const StepEvaluation& e) { return e.bert_sim; }},
      {"semantic_align", [](const StepEvaluation& e) { return e.semantic_align; }},
      {"local_coherence", [](const StepEvaluation& e) { return e.local_coherence; }},
      {"delta_tokens",
       [](const StepEvaluation& e) -> std::optional<double> {
         if (!e.late || e.failed) return std::nullopt;
         return static_cast<double>(e.delta_tokens);
       }},
      {"delta_out",
       [](const StepEvaluation& e) -> std::optional<double> {
         if (!e.late || e.failed) return std::nullopt;
         return static_cast<double>(e.delta_out);
       }},
      {"section_acc1", [](const StepEvaluation& e) { return flag(e.routing_hit1); }},
      {"section_acc3", [](const StepEvaluation& e) { return flag(e.routing_hit3); }},
      {"table_acc1", [](const StepEvaluation& e) { return flag(e.table_hit1); }},
      {"table_acc3", [](const StepEvaluation& e) { return flag(e.table_hit3); }},
      {"table_fidelity", [](const StepEvaluation& e) { return e.table_fidelity; }},
      {"table_exact", [](const StepEvaluation& e) { return e.table_exact; }},
  };
  return list;
}

void push_aggregate(std::vector<SummaryRow>& rows, const std::string& method,
                    const std::string& metric, const std::vector<GroupedValue>& samples,
                    const std::vector<std::string>& surveys) {
  const Aggregate agg = aggregate(samples);
  std::size_t total = 0;
  for (const auto& survey : surveys) {
    auto it = agg.per_group.find(survey);
    SummaryRow row{method, metric, survey, 0, std::nullopt, std::nullopt};
    if (it != agg.per_group.end()) {
      row.n = it->second.n;
      row.mean = it->second.mean;
      row.stddev = it->second.stddev;
      total += row.n;
    }
    rows.push_back(row);
  }
  rows.push_back({method, metric, "macro", agg.per_group.size(), agg.macro, agg.macro_stddev});
  rows.push_back({method, metric, "micro", total, agg.micro, std::nullopt});
}

const SummaryRow* find_row(const std::vector<SummaryRow>& rows, const std::string& method,
                           const std::string& metric, const std::string& group) {
  for (const auto& r : rows) {
    if (r.method == method && r.metric == metric && r.group == group) return &r;
  }
  return nullptr;
}

}  // namespace

const std::vector<std::string>& report_metrics() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : extractors()) out.push_back(name);
    out.push_back("abstention_precision");
    out.push_back("abstention_recall");
    return out;
  }();
  return names;
}

std::vector<SummaryRow> summarize(const std::vector<StepEvaluation>& evals) {
  std::vector<std::string> methods;
  std::vector<std::string> surveys;
  for (const auto& e : evals) {
    const std::string m = to_string(e.method);
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    if (std::find(surveys.begin(), surveys.end(), e.survey) == surveys.end()) {
      surveys.push_back(e.survey);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& method : methods) {
    for (const auto& [metric, fn] : extractors()) {
      std::vector<GroupedValue> samples;
      for (const auto& e : evals) {
        if (to_string(e.method) == method) samples.push_back({e.survey, fn(e)});
      }
      push_aggregate(rows, method, metric, samples, surveys);
    }
    if (method != to_string(Method::kFramework)) continue;
    // Abstention scores are ratios of per-survey confusion counts.
    std::vector<GroupedValue> precision, recall;
    std::map<std::string, AbstentionCounts> counts;
    AbstentionCounts pooled;
    for (const auto& e : evals) {
      if (to_string(e.method) != method) continue;
      counts[e.survey].add(e.out_of_scope, e.abstained);
      pooled.add(e.out_of_scope, e.abstained);
    }
    for (const auto& survey : surveys) {
      auto it = counts.find(survey);
      if (it == counts.end()) continue;
      const auto s = abstention_pr(it->second);
      precision.push_back({survey, s.precision});
      recall.push_back({survey, s.recall});
    }
    for (auto [metric, samples] :
         {std::pair{std::string("abstention_precision"), precision},
          std::pair{std::string("abstention_recall"), recall}}) {
      const Aggregate agg = aggregate(samples);
      for (const auto& survey : surveys) {
        auto it = agg.per_group.find(survey);
        const auto& c = counts[survey];
        const std::size_t n = metric == "abstention_precision" ? c.tp + c.fp : c.tp + c.fn;
        rows.push_back({method, metric, survey, n,
                        it == agg.per_group.end() ? std::nullopt : std::optional(it->second.mean),
                        std::nullopt});
      }
      const auto p = abstention_pr(pooled);
      rows.push_back({method, metric, "macro", agg.per_group.size(), agg.macro, agg.macro_stddev});
      rows.push_back({method, metric, "micro",
                      metric == "abstention_precision" ? pooled.tp + pooled.fp
                                                       : pooled.tp + pooled.fn,
                      metric == "abstention_precision" ? p.precision : p.recall, std::nullopt});
    }
  }
  return rows;
}

std::string header_lines(const ReportHeader& header) {
  const auto& s = header.settings;
  std::string out;
  out += "# rouge_l_beta=" + fmt(s.rouge_beta, 3) + "\n";
  out += "# bleu_smoothing=" + s.bleu_smoothing + "\n";
  out += "# coherence_k=" + std::to_string(s.coherence_k) + "\n";
  out += "# fidelity_tau=" + fmt(s.fidelity_tau, 3) + "\n";
  out += "# tokenizer=" + std::string(kTokenizerId) + "\n";
  out += "# embedding_model=" +
         (header.embedding_model.empty() ? std::string("absent") : header.embedding_model) + "\n";
  return out;
}

std::string steps_csv(const ReportHeader& header, const std::vector<StepEvaluation>& evals) {
  std::string out = header_lines(header);
  out +=
      "survey,method,paper_id,late,failed,y_out_of_scope,a_abstained,u_sentences,bleu4,"
      "rouge_l,bert_sim,semantic_align,local_coherence,delta_tokens,delta_out,"
      "section_hit1,section_hit3,table_hit1,table_hit3,table_fidelity,table_exact\n";
  auto b = [](std::optional<bool> v) { return v ? std::string(*v ? "1" : "0") : "NA"; };
  for (const auto& e : evals) {
    out += csv_field(e.survey) + "," + to_string(e.method) + "," + csv_field(e.paper_id) + "," +
           (e.late ? "1" : "0") + "," + (e.failed ? "1" : "0") + "," +
           (e.out_of_scope ? "1" : "0") + "," + (e.abstained ? "1" : "0") + "," +
           std::to_string(e.u_size) + "," + fmt(e.bleu4) + "," + fmt(e.rouge_l_f) + "," +
           fmt(e.bert_sim) + "," + fmt(e.semantic_align) + "," + fmt(e.local_coherence) + "," +
           std::to_string(e.delta_tokens) + "," + std::to_string(e.delta_out) + "," +
           b(e.routing_hit1) + "," + b(e.routing_hit3) + "," + b(e.table_hit1) + "," +
           b(e.table_hit3) + "," + fmt(e.table_fidelity) + "," + fmt(e.table_exact) + "\n";
  }
  return out;
}

std::string summary_csv(const ReportHeader& header, const std::vector<SummaryRow>& rows) {
  std::string out = header_lines(header);
  out += "method,metric,group,n,mean,stddev\n";
  for (const auto& r : rows) {
    out += r.method + "," + r.metric + "," + csv_field(r.group) + "," + std::to_string(r.n) +
           "," + fmt(r.mean) + "," + fmt(r.stddev) + "\n";
  }
  return out;
}

std::string summary_text(const ReportHeader& header, const std::vector<SummaryRow>& rows) {
  std::vector<std::string> methods, groups;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) {
      groups.push_back(r.group);
    }
  }
  auto cell = [&](const std::string& method, const std::string& metric,
                  const std::string& group, double scale, int precision) {
    const SummaryRow* r = find_row(rows, method, metric, group);
    if (!r || !r->mean) return std::string("NA");
    std::string s = fmt(*r->mean * scale, precision);
    if (r->stddev && group != "micro") s += " +/- " + fmt(*r->stddev * scale, precision);
    return s;
  };
  auto table = [&](const std::string& title,
                   const std::vector<std::tuple<std::string, std::string, double, int>>& cols,
                   const std::vector<std::string>& only_methods) {
    std::string out = title + "\n";
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> head{"method", "survey"};
    for (const auto& c : cols) head.push_back(std::get<0>(c));
    lines.push_back(head);
    for (const auto& method : methods) {
      if (!only_methods.empty() &&
          std::find(only_methods.begin(), only_methods.end(), method) == only_methods.end()) {
        continue;
      }
      for (const auto& group : groups) {
        std::vector<std::string> line{method, group};
        for (const auto& [label, metric, scale, precision] : cols) {
          line.push_back(cell(method, metric, group, scale, precision));
        }
        lines.push_back(line);
      }
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& l : lines) {
      for (std::size_t i = 0; i < l.size(); ++i) width[i] = std::max(width[i], l[i].size());
    }
    for (const auto& l : lines) {
      std::string row;
      for (std::size_t i = 0; i < l.size(); ++i) {
        row += l[i] + std::string(width[i] - l[i].size() + 2, ' ');
      }
      while (!row.empty() && row.back() == ' ') row.pop_back();
      out += row + "\n";
    }
    return out + "\n";
  };
  std::string out = "Survey update benchmark report\n" + header_lines(header) + "\n";
  out += table("Update quality and disruption",
               {{"BLEU-4(x100)", "bleu4", 100.0, 2},
                {"ROUGE-L", "rouge_l", 1.0, 3},
                {"BERT", "bert_sim", 1.0, 3},
                {"Align", "semantic_align", 1.0, 3},
                {"Coherence", "local_coherence", 1.0, 3},
                {"dTokens", "delta_tokens", 1.0, 1},
                {"dOut", "delta_out", 1.0, 1}},
               {});
  const std::vector<std::string> framework{to_string(Method::kFramework)};
  out += table("Routing accuracy",
               {{"Section@1", "section_acc1", 1.0, 3},
                {"Section@3", "section_acc3", 1.0, 3},
                {"Table@1", "table_acc1", 1.0, 3},
                {"Table@3", "table_acc3", 1.0, 3}},
               framework);
  out += table("Abstention",
               {{"Precision", "abstention_precision", 1.0, 4},
                {"Recall", "abstention_recall", 1.0, 4}},
               framework);
  out += table("Table synthesis",
               {{"Fidelity", "table_fidelity", 1.0, 3}, {"ExactMatch", "table_exact", 1.0, 3}},
               framework);
  return out;
}

void write_report(const std::filesystem::path& dir, const ReportHeader& header,
                  const std::vector<StepEvaluation>& evals) {
  const auto rows = summarize(evals);
  write_file(dir / "steps.csv", steps_csv(header, evals));
  write_file(dir / "summary.csv", summary_csv(header, rows));
  write_file(dir / "summary.txt", summary_text(header, rows));
}

}  // namespace livesurvey
