#include "prestamo/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <unordered_map>

#include "prestamo/error.hpp"
#include "prestamo/format.hpp"

namespace prestamo {

namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::vector<LabeledSpan> filtered(const std::vector<LabeledSpan>& spans,
                                  EvalMode mode) {
  if (mode == EvalMode::kWithOther) return spans;
  std::vector<LabeledSpan> out;
  for (const LabeledSpan& span : spans) {
    if (span.label == Label::kEng) out.push_back(span);
  }
  return out;
}

void count_label(const std::vector<LabeledSpan>& gold,
                 const std::vector<LabeledSpan>& pred, Label label,
                 LabelScores& scores) {
  std::set<std::pair<std::size_t, std::size_t>> gold_set;
  for (const LabeledSpan& s : gold) {
    if (s.label == label) gold_set.insert({s.start, s.end});
  }
  std::size_t predicted = 0;
  std::size_t hits = 0;
  for (const LabeledSpan& s : pred) {
    if (s.label != label) continue;
    ++predicted;
    if (gold_set.count({s.start, s.end}) != 0) ++hits;
  }
  scores.tp += hits;
  scores.fp += predicted - hits;
  scores.fn += gold_set.size() - hits;
}

void count_boundaries(const std::vector<LabeledSpan>& gold,
                      const std::vector<LabeledSpan>& pred, LabelScores& scores) {
  std::set<std::pair<std::size_t, std::size_t>> gold_set;
  for (const LabeledSpan& s : gold) gold_set.insert({s.start, s.end});
  std::size_t hits = 0;
  for (const LabeledSpan& s : pred) hits += gold_set.count({s.start, s.end});
  scores.tp += hits;
  scores.fp += pred.size() - hits;
  scores.fn += gold_set.size() - hits;
}

void row(std::ostream& out, const std::string& name, const LabelScores& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-24s %9s %9s %9s %6zu %6zu %6zu\n", name.c_str(),
                format_fixed2(s.precision()).c_str(), format_fixed2(s.recall()).c_str(),
                format_fixed2(s.f1()).c_str(), s.tp, s.fp, s.fn);
  out << buf;
}

void tsv_row(std::ostream& out, const std::string& set_name, std::string_view mode,
             std::string_view label, const LabelScores& s) {
  out << set_name << '\t' << mode << '\t' << label << '\t'
      << format_fixed2(s.precision()) << '\t' << format_fixed2(s.recall()) << '\t'
      << format_fixed2(s.f1()) << '\t' << s.tp << '\t' << s.fp << '\t' << s.fn << '\n';
}

std::string_view mode_name(EvalMode mode) {
  return mode == EvalMode::kWithOther ? "+OTHER" : "-OTHER";
}

}  // namespace

Predictions predictions_from_tagged(const Corpus& tagged) {
  Predictions out;
  out.reserve(tagged.headlines.size());
  for (const Headline& h : tagged.headlines) out.push_back({h.id, h.predicted});
  return out;
}

Predictions predictions_from_file_corpus(const Corpus& corpus) {
  Predictions out;
  out.reserve(corpus.headlines.size());
  for (const Headline& h : corpus.headlines) out.push_back({h.id, h.gold});
  return out;
}

double f1(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double LabelScores::precision() const { return percent(tp, tp + fp); }
double LabelScores::recall() const { return percent(tp, tp + fn); }
double LabelScores::f1() const { return prestamo::f1(precision(), recall()); }

EvalReport evaluate(const Corpus& gold, const Predictions& predictions,
                    EvalMode mode) {
  std::unordered_map<std::string_view, const Headline*> by_id;
  for (const Headline& h : gold.headlines) by_id.emplace(h.id, &h);

  std::unordered_map<std::string_view, const HeadlinePrediction*> pred_by_id;
  for (const HeadlinePrediction& p : predictions) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      throw ValidationError("prediction for unknown headline id '" + p.id + "'");
    }
    try {
      validate_spans(p.spans, it->second->tokens.size());
    } catch (const ValidationError& e) {
      throw ValidationError("prediction for headline '" + p.id + "': " + e.what());
    }
    if (!pred_by_id.emplace(p.id, &p).second) {
      throw ValidationError("duplicate prediction for headline id '" + p.id + "'");
    }
  }

  EvalReport report;
  report.mode = mode;
  static const std::vector<LabeledSpan> kNone;
  for (const Headline& h : gold.headlines) {
    const auto it = pred_by_id.find(h.id);
    const std::vector<LabeledSpan> g = filtered(h.gold, mode);
    const std::vector<LabeledSpan> p =
        filtered(it == pred_by_id.end() ? kNone : it->second->spans, mode);
    count_label(g, p, Label::kEng, report.eng);
    count_label(g, p, Label::kOther, report.other);
    count_boundaries(g, p, report.borrowing);
  }
  return report;
}

void render_report(const EvalReport& report, const std::string& set_name,
                   std::ostream& out) {
  out << set_name << " (" << mode_name(report.mode) << ")\n";
  char header[160];
  std::snprintf(header, sizeof(header), "%-24s %9s %9s %9s %6s %6s %6s\n", "Label",
                "Precision", "Recall", "F1 score", "TP", "FP", "FN");
  out << header;
  row(out, "ENG", report.eng);
  if (report.mode == EvalMode::kWithOther) {
    row(out, "OTHER", report.other);
    row(out, "BORROWING", report.borrowing);
  }
}

void render_report_tsv(const EvalReport& report, const std::string& set_name,
                       std::ostream& out) {
  out << "set\tmode\tlabel\tprecision\trecall\tf1\ttp\tfp\tfn\n";
  const std::string_view mode = mode_name(report.mode);
  tsv_row(out, set_name, mode, "ENG", report.eng);
  tsv_row(out, set_name, mode, "OTHER", report.other);
  tsv_row(out, set_name, mode, "BORROWING", report.borrowing);
}

}  // namespace prestamo
