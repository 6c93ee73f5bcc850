#ifndef PRESTAMO_EVAL_HPP_
#define PRESTAMO_EVAL_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "prestamo/corpus.hpp"

namespace prestamo {

enum class EvalMode { kWithOther, kWithoutOther };

/// Predicted spans for one headline, keyed by headline id.
struct HeadlinePrediction {
  std::string id;
  std::vector<LabeledSpan> spans;
};

using Predictions = std::vector<HeadlinePrediction>;

/// Predictions taken from the `predicted` field of a tagged corpus.
Predictions predictions_from_tagged(const Corpus& tagged);
/// Predictions taken from the span column of a corpus read from a
/// prediction file.
Predictions predictions_from_file_corpus(const Corpus& corpus);

/// F1 of two percentages; 0 when both are 0.
double f1(double precision, double recall);

struct LabelScores {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  friend bool operator==(const LabelScores&, const LabelScores&) = default;
};

struct EvalReport {
  EvalMode mode = EvalMode::kWithOther;
  LabelScores eng;
  LabelScores other;
  /// Boundary-only matching, label ignored.
  LabelScores borrowing;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Exact-match span scoring. A prediction is a true positive only when a
/// gold span in the same headline has identical start, end and label.
/// Throws ValidationError for predictions whose id is not in `gold` or
/// whose spans fall outside the headline; gold headlines without
/// predictions count as predicting nothing.
EvalReport evaluate(const Corpus& gold, const Predictions& predictions,
                    EvalMode mode);

/// Aligned text table: one row per label plus BORROWING.
void render_report(const EvalReport& report, const std::string& set_name,
                   std::ostream& out);
/// Machine-readable variant with raw counts.
void render_report_tsv(const EvalReport& report, const std::string& set_name,
                       std::ostream& out);

}  // namespace prestamo

#endif  // PRESTAMO_EVAL_HPP_
