// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "prestamo/cli.hpp"
#include "prestamo/corpus.hpp"
#include "prestamo/crf.hpp"
#include "prestamo/eval.hpp"
#include "prestamo/format.hpp"
#include "prestamo/model.hpp"
#include "prestamo/tune.hpp"
#include "synthetic.hpp"

using namespace prestamo;
namespace fs = std::filesystem;

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass(std::string d) { return {Verdict::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::kFail, std::move(d)}; }
Outcome check(bool ok, std::string d) { return {ok ? Verdict::kPass : Verdict::kFail, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

const Corpus& synthetic_train() {
  static const Corpus c = testing::synthetic_corpus(1, 200, "train");
  return c;
}

const EmbeddingTable& synthetic_table() {
  static const EmbeddingTable t = testing::synthetic_embeddings(synthetic_train());
  return t;
}

TrainConfig train_config(double c1, double c2, std::size_t max_iterations = 200) {
  TrainConfig c;
  c.c1 = c1;
  c.c2 = c2;
  c.max_iterations = max_iterations;
  return c;
}

// 1
Outcome inference_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  testing::Rng rng(1001);
  double worst = 0.0;
  std::size_t viterbi_mismatch = 0;
  for (int m = 0; m < 50; ++m) {
    const std::size_t k = rng.between(1, 6);
    const std::size_t l = rng.between(1, 4);
    const std::size_t n = rng.between(1, 5);
    crf::Parameters p = testing::random_parameters(rng, k, l, 3.0);
    if (m % 5 == 0) {
      // Integer weights produce exact ties for the tie-break rule.
      for (double& v : p.values()) v = std::round(v / 3.0);
    }
    crf::Sequence seq = testing::random_sequence(rng, n, k);
    if (m % 5 == 0) {
      for (auto& pos : seq) {
        for (auto& f : pos) f.value = 1.0;
      }
    }
    worst = std::max(worst, std::abs(crf::log_partition(p, seq) -
                                     testing::enumerated_log_partition(p, seq)));
    viterbi_mismatch += crf::viterbi(p, seq) != testing::enumerated_viterbi(p, seq);
  }
  const double secs = seconds_since(t0);
  return check(worst < 1e-8 && viterbi_mismatch == 0 && secs < 10.0,
               "max |logZ error| " + format_double(worst) + ", viterbi mismatches " +
                   std::to_string(viterbi_mismatch) + ", " + fixed(secs, 3) + " s");
}

// 2
Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  testing::Rng rng(2002);
  const double h = 1e-4;
  double worst = 0.0;
  std::size_t coords = 0;
  for (int inst = 0; inst < 10; ++inst) {
    for (double c2 : {0.0, 0.5}) {
      const std::size_t k = rng.between(1, 4);
      const std::size_t l = rng.between(2, 4);
      std::vector<crf::Instance> data(rng.between(1, 3));
      for (auto& d : data) {
        d.features = testing::random_sequence(rng, rng.between(1, 5), k);
        for (std::size_t t = 0; t < d.features.size(); ++t) d.labels.push_back(rng.below(l));
      }
      crf::Parameters p = testing::random_parameters(rng, k, l, 1.0);
      std::vector<double> grad;
      std::vector<double> scratch;
      crf::nll_and_gradient(p, data, c2, grad);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p.values()[i];
        p.values()[i] = saved + h;
        const double up = crf::nll_and_gradient(p, data, c2, scratch);
        p.values()[i] = saved - h;
        const double down = crf::nll_and_gradient(p, data, c2, scratch);
        p.values()[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
        ++coords;
      }
    }
  }
  const double secs = seconds_since(t0);
  return check(worst < 1e-5 && secs < 30.0,
               std::to_string(coords) + " coordinates, max relative error " +
                   format_double(worst) + ", " + fixed(secs, 3) + " s");
}

// 3
Outcome learnability() {
  const TrainResult r = train(synthetic_train(), FeatureConfig{}, &synthetic_table(),
                              train_config(0.0, 0.01), TagAlphabet::full());
  bool monotone = true;
  for (std::size_t i = 1; i < r.trace.size(); ++i) monotone &= r.trace[i] <= r.trace[i - 1];
  const Corpus tagged = tag(r.model, synthetic_train(), &synthetic_table());
  const EvalReport rep =
      evaluate(synthetic_train(), predictions_from_tagged(tagged), EvalMode::kWithOther);
  const bool perfect =
      rep.eng.f1() == 100.0 && rep.other.f1() == 100.0 && rep.borrowing.f1() == 100.0;
  return check(perfect && monotone && r.iterations <= 200,
               "F1 ENG " + format_fixed2(rep.eng.f1()) + " OTHER " + format_fixed2(rep.other.f1()) +
                   " BORROWING " + format_fixed2(rep.borrowing.f1()) + ", " +
                   std::to_string(r.iterations) + " iterations (" +
                   std::string(optimize::status_name(r.status)) + "), trace " +
                   (monotone ? "non-increasing" : "INCREASES"));
}

// 4
Outcome regularization() {
  auto fit = [](double c1, double c2) {
    return train(synthetic_train(), FeatureConfig{}, &synthetic_table(), train_config(c1, c2),
                 TagAlphabet::full())
        .model;
  };
  auto l2 = [](const CrfModel& m) {
    double s = 0.0;
    for (double v : m.weights.values()) s += v * v;
    return std::sqrt(s);
  };
  auto zeros = [](const CrfModel& m) {
    std::size_t n = 0;
    for (double v : m.weights.values()) n += v == 0.0;
    return n;
  };
  const double weak = l2(fit(0.0, 0.01));
  const double strong = l2(fit(0.0, 1.0));
  const std::size_t dense = zeros(fit(0.0, 0.0));
  const std::size_t sparse = zeros(fit(1.0, 0.0));
  return check(strong < weak && sparse >= dense,
               "||w|| c2=1.0: " + fixed(strong, 4) + " < c2=0.01: " + fixed(weak, 4) +
                   "; zero weights c1=1.0: " + std::to_string(sparse) +
                   " >= c1=0: " + std::to_string(dense));
}

// 5
Outcome reference_arithmetic() {
  struct Case {
    double p;
    double r;
    const char* reported;
  };
  const Case cases[] = {{97.84, 82.65, "89.60"}, {95.05, 81.60, "87.82"}, {100.0, 28.57, "44.44"}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const double value = f1(c.p, c.r);
    const std::int64_t ours = to_hundredths(value);
    const std::int64_t reported = to_hundredths(*parse_double(c.reported));
    ok &= std::llabs(ours - reported) <= 1;
    if (!detail.empty()) detail += "; ";
    detail += "f1(" + format_double(c.p) + ", " + format_double(c.r) + ") = " + fixed(value, 4) +
              " vs " + c.reported;
  }
  // Reported ablation row: -Char trigram.
  const std::int64_t delta =
      to_hundredths(f1(96.05, 77.63)) - to_hundredths(*parse_double("89.60"));
  ok &= delta == -374;
  detail += "; -Char trigram change " + fixed(static_cast<double>(delta) / 100.0) + " vs -3.74";
  return check(ok, detail);
}

// 6
Outcome evaluator_oracle() {
  testing::Rng rng(6006);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Corpus gold;
    Predictions preds;
    for (std::size_t i = rng.between(1, 20); i > 0; --i) {
      Headline h;
      h.id = "h" + std::to_string(i);
      const std::size_t n = rng.between(1, 16);
      for (std::size_t t = 0; t < n; ++t) h.tokens.push_back({"w", {}});
      h.gold = testing::random_spans(rng, n, 8);
      std::vector<LabeledSpan> p;
      if (rng.coin()) {
        for (LabeledSpan s : h.gold) {
          switch (rng.below(4)) {
            case 0: continue;
            case 1: s.label = s.label == Label::kEng ? Label::kOther : Label::kEng; break;
            case 2:
              if (s.end - s.start > 1) --s.end;  // partial match
              break;
            default: break;
          }
          p.push_back(s);
        }
      } else {
        p = testing::random_spans(rng, n, 8);
      }
      preds.push_back({h.id, p});
      gold.headlines.push_back(std::move(h));
    }
    for (EvalMode mode : {EvalMode::kWithOther, EvalMode::kWithoutOther}) {
      const EvalReport r = evaluate(gold, preds, mode);
      const auto o = testing::oracle_evaluate(gold, preds, mode == EvalMode::kWithoutOther);
      auto same = [](const LabelScores& s, const testing::Counts& c) {
        return s.tp == c.tp && s.fp == c.fp && s.fn == c.fn;
      };
      mismatches += !(same(r.eng, o.eng) && same(r.other, o.other) &&
                      same(r.borrowing, o.borrowing));
    }
  }
  return check(mismatches == 0, "100 configurations x 2 modes, mismatches " +
                                    std::to_string(mismatches));
}

// 7
Outcome bio_codec() {
  testing::Rng rng(7007);
  std::size_t round_trip_failures = 0;
  std::size_t repair_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = rng.between(0, 12);
    const auto spans = testing::random_spans(rng, n, 5, 12);
    round_trip_failures += bio_to_spans(spans_to_bio(spans, n)) != spans;

    std::vector<Tag> tags(rng.between(0, 12));
    for (Tag& t : tags) t = static_cast<Tag>(rng.below(5));
    const auto repaired = spans_to_bio(bio_to_spans(tags), tags.size());
    bool well_formed = true;
    for (std::size_t t = 0; t < repaired.size(); ++t) {
      if (is_inside(repaired[t]) &&
          (t == 0 || repaired[t - 1] == Tag::kO ||
           tag_label(repaired[t - 1]) != tag_label(repaired[t]))) {
        well_formed = false;
      }
    }
    repair_failures += !well_formed ||
                       spans_to_bio(bio_to_spans(repaired), repaired.size()) != repaired;
  }
  return check(round_trip_failures == 0 && repair_failures == 0,
               "1000 span sets, 1000 tag sequences; round-trip failures " +
                   std::to_string(round_trip_failures) + ", repair failures " +
                   std::to_string(repair_failures));
}

// 8
Outcome persistence() {
  const TrainResult r = train(synthetic_train(), FeatureConfig{}, &synthetic_table(),
                              train_config(0.05, 0.01), TagAlphabet::full());
  std::stringstream file;
  save_model(r.model, file);
  const CrfModel loaded = load_model(file);
  Corpus fixed_corpus = read_corpus_file(PRESTAMO_DATA_DIR "/sample.tsv");
  const Corpus extra = testing::synthetic_corpus(808, 50, "fixed");
  fixed_corpus.headlines.insert(fixed_corpus.headlines.end(), extra.headlines.begin(),
                                extra.headlines.end());
  std::ostringstream a;
  std::ostringstream b;
  write_corpus(tag(r.model, fixed_corpus, &synthetic_table()), a, SpanColumn::kPredicted);
  write_corpus(tag(loaded, fixed_corpus, &synthetic_table()), b, SpanColumn::kPredicted);
  return check(a.str() == b.str() && loaded == r.model,
               std::to_string(fixed_corpus.headlines.size()) + " headlines, " +
                   std::to_string(a.str().size()) + " bytes of predictions, " +
                   (a.str() == b.str() ? "identical" : "DIFFERENT"));
}

// "89.60" / "-3.74" -> hundredths from the rendered text.
long hundredths_of(const std::string& text) {
  const bool neg = !text.empty() && text.front() == '-';
  const std::string digits = neg ? text.substr(1) : text;
  const auto dot = digits.find('.');
  const long v = std::stol(digits.substr(0, dot)) * 100 + std::stol(digits.substr(dot + 1));
  return neg ? -v : v;
}

std::vector<std::vector<std::string>> tsv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    if (!line.empty() && line.back() == '\t') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

// 9
Outcome ablation_arithmetic() {
  const Corpus train_c = testing::synthetic_corpus(901, 200, "train", 0.1);
  const Corpus dev = testing::synthetic_corpus(902, 80, "dev", 0.3);
  Corpus both = train_c;
  both.headlines.insert(both.headlines.end(), dev.headlines.begin(), dev.headlines.end());
  const EmbeddingTable table = testing::synthetic_embeddings(both);
  const AblationTable result = ablate(train_c, dev, FeatureConfig{}, &table, TrainConfig{}, 4);
  std::ostringstream out;
  render_ablation_tsv(result, out);
  const auto rows = tsv_rows(out.str());
  if (rows.size() != 12) return fail("expected 11 rows, got " + std::to_string(rows.size() - 1));
  const long all = hundredths_of(rows[1][3]);
  std::size_t wrong = 0;
  std::size_t nonzero = 0;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const long delta = hundredths_of(rows[i][4]);
    wrong += delta != hundredths_of(rows[i][3]) - all;
    nonzero += delta != 0;
  }
  return check(wrong == 0 && rows[1][4].empty(),
               "11 rows, all-features F1 " + rows[1][3] + ", " + std::to_string(nonzero) +
                   " non-zero changes, arithmetic mismatches " + std::to_string(wrong));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10
Outcome grid_determinism() {
  const fs::path dir = fs::temp_directory_path() / "prestamo-acceptance-tune";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_corpus_file(testing::synthetic_corpus(1001, 120, "train", 0.1), (dir / "train.tsv").string());
  write_corpus_file(testing::synthetic_corpus(1002, 60, "dev", 0.3), (dir / "dev.tsv").string());
  {
    std::ofstream cfg(dir / "tune.cfg");
    cfg << "train = " << (dir / "train.tsv").string() << "\n"
        << "dev = " << (dir / "dev.tsv").string() << "\n"
        << "embedding = 0\n"
        << "grid_c1 = 0.05, 0\n"
        << "grid_c2 = 0.01, 0.5\n"
        << "grid_scaling = 1, 2\n";
  }
  auto tune = [&](const std::string& out, const std::string& jobs) {
    const std::string cfg = (dir / "tune.cfg").string();
    const std::string path = (dir / out).string();
    const char* argv[] = {"prestamo", "tune", "-c", cfg.c_str(), "-o", path.c_str(), "--jobs",
                          jobs.c_str()};
    std::ostringstream o;
    std::ostringstream e;
    return cli::run(8, argv, o, e);
  };
  const int codes = tune("a.tsv", "1") | tune("b.tsv", "1") | tune("c.tsv", "4");
  const std::string a = slurp(dir / "a.tsv");
  const bool identical = a == slurp(dir / "b.tsv") && a == slurp(dir / "c.tsv");

  // Ranking: F1 descending, then c1, c2, scaling, embedding ascending.
  const auto rows = tsv_rows(a);
  bool ordered = rows.size() == 9;
  std::set<std::tuple<std::string, std::string, std::string>> points;
  std::size_t ties = 0;
  for (std::size_t i = 1; ordered && i < rows.size(); ++i) {
    points.insert({rows[i][1], rows[i][2], rows[i][3]});
    if (i == 1) continue;
    const auto key = [](const std::vector<std::string>& r) {
      return std::make_tuple(-hundredths_of(r[7]), *parse_double(r[1]), *parse_double(r[2]),
                             *parse_double(r[3]));
    };
    if (rows[i][7] == rows[i - 1][7]) ++ties;
    ordered &= key(rows[i - 1]) < key(rows[i]);
  }
  ordered &= points.size() == 8;
  fs::remove_all(dir);
  return check(codes == 0 && identical && ordered,
               "8 grid points, jobs 1/1/4 outputs " + std::string(identical ? "identical" : "DIFFER") +
                   ", ranking " + (ordered ? "ordered" : "NOT ordered") + " (" +
                   std::to_string(ties) + " adjacent F1 ties)");
}

// 11
Outcome reference_corpus() {
  const char* env = std::getenv("PRESTAMO_REFERENCE_CORPUS_DIR");
  if (env == nullptr || *env == '\0') {
    return {Verdict::kSkip, "set PRESTAMO_REFERENCE_CORPUS_DIR to the reference corpus directory to run"};
  }
  const fs::path dir(env);
  struct Row {
    const char* file;
    std::size_t headlines, tokens, with_eng, eng, other;
  };
  const Row rows[] = {{"train.tsv", 10513, 154632, 709, 747, 40},
                      {"dev.tsv", 3020, 44758, 200, 219, 14},
                      {"test.tsv", 3020, 44724, 202, 212, 13}};
  std::string detail;
  bool ok = true;
  Corpus main;
  for (const Row& r : rows) {
    const fs::path p = dir / r.file;
    if (!fs::exists(p)) return fail("missing " + p.string());
    const Corpus c = read_corpus_file(p.string());
    main.headlines.insert(main.headlines.end(), c.headlines.begin(), c.headlines.end());
    const CorpusStats s = corpus_stats(c);
    const bool row_ok = s.headlines == r.headlines && s.tokens == r.tokens &&
                        s.headlines_with_anglicisms == r.with_eng && s.eng_spans == r.eng &&
                        s.other_spans == r.other;
    ok &= row_ok;
    detail += std::string(r.file) + (row_ok ? " ok; " : " MISMATCH; ");
  }
  const std::map<std::string, double> section_percentages = {{"opinion", 2.54}, {"economy", 3.70},
                                                {"lifestyle", 6.48}, {"tv", 8.83},
                                                {"music", 9.25}, {"technology", 15.37}};
  const CorpusStats s = corpus_stats(main);
  for (const auto& [name, section] : s.sections) {
    std::string key;
    for (char c : name) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto it = section_percentages.find(key);
    if (it == section_percentages.end()) continue;
    const bool sec_ok =
        std::llabs(to_hundredths(section.percent_with_eng) - to_hundredths(it->second)) <= 1;
    ok &= sec_ok;
    detail += name + " " + format_fixed2(section.percent_with_eng) + (sec_ok ? "; " : " MISMATCH; ");
  }
  return check(ok, detail);
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Inference oracle", inference_oracle},
      {2, "Gradient check", gradient_check},
      {3, "Learnability", learnability},
      {4, "Regularization behavior", regularization},
      {5, "Evaluation arithmetic", reference_arithmetic},
      {6, "Evaluator oracle", evaluator_oracle},
      {7, "BIO codec", bio_codec},
      {8, "Model persistence", persistence},
      {9, "Ablation harness arithmetic", ablation_arithmetic},
      {10, "Grid determinism", grid_determinism},
      {11, "Public corpus statistics (optional)", reference_corpus},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.verdict == Verdict::kPass ? "PASS" : o.verdict == Verdict::kFail ? "FAIL" : "SKIP";
    failures += o.verdict == Verdict::kFail;
    std::cout << tag << "  " << c.number << ". " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "acceptance: all required criteria passed"
                              : "acceptance: " + std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
