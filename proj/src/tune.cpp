#include "prestamo/tune.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <ostream>
#include <thread>

#include "prestamo/error.hpp"
#include "prestamo/format.hpp"

namespace prestamo {

namespace {

// Runs task(i) for i in [0, n) on up to `jobs` threads.
void run_indexed(std::size_t n, std::size_t jobs,
                 const std::function<void(std::size_t)>& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (std::thread& t : workers) t.join();
}

struct RunOutcome {
  bool failed = false;
  std::string error;
  EvalReport dev;
  std::size_t iterations = 0;
  optimize::Status status = optimize::Status::kMaxIterations;
};

RunOutcome train_and_score(const Corpus& train, const Corpus& dev,
                           const FeatureConfig& features,
                           const EmbeddingTable* embeddings,
                           const TrainConfig& config) {
  RunOutcome out;
  try {
    const TrainResult fit =
        prestamo::train(train, features, embeddings, config, TagAlphabet::ignore_other());
    const Corpus tagged = tag(fit.model, dev, embeddings);
    out.dev = evaluate(dev, predictions_from_tagged(tagged), EvalMode::kWithoutOther);
    out.iterations = fit.iterations;
    out.status = fit.status;
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

std::string pad(std::string_view text, std::size_t width) {
  std::string s(text);
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

void GridSpec::validate() const {
  if (c1.empty() || c2.empty() || scaling.empty() || embeddings.empty()) {
    throw ConfigError("every grid dimension needs at least one value");
  }
  for (double v : c1) {
    if (!(v >= 0.0)) throw ConfigError("grid c1 values must be >= 0");
  }
  for (double v : c2) {
    if (!(v >= 0.0)) throw ConfigError("grid c2 values must be >= 0");
  }
  for (double v : scaling) {
    if (!(v > 0.0)) throw ConfigError("grid scaling values must be > 0");
  }
}

std::vector<GridPoint> enumerate_grid(const GridSpec& grid) {
  std::vector<GridPoint> points;
  points.reserve(grid.size());
  for (double c1 : grid.c1) {
    for (double c2 : grid.c2) {
      for (double s : grid.scaling) {
        for (std::size_t e = 0; e < grid.embeddings.size(); ++e) {
          points.push_back({c1, c2, s, e});
        }
      }
    }
  }
  return points;
}

const GridResult* TuneResult::best() const {
  if (ranked.empty() || ranked.front().failed) return nullptr;
  return &ranked.front();
}

TuneResult grid_search(const Corpus& train, const Corpus& dev,
                       const FeatureConfig& features, const GridSpec& grid,
                       const TrainConfig& base, std::size_t jobs) {
  grid.validate();
  const std::vector<GridPoint> points = enumerate_grid(grid);
  std::vector<GridResult> results(points.size());

  run_indexed(points.size(), jobs, [&](std::size_t i) {
    const GridPoint& p = points[i];
    const EmbeddingChoice& choice = grid.embeddings[p.embedding];
    FeatureConfig fc = features;
    fc.embedding_scaling = p.scaling;
    if (!choice.table) fc.set(FeatureFamily::kEmbedding, false);
    TrainConfig tc = base;
    tc.c1 = p.c1;
    tc.c2 = p.c2;
    const RunOutcome run = train_and_score(train, dev, fc, choice.table.get(), tc);
    results[i] = GridResult{p, i, run.failed, run.error, run.dev, run.iterations, run.status};
  });

  std::stable_sort(results.begin(), results.end(),
                   [](const GridResult& a, const GridResult& b) {
                     if (a.failed != b.failed) return !a.failed;
                     if (a.failed) return a.grid_index < b.grid_index;
                     const double fa = a.dev.eng.f1();
                     const double fb = b.dev.eng.f1();
                     if (fa != fb) return fa > fb;
                     if (a.point.c1 != b.point.c1) return a.point.c1 < b.point.c1;
                     if (a.point.c2 != b.point.c2) return a.point.c2 < b.point.c2;
                     if (a.point.scaling != b.point.scaling) return a.point.scaling < b.point.scaling;
                     if (a.point.embedding != b.point.embedding) return a.point.embedding < b.point.embedding;
                     return a.grid_index < b.grid_index;
                   });
  return TuneResult{std::move(results)};
}

void render_tune_tsv(const TuneResult& result, const GridSpec& grid, std::ostream& out) {
  out << "rank\tc1\tc2\tscaling\tembedding\tprecision\trecall\tf1\ttp\tfp\tfn\t"
         "iterations\tstatus\n";
  for (std::size_t r = 0; r < result.ranked.size(); ++r) {
    const GridResult& g = result.ranked[r];
    out << (r + 1) << '\t' << format_double(g.point.c1) << '\t'
        << format_double(g.point.c2) << '\t' << format_double(g.point.scaling) << '\t'
        << grid.embeddings[g.point.embedding].name << '\t';
    if (g.failed) {
      out << "-\t-\t-\t-\t-\t-\t-\tfailed\n";
      continue;
    }
    const LabelScores& s = g.dev.eng;
    out << format_fixed2(s.precision()) << '\t' << format_fixed2(s.recall()) << '\t'
        << format_fixed2(s.f1()) << '\t' << s.tp << '\t' << s.fp << '\t' << s.fn << '\t'
        << g.iterations << '\t' << optimize::status_name(g.status) << '\n';
  }
}

void render_tune_text(const TuneResult& result, const GridSpec& grid, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%4s %8s %8s %8s  %-20s %9s %9s %9s\n", "Rank", "c1",
                "c2", "Scaling", "Embedding", "Precision", "Recall", "F1 score");
  out << buf;
  for (std::size_t r = 0; r < result.ranked.size(); ++r) {
    const GridResult& g = result.ranked[r];
    const std::string emb = pad(grid.embeddings[g.point.embedding].name, 20);
    if (g.failed) {
      std::snprintf(buf, sizeof(buf), "%4zu %8s %8s %8s  %s %9s  (%s)\n", r + 1,
                    format_double(g.point.c1).c_str(), format_double(g.point.c2).c_str(),
                    format_double(g.point.scaling).c_str(), emb.c_str(), "failed",
                    g.error.c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "%4zu %8s %8s %8s  %s %9s %9s %9s\n", r + 1,
                    format_double(g.point.c1).c_str(), format_double(g.point.c2).c_str(),
                    format_double(g.point.scaling).c_str(), emb.c_str(),
                    format_fixed2(g.dev.eng.precision()).c_str(),
                    format_fixed2(g.dev.eng.recall()).c_str(),
                    format_fixed2(g.dev.eng.f1()).c_str());
    }
    out << buf;
  }
}

std::string AblationRow::title() const {
  if (!removed) return "All features";
  return "- " + std::string(family_title(*removed));
}

AblationTable ablate(const Corpus& train, const Corpus& dev,
                     const FeatureConfig& features, const EmbeddingTable* embeddings,
                     const TrainConfig& config, std::size_t jobs) {
  features.validate();
  AblationTable table;
  table.rows.emplace_back();
  for (FeatureFamily family : kAllFamilies) {
    if (features.has(family)) {
      AblationRow row;
      row.removed = family;
      table.rows.push_back(row);
    }
  }

  run_indexed(table.rows.size(), jobs, [&](std::size_t i) {
    AblationRow& row = table.rows[i];
    const FeatureConfig fc = row.removed ? features.without(*row.removed) : features;
    const RunOutcome run = train_and_score(train, dev, fc, embeddings, config);
    row.failed = run.failed;
    row.error = run.error;
    row.dev = run.dev;
    row.iterations = run.iterations;
  });

  const AblationRow& all = table.rows.front();
  for (AblationRow& row : table.rows) {
    if (row.failed || all.failed) continue;
    const std::int64_t diff =
        to_hundredths(row.dev.eng.f1()) - to_hundredths(all.dev.eng.f1());
    row.delta_f1 = static_cast<double>(diff) / 100.0;
  }
  return table;
}

void render_ablation_tsv(const AblationTable& table, std::ostream& out) {
  out << "features\tprecision\trecall\tf1\tf1_change\ttp\tfp\tfn\titerations\n";
  for (const AblationRow& row : table.rows) {
    out << row.title() << '\t';
    if (row.failed) {
      out << "-\t-\t-\t-\t-\t-\t-\t-\n";
      continue;
    }
    const LabelScores& s = row.dev.eng;
    out << format_fixed2(s.precision()) << '\t' << format_fixed2(s.recall()) << '\t'
        << format_fixed2(s.f1()) << '\t' << (row.removed ? format_fixed2(row.delta_f1) : "")
        << '\t' << s.tp << '\t' << s.fp << '\t' << s.fn << '\t' << row.iterations << '\n';
  }
}

void render_ablation_text(const AblationTable& table, std::ostream& out) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-18s %9s %9s %9s %9s\n", "Features", "Precision",
                "Recall", "F1 score", "F1 change");
  out << buf;
  for (const AblationRow& row : table.rows) {
    if (row.failed) {
      std::snprintf(buf, sizeof(buf), "%-18s %9s  (%s)\n", row.title().c_str(), "failed",
                    row.error.c_str());
    } else {
      const LabelScores& s = row.dev.eng;
      std::snprintf(buf, sizeof(buf), "%-18s %9s %9s %9s %9s\n", row.title().c_str(),
                    format_fixed2(s.precision()).c_str(), format_fixed2(s.recall()).c_str(),
                    format_fixed2(s.f1()).c_str(),
                    row.removed ? format_fixed2(row.delta_f1).c_str() : "");
    }
    out << buf;
  }
}

}  // namespace prestamo
