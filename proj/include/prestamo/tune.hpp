#ifndef PRESTAMO_TUNE_HPP_
#define PRESTAMO_TUNE_HPP_

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prestamo/corpus.hpp"
#include "prestamo/embeddings.hpp"
#include "prestamo/eval.hpp"
#include "prestamo/features.hpp"
#include "prestamo/model.hpp"

namespace prestamo {

/// One embedding option of the grid; a null table means "none" and turns
/// the embedding family off for that point.
struct EmbeddingChoice {
  std::string name;
  std::shared_ptr<const EmbeddingTable> table;
};

struct GridSpec {
  std::vector<double> c1;
  std::vector<double> c2;
  std::vector<double> scaling;
  std::vector<EmbeddingChoice> embeddings;

  std::size_t size() const {
    return c1.size() * c2.size() * scaling.size() * embeddings.size();
  }
  /// Throws ConfigError on empty lists, negative coefficients or
  /// non-positive scalings.
  void validate() const;
};

struct GridPoint {
  double c1 = 0.0;
  double c2 = 0.0;
  double scaling = 1.0;
  std::size_t embedding = 0;  // position in GridSpec::embeddings
};

/// Grid points in enumeration order: c1 outermost, then c2, scaling,
/// embedding.
std::vector<GridPoint> enumerate_grid(const GridSpec& grid);

struct GridResult {
  GridPoint point;
  std::size_t grid_index = 0;
  bool failed = false;
  std::string error;
  EvalReport dev;
  std::size_t iterations = 0;
  optimize::Status status = optimize::Status::kMaxIterations;
};

struct TuneResult {
  /// Successful points by dev ENG F1 (descending, ties by smaller c1, c2,
  /// scaling, then embedding order), followed by failed points in grid
  /// order.
  std::vector<GridResult> ranked;

  /// First successful point; nullptr when every point failed.
  const GridResult* best() const;
};

/// Trains one ignore-OTHER model per grid point and scores it on `dev`
/// without OTHER. Training failures mark the point failed and the sweep
/// continues. `jobs` > 1 runs points on worker threads; the result does
/// not depend on it.
TuneResult grid_search(const Corpus& train, const Corpus& dev,
                       const FeatureConfig& features, const GridSpec& grid,
                       const TrainConfig& base, std::size_t jobs = 1);

void render_tune_tsv(const TuneResult& result, const GridSpec& grid, std::ostream& out);
void render_tune_text(const TuneResult& result, const GridSpec& grid, std::ostream& out);

struct AblationRow {
  std::optional<FeatureFamily> removed;  // nullopt for the all-features row
  bool failed = false;
  std::string error;
  EvalReport dev;
  std::size_t iterations = 0;
  /// Row F1 minus all-features F1, both taken at two decimals.
  double delta_f1 = 0.0;

  std::string title() const;
};

struct AblationTable {
  std::vector<AblationRow> rows;
};

/// All-features model plus one model per enabled family with that family
/// disabled; all ignore OTHER.
AblationTable ablate(const Corpus& train, const Corpus& dev,
                     const FeatureConfig& features, const EmbeddingTable* embeddings,
                     const TrainConfig& config, std::size_t jobs = 1);

void render_ablation_tsv(const AblationTable& table, std::ostream& out);
void render_ablation_text(const AblationTable& table, std::ostream& out);

}  // namespace prestamo

#endif  // PRESTAMO_TUNE_HPP_
