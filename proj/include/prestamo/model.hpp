#ifndef PRESTAMO_MODEL_HPP_
#define PRESTAMO_MODEL_HPP_

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "prestamo/corpus.hpp"
#include "prestamo/crf.hpp"
#include "prestamo/embeddings.hpp"
#include "prestamo/features.hpp"
#include "prestamo/optimize.hpp"

namespace prestamo {

struct TrainConfig {
  double c1 = 0.05;
  double c2 = 0.01;
  double delta = 1e-3;
  std::size_t period = 10;
  std::size_t max_iterations = std::numeric_limits<std::size_t>::max();
  std::size_t lbfgs_memory = 6;

  /// Throws ConfigError on negative coefficients, delta <= 0, or zero
  /// period/max_iterations/memory.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct CrfModel {
  TagAlphabet alphabet = TagAlphabet::full();
  FeatureIndex index;
  FeatureConfig features;
  /// Name of the embedding table used in training; empty when none.
  std::string embedding_source;
  TrainConfig train_config;
  crf::Parameters weights;

  friend bool operator==(const CrfModel&, const CrfModel&) = default;
};

struct TrainResult {
  CrfModel model;
  optimize::Status status = optimize::Status::kMaxIterations;
  std::size_t iterations = 0;
  /// Full objective at w = 0 and after every accepted iteration.
  std::vector<double> trace;
};

/// Maps attribute vectors to compiled features; unknown names are dropped.
crf::Sequence compile(const FeatureIndex& index,
                      std::span<const AttributeVector> attrs);

/// Gold tags in the model's alphabet. Tags the alphabet lacks (OTHER under
/// the ignore-OTHER view) become O.
std::vector<std::size_t> label_indices(const TagAlphabet& alphabet,
                                       std::span<const LabeledSpan> spans,
                                       std::size_t length);

double score_sequence(const CrfModel& model, std::span<const AttributeVector> attrs,
                      std::span<const Tag> tags);
double log_partition(const CrfModel& model, std::span<const AttributeVector> attrs);
std::vector<Tag> viterbi(const CrfModel& model, std::span<const AttributeVector> attrs);

/// Minimizes NLL + c1*||w||_1 + (c2/2)*||w||^2 from w = 0. A line-search
/// failure ends training early with status kLineSearchFailed.
TrainResult train(const Corpus& corpus, const FeatureConfig& features,
                  const EmbeddingTable* embeddings, const TrainConfig& config,
                  const TagAlphabet& alphabet,
                  const optimize::Progress& progress = {});

/// Copy of `corpus` with `predicted` filled by Viterbi decoding.
Corpus tag(const CrfModel& model, const Corpus& corpus,
           const EmbeddingTable* embeddings);

void save_model(const CrfModel& model, std::ostream& out);
CrfModel load_model(std::istream& in);
void save_model_file(const CrfModel& model, const std::string& path);
CrfModel load_model_file(const std::string& path);

}  // namespace prestamo

#endif  // PRESTAMO_MODEL_HPP_
