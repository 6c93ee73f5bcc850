#ifndef PRESTAMO_CRF_HPP_
#define PRESTAMO_CRF_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Linear-chain CRF over compiled (integer-id) features. All inference runs
// in log space.
namespace prestamo::crf {

struct Feature {
  std::uint32_t id = 0;
  double value = 1.0;
};

/// Compiled observation sequence: the active features at each position.
using Sequence = std::vector<std::vector<Feature>>;

struct Instance {
  Sequence features;
  std::vector<std::size_t> labels;
};

/// Flat parameter vector laid out as
///   state      [attributes x labels]  (attribute-major)
///   transition [labels x labels]      (from, to)
///   start      [labels]
///   end        [labels]
class Parameters {
 public:
  Parameters() = default;
  Parameters(std::size_t attributes, std::size_t labels);
  Parameters(std::size_t attributes, std::size_t labels,
             std::vector<double> values);

  static std::size_t count(std::size_t attributes, std::size_t labels) {
    return attributes * labels + labels * labels + 2 * labels;
  }

  std::size_t attributes() const { return attributes_; }
  std::size_t labels() const { return labels_; }
  std::size_t size() const { return values_.size(); }

  double state(std::size_t attribute, std::size_t label) const {
    return values_[attribute * labels_ + label];
  }
  double transition(std::size_t from, std::size_t to) const {
    return values_[transition_offset() + from * labels_ + to];
  }
  double start(std::size_t label) const { return values_[start_offset() + label]; }
  double end(std::size_t label) const { return values_[end_offset() + label]; }

  std::size_t state_index(std::size_t attribute, std::size_t label) const {
    return attribute * labels_ + label;
  }
  std::size_t transition_offset() const { return attributes_ * labels_; }
  std::size_t start_offset() const { return transition_offset() + labels_ * labels_; }
  std::size_t end_offset() const { return start_offset() + labels_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  std::size_t attributes_ = 0;
  std::size_t labels_ = 0;
  std::vector<double> values_;
};

/// Per-position label scores [n x labels]; features with ids outside the
/// parameter block contribute nothing.
std::vector<double> emissions(const Parameters& params, const Sequence& seq);

/// Unnormalized log score of a label path. Throws std::invalid_argument on
/// length mismatch or empty input.
double score(const Parameters& params, const Sequence& seq,
             std::span<const std::size_t> labels);

double log_partition(const Parameters& params, const Sequence& seq);

/// Highest-scoring path. Ties go to the lower label index at every
/// decision, so an all-zero model yields label 0 everywhere.
std::vector<std::size_t> viterbi(const Parameters& params, const Sequence& seq);

/// Node and edge marginals from forward-backward.
struct Marginals {
  double log_z = 0.0;
  std::vector<double> node;  // [n x labels]
  std::vector<double> edge;  // [(n-1) x labels x labels]
};

Marginals marginals(const Parameters& params, const Sequence& seq);

/// Smooth objective: sum over instances of (logZ - gold score) plus
/// (c2/2)||w||^2. Writes the gradient into `gradient` (resized to match).
/// Throws DivergenceError on non-finite intermediate values.
double nll_and_gradient(const Parameters& params,
                        std::span<const Instance> data, double c2,
                        std::vector<double>& gradient);

}  // namespace prestamo::crf

#endif  // PRESTAMO_CRF_HPP_
