#include "prestamo/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "prestamo/error.hpp"

namespace prestamo::crf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

// alpha[t][j]: log-sum of all prefixes ending in j at t, emission included.
std::vector<double> forward(const Parameters& p, std::span<const double> emit,
                            std::size_t n) {
  const std::size_t L = p.labels();
  std::vector<double> alpha(n * L);
  std::vector<double> scratch(L);
  for (std::size_t j = 0; j < L; ++j) alpha[j] = p.start(j) + emit[j];
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t i = 0; i < L; ++i) {
        scratch[i] = alpha[(t - 1) * L + i] + p.transition(i, j);
      }
      alpha[t * L + j] = log_sum_exp(scratch) + emit[t * L + j];
    }
  }
  return alpha;
}

// beta[t][i]: log-sum of all suffixes after t given label i at t, end
// weight included.
std::vector<double> backward(const Parameters& p, std::span<const double> emit,
                             std::size_t n) {
  const std::size_t L = p.labels();
  std::vector<double> beta(n * L);
  std::vector<double> scratch(L);
  for (std::size_t i = 0; i < L; ++i) beta[(n - 1) * L + i] = p.end(i);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) {
        scratch[j] = p.transition(i, j) + emit[(t + 1) * L + j] +
                     beta[(t + 1) * L + j];
      }
      beta[t * L + i] = log_sum_exp(scratch);
    }
  }
  return beta;
}

double final_log_z(const Parameters& p, std::span<const double> alpha,
                   std::size_t n) {
  const std::size_t L = p.labels();
  std::vector<double> scratch(L);
  for (std::size_t j = 0; j < L; ++j) {
    scratch[j] = alpha[(n - 1) * L + j] + p.end(j);
  }
  return log_sum_exp(scratch);
}

void require_nonempty(const Sequence& seq) {
  if (seq.empty()) throw std::invalid_argument("empty sequence");
}

}  // namespace

Parameters::Parameters(std::size_t attributes, std::size_t labels)
    : attributes_(attributes),
      labels_(labels),
      values_(count(attributes, labels), 0.0) {}

Parameters::Parameters(std::size_t attributes, std::size_t labels,
                       std::vector<double> values)
    : attributes_(attributes), labels_(labels), values_(std::move(values)) {
  if (values_.size() != count(attributes, labels)) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
}

std::vector<double> emissions(const Parameters& params, const Sequence& seq) {
  const std::size_t L = params.labels();
  std::vector<double> emit(seq.size() * L, 0.0);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    double* row = emit.data() + t * L;
    for (const Feature& f : seq[t]) {
      if (f.id >= params.attributes()) continue;
      const double* w = params.values().data() + params.state_index(f.id, 0);
      for (std::size_t j = 0; j < L; ++j) row[j] += f.value * w[j];
    }
  }
  return emit;
}

double score(const Parameters& params, const Sequence& seq,
             std::span<const std::size_t> labels) {
  require_nonempty(seq);
  if (labels.size() != seq.size()) {
    throw std::invalid_argument("label sequence length " +
                                std::to_string(labels.size()) +
                                " does not match observation length " +
                                std::to_string(seq.size()));
  }
  for (std::size_t y : labels) {
    if (y >= params.labels()) throw std::invalid_argument("label index out of range");
  }
  double s = params.start(labels.front()) + params.end(labels.back());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (const Feature& f : seq[t]) {
      if (f.id < params.attributes()) s += f.value * params.state(f.id, labels[t]);
    }
    if (t > 0) s += params.transition(labels[t - 1], labels[t]);
  }
  return s;
}

double log_partition(const Parameters& params, const Sequence& seq) {
  require_nonempty(seq);
  const std::vector<double> emit = emissions(params, seq);
  const std::vector<double> alpha = forward(params, emit, seq.size());
  return final_log_z(params, alpha, seq.size());
}

std::vector<std::size_t> viterbi(const Parameters& params, const Sequence& seq) {
  require_nonempty(seq);
  const std::size_t n = seq.size();
  const std::size_t L = params.labels();
  const std::vector<double> emit = emissions(params, seq);

  std::vector<double> best(L);
  std::vector<double> next(L);
  std::vector<std::size_t> back(n * L, 0);
  for (std::size_t j = 0; j < L; ++j) best[j] = params.start(j) + emit[j];
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < L; ++j) {
      double top = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < L; ++i) {
        const double s = best[i] + params.transition(i, j);
        if (s > top) {  // strict: the lower index keeps ties
          top = s;
          arg = i;
        }
      }
      next[j] = top + emit[t * L + j];
      back[t * L + j] = arg;
    }
    std::swap(best, next);
  }

  std::size_t last = 0;
  double top = kNegInf;
  for (std::size_t j = 0; j < L; ++j) {
    const double s = best[j] + params.end(j);
    if (s > top) {
      top = s;
      last = j;
    }
  }
  std::vector<std::size_t> path(n);
  path[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t * L + path[t]];
  return path;
}

Marginals marginals(const Parameters& params, const Sequence& seq) {
  require_nonempty(seq);
  const std::size_t n = seq.size();
  const std::size_t L = params.labels();
  const std::vector<double> emit = emissions(params, seq);
  const std::vector<double> alpha = forward(params, emit, n);
  const std::vector<double> beta = backward(params, emit, n);

  Marginals m;
  m.log_z = final_log_z(params, alpha, n);
  m.node.resize(n * L);
  for (std::size_t k = 0; k < n * L; ++k) {
    m.node[k] = std::exp(alpha[k] + beta[k] - m.log_z);
  }
  if (n > 1) {
    m.edge.resize((n - 1) * L * L);
    for (std::size_t t = 1; t < n; ++t) {
      double* e = m.edge.data() + (t - 1) * L * L;
      for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < L; ++j) {
          e[i * L + j] = std::exp(alpha[(t - 1) * L + i] + params.transition(i, j) +
                                  emit[t * L + j] + beta[t * L + j] - m.log_z);
        }
      }
    }
  }
  return m;
}

double nll_and_gradient(const Parameters& params,
                        std::span<const Instance> data, double c2,
                        std::vector<double>& gradient) {
  if (data.empty()) throw std::invalid_argument("no training instances");
  const std::size_t L = params.labels();
  const auto w = params.values();
  gradient.assign(w.size(), 0.0);

  double value = 0.0;
  for (const Instance& inst : data) {
    const Marginals m = marginals(params, inst.features);
    value += m.log_z - score(params, inst.features, inst.labels);

    const std::size_t n = inst.features.size();
    for (std::size_t t = 0; t < n; ++t) {
      const double* node = m.node.data() + t * L;
      const std::size_t gold = inst.labels[t];
      for (const Feature& f : inst.features[t]) {
        if (f.id >= params.attributes()) continue;
        double* g = gradient.data() + params.state_index(f.id, 0);
        for (std::size_t j = 0; j < L; ++j) g[j] += f.value * node[j];
        g[gold] -= f.value;
      }
    }
    for (std::size_t t = 1; t < n; ++t) {
      const double* e = m.edge.data() + (t - 1) * L * L;
      double* g = gradient.data() + params.transition_offset();
      for (std::size_t k = 0; k < L * L; ++k) g[k] += e[k];
      g[inst.labels[t - 1] * L + inst.labels[t]] -= 1.0;
    }
    for (std::size_t j = 0; j < L; ++j) {
      gradient[params.start_offset() + j] += m.node[j];
      gradient[params.end_offset() + j] += m.node[(n - 1) * L + j];
    }
    gradient[params.start_offset() + inst.labels.front()] -= 1.0;
    gradient[params.end_offset() + inst.labels.back()] -= 1.0;
  }

  if (c2 != 0.0) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      norm2 += w[k] * w[k];
      gradient[k] += c2 * w[k];
    }
    value += 0.5 * c2 * norm2;
  }

  if (!std::isfinite(value)) {
    throw DivergenceError("objective is not finite");
  }
  for (double g : gradient) {
    if (!std::isfinite(g)) throw DivergenceError("gradient is not finite");
  }
  return value;
}

}  // namespace prestamo::crf
