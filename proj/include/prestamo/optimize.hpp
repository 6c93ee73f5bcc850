#ifndef PRESTAMO_OPTIMIZE_HPP_
#define PRESTAMO_OPTIMIZE_HPP_

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

// Limited-memory quasi-Newton minimization of f(x) + c1 * ||x||_1 where f
// is smooth. With c1 > 0 the orthant-wise variant (OWL-QN) is used so that
// the L1 term is handled exactly and weights can land on zero.
namespace prestamo::optimize {

/// Smooth part: returns f(x) and writes its gradient.
using Objective = std::function<double(std::span<const double> x,
                                       std::vector<double>& gradient)>;

/// Called after every accepted iteration with the full objective.
using Progress = std::function<void(std::size_t iteration, double objective,
                                    double step)>;

struct Options {
  double c1 = 0.0;
  std::size_t memory = 6;
  double delta = 1e-3;
  std::size_t period = 10;
  std::size_t max_iterations = std::numeric_limits<std::size_t>::max();
  double epsilon = 1e-5;
  std::size_t max_linesearch = 40;
  double ftol = 1e-4;
};

enum class Status {
  kConverged,         // (pseudo-)gradient norm test
  kDeltaReached,      // relative improvement over `period` iterations < delta
  kMaxIterations,
  kLineSearchFailed,  // returned the last accepted point
};

std::string_view status_name(Status status);

struct Result {
  std::vector<double> x;
  double objective = 0.0;
  /// Full objective at the start point and after each accepted iteration.
  std::vector<double> trace;
  std::size_t iterations = 0;
  Status status = Status::kMaxIterations;
};

Result minimize(const Objective& objective, std::vector<double> x0,
                const Options& options, const Progress& progress = {});

}  // namespace prestamo::optimize

#endif  // PRESTAMO_OPTIMIZE_HPP_
