#include "prestamo/optimize.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include "prestamo/error.hpp"

namespace prestamo::optimize {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double l1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

// Minimum-norm subgradient of f + c1 * ||x||_1.
void pseudo_gradient(std::span<const double> x, std::span<const double> g,
                     double c1, std::vector<double>& pg) {
  pg.resize(x.size());
  if (c1 == 0.0) {
    std::copy(g.begin(), g.end(), pg.begin());
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) {
      pg[i] = g[i] - c1;
    } else if (x[i] > 0.0) {
      pg[i] = g[i] + c1;
    } else if (g[i] + c1 < 0.0) {
      pg[i] = g[i] + c1;
    } else if (g[i] - c1 > 0.0) {
      pg[i] = g[i] - c1;
    } else {
      pg[i] = 0.0;
    }
  }
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double ys;
};

// d = -H * pg by the two-loop recursion.
void search_direction(const std::deque<Correction>& memory,
                      std::span<const double> pg, std::vector<double>& d) {
  d.assign(pg.begin(), pg.end());
  for (double& v : d) v = -v;
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    const Correction& c = memory[k];
    alpha[k] = dot(c.s, d) / c.ys;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * c.y[i];
  }
  if (!memory.empty()) {
    const Correction& last = memory.back();
    const double gamma = last.ys / dot(last.y, last.y);
    for (double& v : d) v *= gamma;
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const Correction& c = memory[k];
    const double beta = dot(c.y, d) / c.ys;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha[k] - beta) * c.s[i];
  }
}

}  // namespace

std::string_view status_name(Status status) {
  switch (status) {
    case Status::kConverged: return "converged";
    case Status::kDeltaReached: return "delta";
    case Status::kMaxIterations: return "max_iterations";
    case Status::kLineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

Result minimize(const Objective& objective, std::vector<double> x0,
                const Options& options, const Progress& progress) {
  if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(options.delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (options.c1 < 0.0) throw std::invalid_argument("c1 must be >= 0");
  if (options.period < 1) throw std::invalid_argument("period must be >= 1");

  const double c1 = options.c1;
  const bool orthantwise = c1 > 0.0;
  const std::size_t n = x0.size();

  Result result;
  std::vector<double> x = std::move(x0);
  std::vector<double> g;
  double f = objective(x, g);
  double F = f + c1 * l1(x);
  result.trace.push_back(F);

  std::vector<double> pg;
  pseudo_gradient(x, g, c1, pg);

  auto converged = [&]() {
    return norm(pg) / std::max(1.0, norm(x)) <= options.epsilon;
  };

  if (converged()) {
    result.status = Status::kConverged;
  } else {
    std::deque<Correction> memory;
    std::vector<double> d(pg.size());
    for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
    double step = 1.0 / norm(d);

    std::vector<double> x_prev(n);
    std::vector<double> g_prev(n);
    std::vector<double> pg_prev(n);
    std::vector<double> orthant(n);

    for (std::size_t k = 1;; ++k) {
      if (orthantwise) {
        for (std::size_t i = 0; i < n; ++i) {
          if (d[i] * pg[i] >= 0.0) d[i] = 0.0;
        }
      }
      if (dot(d, pg) >= 0.0 && !memory.empty()) {
        // Curvature history no longer gives descent; restart from steepest.
        memory.clear();
        for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
        step = 1.0 / std::max(norm(d), 1e-300);
      }
      if (orthantwise) {
        for (std::size_t i = 0; i < n; ++i) {
          orthant[i] = x[i] != 0.0 ? (x[i] > 0.0 ? 1.0 : -1.0)
                                   : (pg[i] < 0.0 ? 1.0 : (pg[i] > 0.0 ? -1.0 : 0.0));
        }
      }
      x_prev = x;
      g_prev = g;
      pg_prev = pg;
      const double F_prev = F;
      const double slope = dot(d, pg);

      bool accepted = false;
      if (slope < 0.0) {
        for (std::size_t ls = 0; ls < options.max_linesearch; ++ls, step *= 0.5) {
          for (std::size_t i = 0; i < n; ++i) x[i] = x_prev[i] + step * d[i];
          if (orthantwise) {
            for (std::size_t i = 0; i < n; ++i) {
              if (x[i] * orthant[i] <= 0.0) x[i] = 0.0;
            }
          }
          try {
            f = objective(x, g);
          } catch (const DivergenceError&) {
            continue;
          }
          F = f + c1 * l1(x);
          double decrease = 0.0;
          for (std::size_t i = 0; i < n; ++i) decrease += (x[i] - x_prev[i]) * pg_prev[i];
          if (std::isfinite(F) && F <= F_prev + options.ftol * decrease && F <= F_prev) {
            accepted = true;
            break;
          }
        }
      }
      if (!accepted) {
        x = x_prev;
        g = g_prev;
        F = F_prev;
        result.status = Status::kLineSearchFailed;
        break;
      }

      result.iterations = k;
      result.trace.push_back(F);
      if (progress) progress(k, F, step);
      pseudo_gradient(x, g, c1, pg);

      if (converged()) {
        result.status = Status::kConverged;
        break;
      }
      if (k >= options.period) {
        const double past = result.trace[k - options.period];
        if (F == 0.0 || (past - F) / std::fabs(F) < options.delta) {
          result.status = Status::kDeltaReached;
          break;
        }
      }
      if (k >= options.max_iterations) {
        result.status = Status::kMaxIterations;
        break;
      }

      Correction c{std::vector<double>(n), std::vector<double>(n), 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        c.s[i] = x[i] - x_prev[i];
        c.y[i] = g[i] - g_prev[i];
      }
      c.ys = dot(c.y, c.s);
      if (c.ys > 1e-12 * dot(c.y, c.y) && c.ys > 0.0) {
        memory.push_back(std::move(c));
        if (memory.size() > options.memory) memory.pop_front();
      }
      search_direction(memory, pg, d);
      step = 1.0;
    }
  }

  for (double& v : x) {
    if (v == 0.0) v = 0.0;  // drop negative zeros
  }
  result.objective = F;
  result.x = std::move(x);
  return result;
}

}  // namespace prestamo::optimize
