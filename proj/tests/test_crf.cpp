#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "prestamo/crf.hpp"
#include "prestamo/error.hpp"
#include "synthetic.hpp"

using namespace prestamo;
using testing::Rng;

namespace {

struct Problem {
  crf::Parameters params;
  crf::Sequence seq;
};

Problem random_problem(Rng& rng, double scale) {
  const std::size_t k = rng.between(1, 6);
  const std::size_t l = rng.between(1, 4);
  const std::size_t n = rng.between(1, 5);
  return {testing::random_parameters(rng, k, l, scale), testing::random_sequence(rng, n, k)};
}

// Integer weights in {-1, 0, 1} and unit feature values, so equal path
// scores are exactly equal in floating point.
Problem tie_problem(Rng& rng) {
  const std::size_t k = rng.between(1, 3);
  const std::size_t l = rng.between(2, 4);
  const std::size_t n = rng.between(1, 5);
  std::vector<double> w(crf::Parameters::count(k, l));
  for (double& v : w) v = static_cast<double>(rng.below(3)) - 1.0;
  crf::Sequence seq(n);
  for (auto& pos : seq) {
    if (rng.coin()) pos.push_back({static_cast<std::uint32_t>(rng.below(k)), 1.0});
  }
  return {crf::Parameters(k, l, std::move(w)), std::move(seq)};
}

std::vector<crf::Instance> random_instances(Rng& rng, std::size_t k, std::size_t l,
                                            std::size_t count) {
  std::vector<crf::Instance> data;
  for (std::size_t i = 0; i < count; ++i) {
    crf::Instance inst;
    inst.features = testing::random_sequence(rng, rng.between(1, 5), k);
    for (std::size_t t = 0; t < inst.features.size(); ++t) inst.labels.push_back(rng.below(l));
    data.push_back(std::move(inst));
  }
  return data;
}

}  // namespace

TEST_CASE("zero weights") {
  for (std::size_t l = 1; l <= 4; ++l) {
    for (std::size_t n = 1; n <= 5; ++n) {
      const crf::Parameters p(3, l);
      Rng rng(n * 10 + l);
      const crf::Sequence seq = testing::random_sequence(rng, n, 3);
      CHECK(crf::log_partition(p, seq) == doctest::Approx(static_cast<double>(n) * std::log(l)));
      CHECK(crf::viterbi(p, seq) == std::vector<std::size_t>(n, 0));
      const std::vector<std::size_t> path(n, l - 1);
      CHECK(crf::score(p, seq, path) == 0.0);
    }
  }
  const crf::Parameters p(2, 3);
  CHECK(crf::log_partition(p, crf::Sequence(2)) == doctest::Approx(2.0 * std::log(3.0)));
}

TEST_CASE("single position uses start and end") {
  crf::Parameters p(1, 3);
  auto w = p.values();
  w[p.start_offset() + 2] = 0.7;
  w[p.end_offset() + 2] = -0.2;
  w[p.start_offset() + 1] = 5.0;
  const crf::Sequence seq(1);
  const std::vector<std::size_t> y{2};
  CHECK(crf::score(p, seq, y) == doctest::Approx(0.5));
  CHECK(crf::viterbi(p, seq) == std::vector<std::size_t>{1});
}

TEST_CASE("score equals direct summation") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const Problem pr = random_problem(rng, 2.0);
    std::vector<std::size_t> y(pr.seq.size());
    for (auto& v : y) v = rng.below(pr.params.labels());
    CHECK(crf::score(pr.params, pr.seq, y) ==
          doctest::Approx(testing::path_score(pr.params, pr.seq, y)).epsilon(1e-12));
  }
}

TEST_CASE("score rejects bad input") {
  const crf::Parameters p(2, 2);
  const crf::Sequence seq(3);
  const std::vector<std::size_t> short_path{0, 1};
  CHECK_THROWS_AS(crf::score(p, seq, short_path), std::invalid_argument);
  CHECK_THROWS_AS(crf::score(p, crf::Sequence{}, std::vector<std::size_t>{}),
                  std::invalid_argument);
}

TEST_CASE("log partition and normalization against enumeration") {
  Rng rng(202);
  for (int trial = 0; trial < 300; ++trial) {
    const Problem pr = random_problem(rng, 3.0);
    const double log_z = crf::log_partition(pr.params, pr.seq);
    CHECK(std::abs(log_z - testing::enumerated_log_partition(pr.params, pr.seq)) < 1e-8);
    double total = 0.0;
    std::vector<std::size_t> path(pr.seq.size(), 0);
    const std::size_t l = pr.params.labels();
    while (true) {
      total += std::exp(testing::path_score(pr.params, pr.seq, path) - log_z);
      std::size_t i = 0;
      while (i < path.size() && ++path[i] == l) path[i++] = 0;
      if (i == path.size()) break;
    }
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
}

TEST_CASE("viterbi against enumeration") {
  Rng rng(303);
  for (int trial = 0; trial < 300; ++trial) {
    const Problem pr = random_problem(rng, 3.0);
    const auto best = crf::viterbi(pr.params, pr.seq);
    CHECK(best == testing::enumerated_viterbi(pr.params, pr.seq));
  }
}

TEST_CASE("viterbi tie-break against enumeration") {
  Rng rng(304);
  for (int trial = 0; trial < 2000; ++trial) {
    const Problem pr = tie_problem(rng);
    CHECK(crf::viterbi(pr.params, pr.seq) == testing::enumerated_viterbi(pr.params, pr.seq));
  }
}

TEST_CASE("forbidden repeats give the alternating path") {
  crf::Parameters p(1, 3);
  auto w = p.values();
  w[p.state_index(0, 1)] = 2.0;
  w[p.state_index(0, 2)] = 1.0;
  w[p.transition_offset() + 1 * 3 + 1] = -1e6;
  const crf::Sequence seq(5, std::vector<crf::Feature>{{0, 1.0}});
  const auto best = crf::viterbi(p, seq);
  CHECK(best == testing::enumerated_viterbi(p, seq));
  CHECK(best == std::vector<std::size_t>{1, 2, 1, 2, 1});
}

TEST_CASE("marginals against enumeration") {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const Problem pr = random_problem(rng, 2.0);
    const crf::Marginals m = crf::marginals(pr.params, pr.seq);
    const std::size_t n = pr.seq.size();
    const std::size_t l = pr.params.labels();
    std::vector<double> node(n * l, 0.0);
    std::vector<double> edge(n > 1 ? (n - 1) * l * l : 0, 0.0);
    const double log_z = testing::enumerated_log_partition(pr.params, pr.seq);
    std::vector<std::size_t> path(n, 0);
    while (true) {
      const double prob = std::exp(testing::path_score(pr.params, pr.seq, path) - log_z);
      for (std::size_t t = 0; t < n; ++t) {
        node[t * l + path[t]] += prob;
        if (t > 0) edge[(t - 1) * l * l + path[t - 1] * l + path[t]] += prob;
      }
      std::size_t i = 0;
      while (i < n && ++path[i] == l) path[i++] = 0;
      if (i == n) break;
    }
    CHECK(std::abs(m.log_z - log_z) < 1e-8);
    REQUIRE(m.node.size() == node.size());
    REQUIRE(m.edge.size() == edge.size());
    for (std::size_t i = 0; i < node.size(); ++i) CHECK(std::abs(m.node[i] - node[i]) < 1e-10);
    for (std::size_t i = 0; i < edge.size(); ++i) CHECK(std::abs(m.edge[i] - edge[i]) < 1e-10);
  }
}

TEST_CASE("objective at zero weights and the additive L2 term") {
  Rng rng(505);
  const auto data = random_instances(rng, 4, 3, 6);
  double expected = 0.0;
  for (const auto& inst : data) expected += static_cast<double>(inst.features.size()) * std::log(3.0);
  std::vector<double> grad;
  CHECK(crf::nll_and_gradient(crf::Parameters(4, 3), data, 0.0, grad) ==
        doctest::Approx(expected));
  CHECK(grad.size() == crf::Parameters::count(4, 3));

  const crf::Parameters p = testing::random_parameters(rng, 4, 3, 1.0);
  double sq = 0.0;
  for (double v : p.values()) sq += v * v;
  const double plain = crf::nll_and_gradient(p, data, 0.0, grad);
  const double penalized = crf::nll_and_gradient(p, data, 0.25, grad);
  CHECK(penalized - plain == doctest::Approx(0.125 * sq).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(606);
  const double h = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    for (double c2 : {0.0, 0.7}) {
      const std::size_t k = rng.between(1, 4);
      const std::size_t l = rng.between(2, 4);
      const auto data = random_instances(rng, k, l, rng.between(1, 4));
      crf::Parameters p = testing::random_parameters(rng, k, l, 1.0);
      std::vector<double> grad;
      crf::nll_and_gradient(p, data, c2, grad);
      std::vector<double> scratch;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p.values()[i];
        p.values()[i] = saved + h;
        const double up = crf::nll_and_gradient(p, data, c2, scratch);
        p.values()[i] = saved - h;
        const double down = crf::nll_and_gradient(p, data, c2, scratch);
        p.values()[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-8});
        CHECK(std::abs(grad[i] - numeric) / denom < 1e-5);
      }
    }
  }
}

TEST_CASE("non-finite weights signal divergence") {
  Rng rng(707);
  const auto data = random_instances(rng, 2, 2, 2);
  crf::Parameters p(2, 2);
  p.values()[0] = std::numeric_limits<double>::infinity();
  std::vector<double> grad;
  CHECK_THROWS_AS(crf::nll_and_gradient(p, data, 0.0, grad), DivergenceError);
}
