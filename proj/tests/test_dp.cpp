#include "doctest.h"

#include "decisens/dp_neighborhood.hpp"
#include "oracles.hpp"

using namespace decisens;

namespace {

NormalizedLossMatrix make_lm(const std::vector<std::vector<double>>& cols) {
  NormalizedLossMatrix lm;
  lm.values = Matrix(cols[0].size(), cols.size());
  for (std::size_t a = 0; a < cols.size(); ++a) {
    lm.action_labels.push_back("a" + std::to_string(a));
    for (std::size_t i = 0; i < cols[a].size(); ++i) lm.values.at(i, a) = cols[a][i];
  }
  return lm;
}

}  // namespace

TEST_CASE("draw_dirichlet_weights") {
  SUBCASE("row sums and determinism") {
    const auto set1 = draw_dirichlet_weights(2.5, 20, 200, 99);
    const auto set2 = draw_dirichlet_weights(2.5, 20, 200, 99);
    CHECK(set1.draws.data == set2.draws.data);  // bit-identical
    for (std::size_t j = 0; j < set1.n_draws; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 20; ++i) {
        const double w = set1.draws.at(j, i);
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    const auto set3 = draw_dirichlet_weights(2.5, 20, 200, 100);
    CHECK(set1.draws.data != set3.draws.data);
  }
  SUBCASE("small-shape regime keeps rows usable") {
    // alpha/m = 1e-3: naive Gamma sampling would underflow rows to zero
    const auto set = draw_dirichlet_weights(0.02, 20, 100, 7);
    for (std::size_t j = 0; j < set.n_draws; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 20; ++i) sum += set.draws.at(j, i);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("concentration at huge alpha") {
    const std::size_t m = 10;
    const auto set = draw_dirichlet_weights(1e8, m, 200, 11);
    std::size_t close = 0;
    for (std::size_t j = 0; j < set.n_draws; ++j) {
      double worst = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        worst = std::max(worst, std::abs(set.draws.at(j, i) - 0.1));
      if (worst < 1e-2) ++close;
    }
    CHECK(static_cast<double>(close) / 200.0 >= 0.99);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(draw_dirichlet_weights(0.0, 10, 10, 1), input_error);
    CHECK_THROWS_AS(draw_dirichlet_weights(1.0, 1, 10, 1), input_error);
    CHECK_THROWS_AS(draw_dirichlet_weights(1.0, 10, 0, 1), input_error);
  }
}

TEST_CASE("probability_of_optimality") {
  const std::vector<double> alphas{1.0, 100.0, 1e6};
  SUBCASE("single action always wins") {
    const auto lm = make_lm({{0.2, 0.8, 0.5}});
    const auto prof = probability_of_optimality(lm, alphas, 200, 3);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai)
      CHECK(prof.prob.at(ai, 0) == 1.0);
  }
  SUBCASE("pointwise dominance wins under any reweighting") {
    const auto lm = make_lm({{0.1, 0.2, 0.15}, {0.5, 0.9, 0.6}});
    const auto prof = probability_of_optimality(lm, alphas, 300, 4);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      CHECK(prof.prob.at(ai, 0) == 1.0);
      CHECK(prof.prob.at(ai, 1) == 0.0);
    }
  }
  SUBCASE("probabilities sum to one; large-alpha concentration") {
    oracles::TestRng rng(51);
    std::vector<std::vector<double>> cols(3);
    for (auto& c : cols) {
      c.resize(40);
      for (double& v : c) v = rng.uniform();
    }
    const auto lm = make_lm(cols);
    const auto prof = probability_of_optimality(lm, alphas, 1000, 5);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      double sum = 0.0;
      for (std::size_t a = 0; a < 3; ++a) sum += prof.prob.at(ai, a);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    std::size_t bayes = 0;
    std::vector<double> means(3);
    for (std::size_t a = 0; a < 3; ++a) means[a] = mean(cols[a]);
    for (std::size_t a = 1; a < 3; ++a)
      if (means[a] < means[bayes]) bayes = a;
    CHECK(prof.prob.at(2, bayes) >= 0.95);
    // standard errors match the binomial formula
    for (std::size_t a = 0; a < 3; ++a) {
      const double p = prof.prob.at(0, a);
      CHECK(prof.stderr_.at(0, a) ==
            doctest::Approx(std::sqrt(p * (1.0 - p) / 1000.0)).epsilon(1e-12));
    }
  }
  SUBCASE("mean preservation across draws") {
    oracles::TestRng rng(52);
    std::vector<std::vector<double>> cols(1);
    cols[0].resize(50);
    for (double& v : cols[0]) v = rng.uniform();
    const auto lm = make_lm(cols);
    auto set = draw_dirichlet_weights(5.0, 50, 10000, 6);
    fill_per_draw_psi(set, lm);
    const auto psi = set.per_draw_psi.column(0);
    const double base = mean(lm.action_losses(0));
    const double mc_mean = mean(psi);
    const double se = std::sqrt(variance(psi) / 10000.0);
    CHECK(std::abs(mc_mean - base) <= 4.0 * se);
  }
}

TEST_CASE("expected_l1_distance") {
  CHECK(expected_l1_distance(2.0, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  // decreasing in alpha at fixed x
  double prev = kInf;
  for (double alpha : {1.0, 10.0, 100.0}) {
    const double v = expected_l1_distance(alpha, 0.3);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(expected_l1_distance(0.0, 0.5), input_error);
  CHECK_THROWS_AS(expected_l1_distance(1.0, 0.0), input_error);
  CHECK_THROWS_AS(expected_l1_distance(1.0, 1.0), input_error);

  SUBCASE("Monte Carlo oracle at (5, 0.3)") {
    const double alpha = 5.0, x = 0.3;
    oracles::TestRng rng(53);
    // Beta(a,b) via two Gamma variates from an independent generator
    const auto gamma_draw = [&](double shape) {
      // Marsaglia-Tsang with the standard boost, on the test RNG
      double boost = 1.0;
      double s = shape;
      if (s < 1.0) {
        boost = std::pow(rng.uniform(), 1.0 / s);
        s += 1.0;
      }
      const double d = s - 1.0 / 3.0;
      const double c = 1.0 / std::sqrt(9.0 * d);
      for (;;) {
        double xx, v;
        do {
          // normal via Box-Muller on the test RNG
          const double u1 = rng.uniform(), u2 = rng.uniform();
          xx = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
          v = 1.0 + c * xx;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (std::log(u) < 0.5 * xx * xx + d * (1.0 - v + std::log(v)))
          return boost * d * v;
      }
    };
    const std::size_t n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g1 = gamma_draw(x * alpha);
      const double g2 = gamma_draw((1.0 - x) * alpha);
      const double dev = std::abs(g1 / (g1 + g2) - x);
      acc += dev;
      acc2 += dev * dev;
    }
    const double mc = acc / n;
    const double se = std::sqrt((acc2 / n - mc * mc) / n);
    CHECK(std::abs(mc - expected_l1_distance(alpha, x)) <= 3.0 * se);
  }
}

TEST_CASE("l1_loss_distance") {
  const std::vector<double> L{0.0, 1.0};
  CHECK(l1_loss_distance(L, WeightVector::uniform(2)) == 0.0);
  CHECK(l1_loss_distance(L, WeightVector{{0.25, 0.75}}) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(
      l1_loss_distance(std::vector<double>{1.0, 0.0}, WeightVector::uniform(2)),
      input_error);
  // two-atom bound of 1/2 and zero iff uniform (strictly increasing losses)
  oracles::TestRng rng(54);
  for (int trial = 0; trial < 50; ++trial) {
    WeightVector w{{rng.uniform(), 0.0}};
    w.w[1] = 1.0 - w.w[0];
    const double d = l1_loss_distance(L, w);
    CHECK(d <= 0.5 + 1e-12);
    CHECK((d == 0.0) == (std::abs(w.w[0] - 0.5) < 1e-15));
  }
}

TEST_CASE("confidence_bands") {
  const std::vector<double> z{0.25, 0.5, 0.75};
  SUBCASE("band ordering and diagonal coverage") {
    const auto b = confidence_bands(10.0, 0.95, z, 1500, 77, 200);
    for (std::size_t i = 0; i < z.size(); ++i) {
      CHECK(b.lower[i] <= b.upper[i]);
      CHECK(b.lower[i] <= z[i] + 0.05);
      CHECK(b.upper[i] >= z[i] - 0.05);
    }
  }
  SUBCASE("width decreases with alpha; huge alpha pinches the band") {
    double prev_width = kInf;
    for (double alpha : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
      const auto b = confidence_bands(alpha, 0.95, std::vector<double>{0.5}, 1200,
                                      78, 200);
      const double width = b.upper[0] - b.lower[0];
      CHECK(width < prev_width);
      prev_width = width;
    }
    const auto tight =
        confidence_bands(1e8, 0.95, std::vector<double>{0.5}, 400, 79, 200);
    CHECK(tight.upper[0] - tight.lower[0] < 0.01);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(confidence_bands(1.0, 0.0, z, 100, 1), input_error);
    CHECK_THROWS_AS(confidence_bands(1.0, 0.5, std::vector<double>{}, 100, 1),
                    input_error);
  }
}
