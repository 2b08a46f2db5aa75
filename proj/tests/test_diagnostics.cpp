#include "doctest.h"

#include "decisens/diagnostics.hpp"
#include "oracles.hpp"

using namespace decisens;

namespace {

std::vector<double> lin_grid(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> random_losses(oracles::TestRng& rng, std::size_t m) {
  std::vector<double> L(m);
  for (double& v : L) v = rng.uniform();
  return L;
}

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

TEST_CASE("var_curve examples") {
  const std::vector<double> L{1, 2, 3, 4};
  CHECK(var_curve(L, std::vector<double>{0.0}).value[0] == 4.0);
  CHECK(var_curve(L, std::vector<double>{1.0}).value[0] == 1.0);
  const std::vector<double> c{5, 5, 5};
  for (double q : {0.0, 0.3, 1.0})
    CHECK(var_curve(c, std::vector<double>{q}).value[0] == 5.0);
  // two atoms, interpolation between the plotting positions
  CHECK(var_curve(std::vector<double>{0, 1}, std::vector<double>{0.5}).value[0] ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(var_curve(L, std::vector<double>{}), input_error);
  CHECK_THROWS_AS(var_curve(L, std::vector<double>{0.5, 0.2}), input_error);
}

TEST_CASE("var_curve nonincreasing") {
  oracles::TestRng rng(21);
  const auto grid = lin_grid(0.0, 1.0, 64);
  for (int trial = 0; trial < 100; ++trial) {
    const auto L = random_losses(rng, 2 + rng.index(40));
    const auto c = var_curve(L, grid);
    for (std::size_t i = 1; i < c.value.size(); ++i)
      CHECK(c.value[i] <= c.value[i - 1] + 1e-12);
    CHECK(c.value.front() == *std::max_element(L.begin(), L.end()));
  }
}

TEST_CASE("cvar_curve examples") {
  const std::vector<double> L{1, 2, 3, 4};
  CHECK(cvar_curve(L, std::vector<double>{0.5}).value[0] == doctest::Approx(3.5));
  CHECK(cvar_curve(L, std::vector<double>{1.0}).value[0] == doctest::Approx(2.5));
  CHECK(cvar_curve(L, std::vector<double>{1e-9}).value[0] ==
        doctest::Approx(4.0).epsilon(1e-6));
  CHECK_THROWS_AS(cvar_curve(L, std::vector<double>{0.0, 0.5}), input_error);
}

TEST_CASE("cvar_curve properties") {
  oracles::TestRng rng(22);
  const auto grid = lin_grid(0.01, 1.0, 64);
  for (int trial = 0; trial < 100; ++trial) {
    const auto L = random_losses(rng, 2 + rng.index(40));
    const auto c = cvar_curve(L, grid);
    const double mu = mean(L);
    for (std::size_t i = 0; i < c.value.size(); ++i) {
      CHECK(c.value[i] >= mu - 1e-12);
      if (i) CHECK(c.value[i] <= c.value[i - 1] + 1e-12);
    }
    CHECK(c.value.back() == doctest::Approx(mu).epsilon(1e-12));
  }
}

TEST_CASE("trimmed_mean examples") {
  const std::vector<double> L{0, 0.5, 0.5, 1};
  CHECK(trimmed_mean(L, 0.0) == doctest::Approx(0.5));
  CHECK(trimmed_mean(L, 0.5) == doctest::Approx(0.5));  // drop one per tail
  const std::vector<double> c{3, 3, 3, 3};
  CHECK(trimmed_mean(c, 0.4) == doctest::Approx(3.0));
  CHECK_THROWS_AS(trimmed_mean(std::vector<double>{1.0, 2.0}, 1.0), input_error);
  // q=0 equals the sample mean exactly
  oracles::TestRng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto L2 = random_losses(rng, 2 + rng.index(20));
    CHECK(trimmed_mean(L2, 0.0) == doctest::Approx(mean(L2)).epsilon(1e-15));
  }
}

TEST_CASE("cel_curve examples and properties") {
  const std::vector<double> L{1, 2, 3, 4};
  CHECK(cel_curve(L, std::vector<double>{1.0}).value[0] == doctest::Approx(2.5));
  CHECK(cel_curve(L, std::vector<double>{0.25}).value[0] == doctest::Approx(1.0));
  CHECK(cel_curve(L, std::vector<double>{0.0}).value[0] == 0.0);

  oracles::TestRng rng(24);
  const auto grid = lin_grid(0.0, 1.0, 128);
  for (int trial = 0; trial < 100; ++trial) {
    const auto Lr = random_losses(rng, 2 + rng.index(40));
    const std::size_t m = Lr.size();
    const auto c = cel_curve(Lr, grid);
    for (std::size_t i = 1; i < c.value.size(); ++i)
      CHECK(c.value[i] >= c.value[i - 1] - 1e-12);
    // q=1 equals uniform expected loss bit-for-bit
    CHECK(c.value.back() == expected_loss(WeightVector::uniform(m), Lr));
    // numeric slope at 0 approximates the max loss within grid resolution
    const double slope = (c.value[1] - c.value[0]) / (c.q[1] - c.q[0]);
    const double mx = *std::max_element(Lr.begin(), Lr.end());
    if (grid[1] <= 1.0 / static_cast<double>(m))
      CHECK(slope == doctest::Approx(mx).epsilon(1e-9));
    else
      CHECK(slope <= mx + 1e-12);
  }
}

TEST_CASE("cvar_crossing") {
  const auto grid = lin_grid(0.01, 1.0, 100);
  SUBCASE("identical actions tie to the first label everywhere") {
    const auto lm = make_lm({{0.1, 0.6}, {0.1, 0.6}});
    CHECK_FALSE(cvar_crossing(lm, grid).has_value());
  }
  SUBCASE("pointwise dominance") {
    const auto lm = make_lm({{0.0, 0.0}, {0.4, 0.1}});
    CHECK_FALSE(cvar_crossing(lm, grid).has_value());
  }
  SUBCASE("crossing exists and matches hand computation") {
    // Bayes action a1 (mean 0.0833) loses CVaR-optimality below q = 0.8667.
    const auto lm = make_lm({{0.1, 0.1, 0.1}, {0.0, 0.0, 0.25}});
    const auto crossing = cvar_crossing(lm, grid);
    REQUIRE(crossing.has_value());
    double expect = -1.0;
    for (double q : grid)
      if (q <= 13.0 / 15.0 + 1e-12) expect = q;
    CHECK(*crossing == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("agrees with brute-force re-ranking") {
    oracles::TestRng rng(25);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t m = 3 + rng.index(10);
      const std::size_t k = 2 + rng.index(3);
      std::vector<std::vector<double>> cols(k);
      for (auto& c : cols) c = random_losses(rng, m);
      const auto lm = make_lm(cols);
      const auto got = cvar_crossing(lm, grid);

      std::vector<double> means(k);
      for (std::size_t a = 0; a < k; ++a) means[a] = mean(cols[a]);
      std::size_t bayes = 0;
      for (std::size_t a = 1; a < k; ++a)
        if (means[a] < means[bayes]) bayes = a;
      std::optional<double> expect;
      for (double q : grid) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < k; ++a)
          if (cvar_curve(cols[a], std::vector<double>{q}).value[0] <
              cvar_curve(cols[best], std::vector<double>{q}).value[0])
            best = a;
        if (best != bayes) expect = q;  // keeps the largest such q
      }
      CHECK(got.has_value() == expect.has_value());
      if (got && expect) CHECK(*got == doctest::Approx(*expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("loo_sensitivity") {
  SampleBag bag;
  bag.samples = Matrix(2, 1);
  bag.samples.at(0, 0) = 1.0;
  bag.samples.at(1, 0) = 2.0;
  const auto lm = make_lm({{0.0, 1.0}});

  SUBCASE("missing loglik columns named in the error") {
    try {
      loo_sensitivity(bag, lm);
      FAIL("expected input_error");
    } catch (const input_error& e) {
      CHECK(std::string(e.what()).find("loglik") != std::string::npos);
    }
  }
  SUBCASE("constant column reproduces baseline") {
    Matrix ll(2, 1);
    ll.at(0, 0) = ll.at(1, 0) = -3.7;
    bag.log_lik_terms = ll;
    const auto rep = loo_sensitivity(bag, lm);
    CHECK(rep.psi_loo.at(0, 0) == doctest::Approx(rep.psi_base[0]).epsilon(1e-14));
    CHECK(rep.ess_datum[0] == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("two-atom hand computation") {
    Matrix ll(2, 1);
    ll.at(0, 0) = std::log(1.0);
    ll.at(1, 0) = std::log(3.0);
    bag.log_lik_terms = ll;
    const auto rep = loo_sensitivity(bag, lm);
    // weights proportional to [1, 1/3] -> [0.75, 0.25]; psi = 0.25
    CHECK(rep.psi_loo.at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("flat prior reproduces baseline") {
    Matrix ll(2, 1);
    ll.at(0, 0) = -1.0;
    ll.at(1, 0) = -2.0;
    bag.log_lik_terms = ll;
    bag.log_prior = std::vector<double>{0.4, 0.4};
    const auto rep = loo_sensitivity(bag, lm);
    REQUIRE(rep.psi_noprior.size() == 1);
    CHECK(rep.psi_noprior[0] == doctest::Approx(rep.psi_base[0]).epsilon(1e-14));
    CHECK(rep.ess_noprior == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("log-space weights match direct computation") {
    oracles::TestRng rng(26);
    const std::size_t m = 20;
    bag.samples = Matrix(m, 1);
    Matrix ll(m, 1);
    std::vector<double> direct(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      bag.samples.at(i, 0) = rng.uniform();
      ll.at(i, 0) = 2.0 * rng.uniform() - 1.0;  // well-scaled
      direct[i] = std::exp(-ll.at(i, 0));
      sum += direct[i];
    }
    for (double& v : direct) v /= sum;
    bag.log_lik_terms = ll;
    std::vector<std::vector<double>> col(1, random_losses(rng, m));
    const auto lm2 = make_lm(col);
    const auto rep = loo_sensitivity(bag, lm2);
    double psi_direct = 0.0;
    for (std::size_t i = 0; i < m; ++i) psi_direct += direct[i] * col[0][i];
    CHECK(rep.psi_loo.at(0, 0) == doctest::Approx(psi_direct).epsilon(1e-12));
  }
}

TEST_CASE("density_loss_scatter") {
  SampleBag bag;
  bag.samples = Matrix(3, 1);
  const std::vector<double> L{0.3, 0.1, 0.9};
  CHECK_THROWS_AS(density_loss_scatter(bag, L), input_error);
  bag.log_density = std::vector<double>{-1.0, -2.0, -0.5};
  const auto pairs = density_loss_scatter(bag, L);
  REQUIRE(pairs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(pairs[i].first == (*bag.log_density)[i]);
    CHECK(pairs[i].second == L[i]);
  }
}
