#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "decisens/csv.hpp"
#include "decisens/grid.hpp"

using namespace decisens;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = std::string("/tmp/decisens_test_") + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("parse_csv basics") {
  std::istringstream in("a,b\n1,2\n3,4\n");
  const auto t = parse_csv(in, "mem");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.values.rows == 2);
  CHECK(t.values.at(1, 1) == 4.0);
}

TEST_CASE("parse_csv error reporting") {
  SUBCASE("ragged row names the row") {
    std::istringstream in("a,b\n1,2\n3\n");
    try {
      parse_csv(in, "mem");
      FAIL("expected input_error");
    } catch (const input_error& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SUBCASE("non-numeric cell names row and column") {
    std::istringstream in("a,b\n1,x\n");
    try {
      parse_csv(in, "mem");
      FAIL("expected input_error");
    } catch (const input_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 2") != std::string::npos);
      CHECK(msg.find("column 2") != std::string::npos);
    }
  }
  SUBCASE("duplicate headers rejected") {
    std::istringstream in("a,a\n1,2\n");
    CHECK_THROWS_AS(parse_csv(in, "mem"), input_error);
  }
  SUBCASE("empty file rejected") {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_csv(in, "mem"), input_error);
  }
}

TEST_CASE("parse_samples_csv recognizes optional columns") {
  const auto path = write_temp(
      "samples.csv",
      "theta1,log_density,loglik_1,loglik_2,log_prior\n"
      "0.1,-1.0,-0.5,-0.6,-0.2\n"
      "0.2,-1.1,-0.4,-0.7,-0.3\n");
  const auto bag = parse_samples_csv(path);
  CHECK(bag.m() == 2);
  CHECK(bag.d() == 1);
  REQUIRE(bag.log_density.has_value());
  CHECK((*bag.log_density)[1] == -1.1);
  REQUIRE(bag.log_lik_terms.has_value());
  CHECK(bag.log_lik_terms->cols == 2);
  CHECK(bag.log_lik_terms->at(0, 1) == -0.6);
  REQUIRE(bag.log_prior.has_value());
  std::remove(path.c_str());

  const auto path2 = write_temp("nopar.csv", "log_density\n1\n2\n");
  CHECK_THROWS_AS(parse_samples_csv(path2), input_error);
  std::remove(path2.c_str());
}

TEST_CASE("parse_losses_csv") {
  const auto path = write_temp("losses.csv", "a1,a2\n0,0.5\n1,0.25\n");
  const auto [values, labels] = parse_losses_csv(path);
  CHECK(labels == std::vector<std::string>{"a1", "a2"});
  CHECK(values.rows == 2);
  CHECK(values.at(1, 1) == 0.25);
  std::remove(path.c_str());
}

TEST_CASE("format_number round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, -0.0, 2e17}) {
    const std::string s = format_number(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("grids") {
  SUBCASE("linear") {
    const auto g = linear_grid(0.0, 1.0, 5);
    CHECK(g == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  }
  SUBCASE("log endpoints exact") {
    const auto g = log_grid(1e-4, 10.0, 7);
    CHECK(g.front() == 1e-4);
    CHECK(g.back() == 10.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  }
  SUBCASE("spec strings") {
    const auto g = parse_grid_spec("0:1:3:linear");
    CHECK(g == std::vector<double>{0.0, 0.5, 1.0});
    const auto lg = parse_grid_spec("1e-2:1:3:log");
    CHECK(lg[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(parse_grid_spec("0:1:3"), input_error);
    CHECK_THROWS_AS(parse_grid_spec("0:1:3:cubic"), input_error);
    CHECK_THROWS_AS(parse_grid_spec("1:0:3:linear"), input_error);
    CHECK_THROWS_AS(parse_grid_spec("0:1:0:linear"), input_error);
    CHECK_THROWS_AS(parse_grid_spec("a:1:3:linear"), input_error);
  }
}
