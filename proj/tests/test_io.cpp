#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "osl/errors.hpp"
#include "osl/io.hpp"
#include "osl/oseledets.hpp"

using namespace osl;

namespace {

EtaCell cell(double a0, double a1, double t0, double t1, int orientation = 1) {
  EtaCell c;
  c.alpha_lo = a0;
  c.alpha_hi = a1;
  c.theta_lo = t0;
  c.theta_hi = t1;
  c.orientation = orientation;
  return c;
}

bool same_draws(const ScalarDist& a, const ScalarDist& b) {
  Rng ra(3);
  Rng rb(3);
  for (int i = 0; i < 1000; ++i) {
    if (a.sample(ra) != b.sample(rb)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("exact strings reload bit for bit") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(u01(rng) - 0.5, static_cast<int>(rng() % 200) - 100);
    CHECK(read_real(Json(exact_string(x)), "x") == x);
  }
  CHECK(read_real(Json(0.1), "x") == 0.1);
  CHECK_THROWS_AS(read_real(Json("0.1abc"), "x"), Error);
  CHECK_THROWS_AS(read_real(Json::array(), "x"), Error);
  CHECK(real_value(std::numeric_limits<double>::infinity()).is_null());
}

TEST_CASE("scalar laws round trip") {
  const std::vector<ScalarDist> laws{
      ScalarDist::atoms({0.1, 2.0 / 3, 7.0}, {0.2, 0.3, 0.5}), ScalarDist::constant(1.0 / 3),
      ScalarDist::uniform(-0.7, 2.9),  ScalarDist::exponential(0.3),
      ScalarDist::dyadic(),            ScalarDist::pareto(1.0, 1.5).affine(6.0, -1.0)};
  for (const auto& d : laws) {
    const Json j = to_json(d);
    const ScalarDist back = scalar_dist_from_json(j);
    CHECK(to_json(back).dump() == j.dump());
    CHECK(same_draws(d, back));
  }
  CHECK(scalar_dist_from_json(Json(2.5)).quantile(0.3) == 2.5);
  CHECK_THROWS_AS(scalar_dist_from_json(Json::parse(R"({"type": "weibull"})")), Error);
}

TEST_CASE("matrix laws round trip") {
  const std::vector<MatrixDistribution> laws{
      MatrixDistribution::atoms({Mat2{2.0, 1.0 / 3, 0.0, 0.5}, Mat2::rotation(0.1)}, {0.25, 0.75}),
      MatrixDistribution::triangular(ScalarDist::constant(-1.0), true, ScalarDist::uniform(-3, 3), false),
      MatrixDistribution::rotgain(ScalarDist::uniform(0.0, kTwoPi), ScalarDist::constant(1.0)),
      build_counterexample_cocycle(counterexample_psi())};
  for (const auto& nu : laws) {
    const Json j = to_json(nu);
    const MatrixDistribution back = matrix_distribution_from_json(j);
    CHECK(to_json(back).dump() == j.dump());
    const OrbitWindow a = sample_window(nu, 0, 200, 5);
    const OrbitWindow b = sample_window(back, 0, 200, 5);
    for (std::int64_t i = 0; i < 200; ++i) {
      CHECK(a.at(i).log_abs_det == b.at(i).log_abs_det);
      CHECK(a.at(i).m.to_mat() == b.at(i).m.to_mat());
    }
  }
  const auto ce = matrix_distribution_from_json(Json::parse(R"({"kind": "counterexample"})"));
  CHECK(ce.kind() == MatrixDistribution::Kind::Triangular);
  CHECK_THROWS_AS(matrix_distribution_from_json(Json::parse(R"({"kind": "atoms", "matrices": [[1, 2, 3]]})")),
                  Error);
}

TEST_CASE("eta specs and towers round trip") {
  EtaSpec eta;
  eta.pieces = {{0.3, cell(0.1, 0.7, 0.4, 1.1, -1)}, {0.2, cell(2.0, 2.0, 0.25, 0.25)}};
  eta.pieces[1].cell.atom = true;
  TailRule t;
  t.first_weight = 0.25;
  t.ratio = 0.5;
  t.theta_factor = 0.9;
  t.cell = cell(1.0, 1.3, 0.9, 1.2);
  eta.tail_rule = t;
  const Json j = to_json(eta);
  const EtaSpec back = eta_spec_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  const Decomposition a = decompose_eta(eta);
  const Decomposition b = decompose_eta(back);
  REQUIRE(a.pieces.size() == b.pieces.size());
  for (std::size_t i = 0; i < a.pieces.size(); ++i) {
    CHECK(a.pieces[i].weight == b.pieces[i].weight);
    CHECK(a.pieces[i].cell.theta_lo == b.pieces[i].cell.theta_lo);
  }

  TowerVector pi;
  pi.entries = {{1, 1.0 / 3}, {4, 1.0 / 6}, {6, 0.5}};
  const TowerVector pb = tower_vector_from_json(to_json(pi));
  CHECK(pb.entries == pi.entries);
  CHECK(p_sequence_from_json(Json::parse(R"({"p": ["0.5", 0.25, "0.25"]})")) == std::vector<double>{0.5, 0.25, 0.25});
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "osl_io_test";
  std::filesystem::create_directories(dir);
  const Json j = to_json(ScalarDist::uniform(0.0, 0.1));
  save_json(dir / "a.json", j);
  CHECK(load_json(dir / "a.json").dump() == j.dump());
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"kind\": ";
  }
  CHECK_THROWS_AS(load_json(dir / "bad.json"), Error);
  CHECK_THROWS_AS(load_json(dir / "missing.json"), Error);
  {
    CsvWriter csv(dir / "t.csv", {"a", "b"});
    csv.row({"1", csv_real(0.1)});
  }
  std::ifstream in(dir / "t.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "a,b");
  CHECK(row == "1,0.10000000000000001");
  std::filesystem::remove_all(dir);
}
