#include <cmath>
#include <map>

#include "doctest.h"
#include "osl/errors.hpp"
#include "osl/skyscraper.hpp"
#include "osl/stats.hpp"

using namespace osl;

TEST_CASE("kac_base_measures") {
  const auto m = kac_base_measures({{{1, 0.5}, {2, 0.5}}});
  CHECK(m.at(1) == 0.5);
  CHECK(m.at(2) == 0.25);
  CHECK(kac_identity_sum(m) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kac_base_measures({{{1, 1.0}}}).at(1) == 1.0);
  const auto m23 = kac_base_measures({{{2, 0.5}, {3, 0.5}}});
  CHECK(m23.at(2) == 0.25);
  CHECK(m23.at(3) == doctest::Approx(1.0 / 6));
  CHECK_THROWS_AS(kac_base_measures({{{2, 0.5}, {4, 0.5}}}), Error);
  CHECK_THROWS_AS(kac_base_measures({{{1, 0.5}, {2, 0.4}}}), Error);
  CHECK_THROWS_AS(kac_base_measures({{{0, 1.0}}}), Error);
}

TEST_CASE("renewal chain: forced moves and stationary start") {
  const TowerVector one{{{1, 1.0}}};
  Rng rng(1);
  SkyscraperState s = renewal_start_stationary(one, 4);
  CHECK(s == SkyscraperState{1, 0});
  for (int i = 0; i < 10; ++i) {
    s = renewal_step(s, one, rng);
    CHECK(s == SkyscraperState{1, 0});
  }
  CHECK(renewal_step({3, 0}, {{{3, 0.5}, {1, 0.5}}}, rng) == SkyscraperState{3, 1});

  const TowerVector pi{{{1, 0.5}, {2, 0.5}}};
  const RenewalChain chain(pi);
  const int n = 100000;
  int top = 0;
  int tall = 0;
  for (int i = 0; i < n; ++i) {
    const SkyscraperState x = chain.start_stationary(rng);
    top += x == SkyscraperState{2, 1};
    tall += x.height == 2;
  }
  CHECK(within_sigma(top / double(n), 0.25, binomial_se(0.25, n)));
  CHECK(within_sigma(tall / double(n), 0.5, binomial_se(0.5, n)));
}

TEST_CASE("renewal chain preserves the stationary law") {
  const TowerVector pi{{{1, 0.2}, {3, 0.5}, {4, 0.3}}};
  const RenewalChain chain(pi);
  std::map<std::pair<std::int64_t, std::int64_t>, int> occ;
  const int n = 40000;
  for (int t = 0; t < n; ++t) {
    Rng rng(derive_seed(5, t));
    SkyscraperState s = chain.start_stationary(rng);
    for (int i = 0; i < 1000; ++i) s = chain.step(s, rng);
    ++occ[{s.height, s.level}];
  }
  for (const auto& [k, p] : pi.entries) {
    for (std::int64_t i = 0; i < k; ++i) {
      const double expected = p / k;
      CHECK(within_sigma(occ[{k, i}] / double(n), expected, binomial_se(expected, n)));
    }
  }
}

TEST_CASE("label_of reproduces the labelled towers") {
  CHECK(label_of({1, 0}) == 0);
  const int four[] = {0, 1, 1, 0};
  for (int i = 0; i < 4; ++i) CHECK(label_of({4, i}) == four[i]);
  const int six[] = {0, 1, 2, 2, 1, 0};
  for (int i = 0; i < 6; ++i) CHECK(label_of({6, i}) == six[i]);
  CHECK_THROWS_AS(label_of({3, 0}), Error);
  CHECK_THROWS_AS(label_of({2, 1}), Error);

  // Labels change by at most one along trajectories.
  const TowerVector pi = bounded_tower_vector({0.4, 0.3, 0.2, 0.1});
  const RenewalChain chain(pi);
  Rng rng(9);
  SkyscraperState s = chain.start_stationary(rng);
  int prev = label_of(s);
  for (int i = 0; i < 100000; ++i) {
    s = chain.step(s, rng);
    const int l = label_of(s);
    REQUIRE(std::abs(l - prev) <= 1);
    prev = l;
  }
}

TEST_CASE("bounded_tower_vector and label_measures") {
  std::vector<double> geo;
  for (int n = 0; n < 50; ++n) geo.push_back(std::ldexp(1.0, -n - 1));
  // Residual 2^-50 split so the sequence stays strictly decreasing.
  geo.push_back(0.75 * std::ldexp(1.0, -50));
  geo.push_back(0.25 * std::ldexp(1.0, -50));
  const TowerVector pi = bounded_tower_vector(geo);
  CHECK(pi.entries.at(1) == 0.25);
  CHECK(pi.entries.at(4) == 0.25);
  CHECK(pi.entries.at(6) == 3.0 / 16);
  CHECK(pi.entries.at(8) == 0.125);
  double total = 0.0;
  for (const auto& [k, p] : pi.entries) total += p;
  CHECK(std::abs(total - 1.0) < 1e-12);

  std::vector<double> third;
  double acc = 0.0;
  for (int n = 0; n < 20; ++n) {
    third.push_back(2.0 / 3.0 * std::pow(3.0, -n));
    acc += third.back();
  }
  third.back() += 1.0 - acc;
  const TowerVector pt = bounded_tower_vector(third);
  CHECK(pt.entries.at(1) == doctest::Approx(4.0 / 9));
  CHECK(pt.entries.at(4) == doctest::Approx(8.0 / 27));

  const auto mu = label_measures(geo);
  CHECK(mu[0] == doctest::Approx(0.5).epsilon(1e-14));
  double s = 0.0;
  for (std::size_t n = 0; n < mu.size(); ++n) {
    CHECK(mu[n] == doctest::Approx(geo[n]).epsilon(1e-12));
    s += mu[n];
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(bounded_tower_vector({0.5, 0.5}), Error);
  try {
    bounded_tower_vector({0.3, 0.4, 0.3});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NeedStrictDecrease);
  }
}

TEST_CASE("empirical label frequencies") {
  const std::vector<double> p{0.35, 0.25, 0.2, 0.12, 0.08};
  const RenewalChain chain(bounded_tower_vector(p));
  Rng rng(12);
  SkyscraperState s = chain.start_stationary(rng);
  std::vector<int> counts(p.size(), 0);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    ++counts[static_cast<std::size_t>(label_of(s))];
    s = chain.step(s, rng);
  }
  // Consecutive labels are correlated over one tower; inflate the binomial
  // error by the square root of the longest tower height.
  for (std::size_t l = 0; l < p.size(); ++l) {
    CHECK(within_sigma(counts[l] / double(n), p[l], binomial_se(p[l], n) * std::sqrt(10.0)));
  }
}

TEST_CASE("refine_weights") {
  CHECK_THROWS_AS(refine_weights({1e-9, 0.5}, 1000), Error);
  CHECK(refine_weights({1e-6, 0.5}).weights.size() == 500002);

  const auto same = refine_weights({0.5, 0.3, 0.2});
  CHECK(same.weights == std::vector<double>{0.5, 0.3, 0.2});
  CHECK(same.source == std::vector<std::size_t>{0, 1, 2});

  const auto split = refine_weights({0.5, 0.5});
  REQUIRE(split.weights.size() == 3);
  CHECK(split.source == std::vector<std::size_t>{0, 1, 1});
  CHECK(split.weights[1] == doctest::Approx(0.3125));
  CHECK(split.weights[2] == doctest::Approx(0.1875));

  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> w(1 + rng() % 30);
    double total = 0.0;
    for (double& x : w) total += (x = 0.01 + u01(rng));
    for (double& x : w) x /= total;
    const auto r = refine_weights(w);
    double sum = 0.0;
    std::vector<double> per(w.size(), 0.0);
    for (std::size_t i = 0; i < r.weights.size(); ++i) {
      if (i > 0) REQUIRE(r.weights[i] < r.weights[i - 1]);
      REQUIRE(r.weights[i] > 0.0);
      if (i > 0) REQUIRE(r.source[i] >= r.source[i - 1]);
      per[r.source[i]] += r.weights[i];
      sum += r.weights[i];
    }
    REQUIRE(std::abs(sum - 1.0) < 1e-12);
    for (std::size_t n = 0; n < w.size(); ++n) REQUIRE(std::abs(per[n] - w[n]) < 1e-15);
    REQUIRE_NOTHROW(bounded_tower_vector(r.weights));
  }
}

TEST_CASE("lowcost_heights") {
  CHECK(lowcost_heights({1.0, 1.0, 1.0}, 1.0) == std::vector<std::int64_t>{3, 4, 5});
  CHECK(lowcost_heights({1.0, 1.0, 1.0}, 1e9) == std::vector<std::int64_t>{1, 2, 3});
  CHECK(lowcost_heights({0.0}, 0.1) == std::vector<std::int64_t>{1});
  // 2 and 4 share a factor: the last height moves to 5.
  CHECK(lowcost_heights({0.5, 0.9}, 1.0) == std::vector<std::int64_t>{2, 3});
  CHECK(lowcost_heights({0.5, 1.5}, 1.0) == std::vector<std::int64_t>{2, 5});
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> caps(2 + rng() % 10);
    double c = 0.0;
    for (double& x : caps) x = (c += 3.0 * u01(rng));
    const double eps = 0.01 + u01(rng);
    const auto k = lowcost_heights(caps, eps);
    std::int64_t g = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      REQUIRE(caps[i] / k[i] < eps / 2);
      if (i > 0) REQUIRE(k[i] > k[i - 1]);
      g = std::gcd(g, k[i]);
    }
    REQUIRE(g == 1);
  }
  CHECK_THROWS_AS(lowcost_heights({5.0}, 1.0), Error);
}
