#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dentalreg/geometry.hpp"
#include "dentalreg/lr.hpp"
#include "dentalreg/rng.hpp"

using namespace dentalreg;

TEST_CASE("kde peak of a single sample") {
  const std::vector<double> s = {2.5};
  const double h = 0.7;
  CHECK(kde_pdf(s, h, 2.5) == Catch::Approx(1.0 / (h * std::sqrt(2.0 * kPi))));
}

TEST_CASE("kde of a symmetric sample set is symmetric") {
  const std::vector<double> s = {-1.0, 1.0};
  for (double x : {0.1, 0.5, 1.7, 3.0})
    CHECK(kde_pdf(s, 0.8, x) == Catch::Approx(kde_pdf(s, 0.8, -x)));
}

TEST_CASE("kde integrates to one (trapezoid oracle)") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> samples;
    for (int i = 0; i < 20; ++i) samples.push_back(rng.uniform(-5, 5));
    const double h = rng.uniform(0.2, 2.0);
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it - 10 * h, hi = *hi_it + 10 * h;
    const int n = 20000;
    double integral = 0.0;
    double prev = kde_pdf(samples, h, lo);
    for (int i = 1; i <= n; ++i) {
      const double x = lo + (hi - lo) * i / n;
      const double cur = kde_pdf(samples, h, x);
      integral += 0.5 * (prev + cur) * (hi - lo) / n;
      prev = cur;
    }
    CHECK(integral == Catch::Approx(1.0).margin(1e-4));
  }
}

TEST_CASE("nonpositive bandwidth and empty samples are rejected") {
  CHECK_THROWS_AS(kde_pdf(std::vector<double>{1.0}, 0.0, 0.5), NonpositiveBandwidth);
  CHECK_THROWS_AS(kde_pdf(std::vector<double>{}, 1.0, 0.5), EmptyPopulation);
}

TEST_CASE("identical populations give LR = 1 everywhere") {
  const std::vector<double> pop = {0.1, 0.4, 0.7, 0.9};
  const LRModel model = fit_lr_model(pop, pop);
  for (double x : {0.0, 0.3, 0.55, 1.2})
    CHECK(likelihood_ratio(model, x) == Catch::Approx(1.0));
}

TEST_CASE("LR is large deep in the match mass") {
  const LRModel model = fit_lr_model({0.0, 0.1, 0.2}, {5.0, 5.3, 4.9});
  CHECK(likelihood_ratio(model, 0.1) > 100.0);
  CHECK(likelihood_ratio(model, 5.0) < 0.01);
}

TEST_CASE("LR is 1 at the symmetric midpoint") {
  LRModel model;
  model.h0_scores = {0.0, 0.0};
  model.h1_scores = {10.0, 10.0};
  model.bandwidth_h0 = model.bandwidth_h1 = 1.0;
  CHECK(likelihood_ratio(model, 5.0) == Catch::Approx(1.0));
}

TEST_CASE("unfitted model raises") {
  CHECK_THROWS_AS(likelihood_ratio(LRModel{}, 0.5), UnfittedModel);
}

TEST_CASE("cllr of the uninformative reference system is exactly one") {
  const std::vector<double> ones(5, 1.0);
  CHECK(cllr(ones, ones) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cllr worked fixtures") {
  CHECK(cllr(std::vector<double>{3.0}, std::vector<double>{1.0 / 3.0}) ==
        Catch::Approx(std::log2(4.0 / 3.0)));
  CHECK(cllr(std::vector<double>{1e6}, std::vector<double>{1e-6}) ==
        Catch::Approx(0.0).margin(1e-4));
}

TEST_CASE("cllr input validation") {
  CHECK_THROWS_AS(cllr(std::vector<double>{}, std::vector<double>{1.0}), EmptyPopulation);
  CHECK_THROWS_AS(cllr(std::vector<double>{1.0}, std::vector<double>{0.0}), NonpositiveLR);
  CHECK_THROWS_AS(cllr(std::vector<double>{-2.0}, std::vector<double>{1.0}), NonpositiveLR);
}

TEST_CASE("cllr improves monotonically with separation") {
  Rng rng(9);
  std::vector<double> lr0, lr1;
  for (int i = 0; i < 30; ++i) {
    lr0.push_back(std::exp(rng.uniform(-1, 3)));
    lr1.push_back(std::exp(rng.uniform(-3, 1)));
  }
  const double base = cllr(lr0, lr1);
  for (double k : {1.5, 4.0, 20.0}) {
    std::vector<double> s0 = lr0, s1 = lr1;
    for (double& v : s0) v *= k;
    for (double& v : s1) v /= k;
    CHECK(cllr(s0, s1) < base);
  }
}

TEST_CASE("LR is invariant under affine score maps with mapped bandwidths") {
  Rng rng(21);
  std::vector<double> h0, h1;
  for (int i = 0; i < 12; ++i) {
    h0.push_back(rng.uniform(0, 0.3));
    h1.push_back(rng.uniform(0.4, 1.0));
  }
  LRModel model = fit_lr_model(h0, h1);
  model.floor = 1e-300;  // a finite floor would mask the tails
  const double a = 3.5, b = -2.0;  // strictly increasing map a*x + b
  LRModel mapped;
  for (double v : h0) mapped.h0_scores.push_back(a * v + b);
  for (double v : h1) mapped.h1_scores.push_back(a * v + b);
  mapped.bandwidth_h0 = a * model.bandwidth_h0;
  mapped.bandwidth_h1 = a * model.bandwidth_h1;
  mapped.floor = 1e-300;
  for (double x : {0.1, 0.35, 0.8})
    CHECK(likelihood_ratio(mapped, a * x + b) ==
          Catch::Approx(likelihood_ratio(model, x)));
}

TEST_CASE("fit_and_report needs two scores per population") {
  std::vector<LREntry> entries;
  LREntry e;
  e.score = 0.1;
  e.is_match = true;
  entries.push_back(e);
  e.score = 0.8;
  e.is_match = false;
  entries.push_back(e);
  e.score = 0.9;
  entries.push_back(e);
  CHECK_THROWS_AS(fit_and_report(entries), EmptyPopulation);
}

TEST_CASE("leave-one-out changes LR values but keeps them positive") {
  Rng rng(31);
  std::vector<LREntry> entries;
  for (int i = 0; i < 10; ++i) {
    LREntry e;
    e.score = rng.uniform(0, 0.3);
    e.is_match = true;
    entries.push_back(e);
    e.score = rng.uniform(0.35, 1.0);
    e.is_match = false;
    entries.push_back(e);
  }
  const LRReport in_sample = fit_and_report(entries, {});
  LROptions loo;
  loo.leave_one_out = true;
  const LRReport held_out = fit_and_report(entries, loo);
  REQUIRE(in_sample.entries.size() == held_out.entries.size());
  bool any_different = false;
  for (std::size_t i = 0; i < in_sample.entries.size(); ++i) {
    CHECK(in_sample.entries[i].lr > 0.0);
    CHECK(held_out.entries[i].lr > 0.0);
    if (in_sample.entries[i].lr != held_out.entries[i].lr) any_different = true;
  }
  CHECK(any_different);
  CHECK(held_out.cllr_value >= 0.0);
}

TEST_CASE("silverman bandwidth is positive, also for degenerate samples") {
  CHECK(silverman_bandwidth(std::vector<double>{1, 2, 3, 4, 5}) > 0.0);
  CHECK(silverman_bandwidth(std::vector<double>{2, 2, 2, 2}) > 0.0);
}
