// Copyright 2026 The strfkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "strfkit/error.hpp"
#include "strfkit/modanalysis.hpp"
#include "test_util.hpp"

using namespace strfkit;
using strfkit::testing::make_rng;
using strfkit::testing::uniform;

namespace {

ModulationPoint pt(double omega, double Omega) { return {.omega = omega, .Omega = Omega}; }

std::vector<ModulationPoint> random_population(std::uint64_t seed, int n, double omega_max = 50.0,
                                               double Omega_max = 4.0) {
  auto rng = make_rng(seed);
  std::vector<ModulationPoint> v;
  for (int i = 0; i < n; ++i) v.push_back(pt(uniform(rng, -omega_max, omega_max), uniform(rng, 0.0, Omega_max)));
  return v;
}

// One-sided Jacobi SVD: orthogonalize column pairs until converged; the
// singular values are the final column norms.
std::vector<double> jacobi_singular_values(Eigen::MatrixXd a) {
  const Eigen::Index n = a.cols();
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const double gamma = a.col(p).dot(a.col(q));
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        const Eigen::VectorXd ap = a.col(p), aq = a.col(q);
        a.col(p) = c * ap - s * aq;
        a.col(q) = s * ap + c * aq;
      }
    if (off < 1e-15) break;
  }
  std::vector<double> sv;
  for (Eigen::Index j = 0; j < n; ++j) sv.push_back(a.col(j).norm());
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

std::pair<Eigen::Index, Eigen::Index> nearest_cell(const DensityGrid& d, double omega, double Omega) {
  auto nearest = [](const std::vector<double>& axis, double x) {
    Eigen::Index best = 0;
    for (std::size_t i = 1; i < axis.size(); ++i)
      if (std::abs(axis[i] - x) < std::abs(axis[static_cast<std::size_t>(best)] - x)) best = static_cast<Eigen::Index>(i);
    return best;
  };
  return {nearest(d.Omega_axis, Omega), nearest(d.omega_axis, omega)};
}

bool is_local_max(const Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j) {
  for (Eigen::Index di = -1; di <= 1; ++di)
    for (Eigen::Index dj = -1; dj <= 1; ++dj) {
      const Eigen::Index a = i + di, b = j + dj;
      if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= m.rows() || b >= m.cols()) continue;
      if (m(a, b) > m(i, j)) return false;
    }
  return true;
}

}  // namespace

TEST_SUITE("modanalysis") {

TEST_CASE("alpha_asymmetry counts positive omega") {
  std::vector<ModulationPoint> all_up(10, pt(3.0, 1.0));
  CHECK(alpha_asymmetry(all_up).fraction == 1.0);
  CHECK(alpha_asymmetry(all_up).centered == 1.0);

  std::vector<ModulationPoint> half;
  for (int i = 0; i < 10; ++i) half.push_back(pt(i < 5 ? 2.0 : -2.0, 0.5));
  CHECK(alpha_asymmetry(half).fraction == 0.5);
  CHECK(alpha_asymmetry(half).centered == 0.0);

  const auto pop = random_population(1, 64);
  int up = 0;
  for (const auto& p : pop) up += p.omega > 0.0 ? 1 : 0;
  CHECK(alpha_asymmetry(pop).fraction == doctest::Approx(up / 64.0).epsilon(1e-15));

  CHECK(alpha_asymmetry(std::vector<ModulationPoint>{pt(0.0, 1.0)}).fraction == 0.0);
  CHECK_THROWS_AS(alpha_asymmetry({}), InvalidInput);
}

TEST_CASE("alpha_low uses the strict box") {
  std::vector<ModulationPoint> pts;
  for (int i = 0; i < 7; ++i) pts.push_back(pt(-15.0 + 4.0 * i, 0.01 * i));
  pts.push_back(pt(20.0, 0.01));
  pts.push_back(pt(0.0, 0.5));
  pts.push_back(pt(-30.0, 1.0));
  CHECK(alpha_low(pts) == doctest::Approx(0.7).epsilon(1e-15));

  CHECK(alpha_low(std::vector<ModulationPoint>{pt(16.0, 0.0)}) == 0.0);
  CHECK(alpha_low(std::vector<ModulationPoint>{pt(-16.0, 0.0)}) == 0.0);
  CHECK(alpha_low(std::vector<ModulationPoint>{pt(0.0, 0.08)}) == 0.0);
  CHECK(alpha_low(std::vector<ModulationPoint>{pt(15.999, 0.0799)}) == 1.0);

  CHECK_THROWS_AS(alpha_low({}), InvalidInput);
  CHECK_THROWS_AS(alpha_low(pts, {.delta_t = 0.0, .delta_f = 0.08}), InvalidConfig);
  CHECK_THROWS_AS(alpha_low(pts, {.delta_t = 16.0, .delta_f = -1.0}), InvalidConfig);
}

TEST_CASE("alpha_star closed cases") {
  // on the strips, outside the box
  std::vector<ModulationPoint> strips = {pt(5.0, 2.0), pt(-3.0, 1.0), pt(30.0, 0.01), pt(-40.0, 0.05)};
  CHECK(alpha_star(strips) == 1.0);
  std::vector<ModulationPoint> off = {pt(20.0, 1.0), pt(-30.0, 0.2), pt(45.0, 3.0)};
  CHECK(alpha_star(off) == 0.0);
  std::vector<ModulationPoint> boxed = {pt(1.0, 0.01), pt(-2.0, 0.0)};
  CHECK_THROWS_AS(alpha_star(boxed), DegenerateDistribution);
}

TEST_CASE("alpha_star matches a recount on hand-placed points") {
  const std::vector<ModulationPoint> pts = {
      pt(0.0, 0.0),   pt(10.0, 0.05),  pt(-12.0, 0.07), pt(15.0, 0.5),  pt(-1.0, 3.0),
      pt(5.0, 1.2),   pt(40.0, 0.02),  pt(-22.0, 0.0),  pt(17.0, 0.09), pt(-16.0, 0.08),
      pt(30.0, 2.0),  pt(-45.0, 1.0),  pt(8.0, 0.08),   pt(3.0, 0.079), pt(-5.0, 0.3),
      pt(25.0, 0.06), pt(-35.0, 4.0),  pt(0.5, 0.5),    pt(50.0, 0.0),  pt(-15.99, 1.5),
  };
  int n_dt = 0, n_df = 0, n_low = 0;
  for (const auto& p : pts) {
    const bool a = std::abs(p.omega) < 16.0, b = p.Omega < 0.08;
    n_dt += a;
    n_df += b;
    n_low += a && b;
  }
  // by hand: |omega| < 16 at indices 0-4,5,12,13,14,17,19 -> 11;
  // Omega < 0.08 at 0,1,2,6,7,13,15,18 -> 8; both at 0,1,2,13 -> 4
  CHECK(n_dt == 11);
  CHECK(n_df == 8);
  CHECK(n_low == 4);
  const auto c = box_counts(pts);
  CHECK(c.n == 20);
  CHECK(c.n_dt == 11);
  CHECK(c.n_df == 8);
  CHECK(c.n_low == 4);
  CHECK(alpha_star(pts) == doctest::Approx((11.0 + 8.0 - 8.0) / 16.0).epsilon(1e-15));
  CHECK(alpha_low(pts) == doctest::Approx(4.0 / 20.0).epsilon(1e-15));
}

TEST_CASE("counting properties on random populations") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto pop = random_population(seed, 40, 30.0, 0.3);
    const auto c = box_counts(pop);
    CHECK(c.n_low <= std::min(c.n_dt, c.n_df));
    const auto outside = std::count_if(pop.begin(), pop.end(), [](const auto& p) {
      return !(std::abs(p.omega) < 16.0 && p.Omega < 0.08);
    });
    CHECK(alpha_low(pop) + static_cast<double>(outside) / 40.0 == doctest::Approx(1.0).epsilon(1e-15));

    const double star = alpha_star(pop);
    CHECK(star >= 0.0);
    CHECK(star <= 1.0);
    auto shuffled = pop;
    std::shuffle(shuffled.begin(), shuffled.end(), make_rng(seed + 100));
    CHECK(alpha_star(shuffled) == star);
    auto doubled = pop;
    doubled.insert(doubled.end(), pop.begin(), pop.end());
    CHECK(alpha_star(doubled) == star);
  }
}

TEST_CASE("kde of a cluster at the origin peaks at the origin cell") {
  auto rng = make_rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<ModulationPoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(pt(2.0 * g(rng), std::abs(0.005 * g(rng))));
  const auto d = kde_density(pts, 50.0, 4.25);
  REQUIRE(d.values.rows() == 64);
  REQUIRE(d.values.cols() == 64);
  Eigen::Index i, j;
  d.values.maxCoeff(&i, &j);
  const auto [ei, ej] = nearest_cell(d, 0.0, 0.0);
  CHECK(i == ei);
  CHECK(std::abs(j - ej) <= 1);  // lattice has no cell at omega = 0 exactly
  CHECK(d.values.minCoeff() >= 0.0);
  CHECK(d.omega_axis.front() == -50.0);
  CHECK(d.omega_axis.back() == 50.0);
  CHECK(d.Omega_axis.front() == 0.0);
}

TEST_CASE("kde sums to one and matches direct evaluation") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pop = random_population(seed, 25);
    const auto d = kde_density(pop, ConversionRates{.frame_rate = 100.0, .channels_per_octave = 8.0});
    CHECK(std::abs(d.values.sum() - 1.0) < 1e-9);

    // Scott's rule with the sample standard deviation
    double mean = 0.0, ss = 0.0;
    for (const auto& p : pop) mean += p.omega / 25.0;
    for (const auto& p : pop) ss += (p.omega - mean) * (p.omega - mean);
    CHECK(d.bandwidth_omega == doctest::Approx(std::sqrt(ss / 24.0) * std::pow(25.0, -1.0 / 6.0)).epsilon(1e-12));

    // ratio of two cells from a direct sum over points
    auto direct = [&](Eigen::Index i, Eigen::Index j) {
      double s = 0.0;
      for (const auto& p : pop) {
        const double a = (d.omega_axis[static_cast<std::size_t>(j)] - p.omega) / d.bandwidth_omega;
        const double b = (d.Omega_axis[static_cast<std::size_t>(i)] - p.Omega) / d.bandwidth_Omega;
        s += std::exp(-0.5 * (a * a + b * b));
      }
      return s;
    };
    CHECK(d.values(10, 20) / d.values(40, 50) == doctest::Approx(direct(10, 20) / direct(40, 50)).epsilon(1e-10));
  }
}

TEST_CASE("kde of two separated clusters has a local maximum at each") {
  auto rng = make_rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<ModulationPoint> pts;
  for (int i = 0; i < 40; ++i) {
    const bool left = i % 2 == 0;
    pts.push_back(pt((left ? -30.0 : 25.0) + g(rng), (left ? 1.0 : 3.0) + 0.05 * g(rng)));
  }
  const auto d = kde_density(pts, 50.0, 4.25);
  const auto [i1, j1] = nearest_cell(d, -30.0, 1.0);
  const auto [i2, j2] = nearest_cell(d, 25.0, 3.0);
  // allow a one-cell drift from sampling noise
  auto local_max_near = [&](Eigen::Index i, Eigen::Index j) {
    for (Eigen::Index a = i - 1; a <= i + 1; ++a)
      for (Eigen::Index b = j - 1; b <= j + 1; ++b)
        if (is_local_max(d.values, a, b)) return true;
    return false;
  };
  CHECK(local_max_near(i1, j1));
  CHECK(local_max_near(i2, j2));
  CHECK(d.values((i1 + i2) / 2, (j1 + j2) / 2) < std::min(d.values(i1, j1), d.values(i2, j2)));
}

TEST_CASE("kde degenerate inputs") {
  CHECK_THROWS_AS(kde_density(std::vector<ModulationPoint>(5, pt(1.0, 1.0)), 50.0, 4.0), DegenerateDistribution);
  CHECK_THROWS_AS(kde_density(std::vector<ModulationPoint>{pt(1.0, 1.0)}, 50.0, 4.0), DegenerateDistribution);
  // one axis without spread falls back to the lattice spacing
  const auto d = kde_density(std::vector<ModulationPoint>{pt(1.0, 1.0), pt(5.0, 1.0)}, 50.0, 4.0);
  CHECK(d.bandwidth_Omega == doctest::Approx(4.0 / 63.0));
}

TEST_CASE("alpha_separability closed forms") {
  auto rng = make_rng(4);
  const Eigen::VectorXd a = strfkit::testing::random_matrix(rng, 64, 1, 0.0, 1.0).col(0);
  const Eigen::VectorXd b = strfkit::testing::random_matrix(rng, 64, 1, 0.0, 1.0).col(0);
  Eigen::MatrixXd rank1 = a * b.transpose();
  rank1 /= rank1.sum();
  CHECK(std::abs(alpha_separability(rank1) - 1.0) < 1e-9);

  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
  diag(0, 0) = diag(1, 1) = 0.5;
  CHECK(alpha_separability(diag) == 0.5);

  CHECK_THROWS_AS(alpha_separability(Eigen::MatrixXd::Zero(4, 4)), DegenerateDistribution);
  CHECK_THROWS_AS(alpha_separability(Eigen::MatrixXd()), DegenerateDistribution);
}

TEST_CASE("singular values agree with a Jacobi oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto rng = make_rng(seed);
    Eigen::MatrixXd m = strfkit::testing::random_matrix(rng, 24, 17, 0.0, 1.0);
    m /= m.sum();
    const auto ours = singular_values(m);
    const auto oracle = jacobi_singular_values(m);
    REQUIRE(ours.size() == 17);
    for (std::size_t i = 0; i < ours.size(); ++i) CHECK(std::abs(ours[i] - oracle[i]) < 1e-12);
    double total = 0.0;
    for (double v : oracle) total += v;
    CHECK(std::abs(alpha_separability(m) - oracle[0] / total) < 1e-9);
    CHECK(std::abs(alpha_separability(m) - alpha_separability(m.transpose())) < 1e-12);
  }
  const auto d = kde_density(random_population(7, 30), 50.0, 4.25);
  const auto oracle = jacobi_singular_values(d.values);
  double total = 0.0;
  for (double v : oracle) total += v;
  CHECK(std::abs(alpha_separability(d.values) - oracle[0] / total) < 1e-9);
}

TEST_CASE("bootstrap of a constant statistic has zero width") {
  const auto pop = random_population(2, 20);
  const auto ci = bootstrap_ci(pop, [](auto) { return 0.25; });
  CHECK(ci.estimate == 0.25);
  CHECK(ci.low == 0.25);
  CHECK(ci.high == 0.25);
  CHECK(ci.n_valid == 100);
  CHECK_THROWS_AS(bootstrap_ci({}, [](auto) { return 0.0; }), InvalidInput);
}

TEST_CASE("bootstrap is reproducible and seed dependent") {
  const auto pop = random_population(5, 30);
  auto stat = [](std::span<const ModulationPoint> p) { return alpha_asymmetry(p).fraction; };
  const auto a = bootstrap_ci(pop, stat, 100, 42);
  const auto b = bootstrap_ci(pop, stat, 100, 42);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  bool differs = false;
  for (std::uint64_t s = 0; s < 5 && !differs; ++s) {
    const auto c = bootstrap_ci(pop, [](std::span<const ModulationPoint> p) {
      double m = 0.0;
      for (const auto& x : p) m += x.omega;
      return m;
    }, 100, s);
    const auto d = bootstrap_ci(pop, [](std::span<const ModulationPoint> p) {
      double m = 0.0;
      for (const auto& x : p) m += x.omega;
      return m;
    }, 100, s + 10);
    differs = c.low != d.low;
  }
  CHECK(differs);
  CHECK(a.low <= a.estimate);
  CHECK(a.estimate <= a.high);
}

TEST_CASE("bootstrap percentiles follow linear interpolation") {
  // Redraw the replicates with the documented seeding and recompute.
  const auto pop = random_population(6, 15);
  auto stat = [](std::span<const ModulationPoint> p) {
    double m = 0.0;
    for (const auto& x : p) m += x.Omega;
    return m / static_cast<double>(p.size());
  };
  const auto ci = bootstrap_ci(pop, stat, 100, 3);
  std::vector<double> reps;
  for (std::uint32_t r = 0; r < 100; ++r) {
    std::seed_seq seq{3u, 0u, r};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    std::vector<ModulationPoint> s(pop.size());
    for (auto& x : s) x = pop[pick(rng)];
    reps.push_back(stat(s));
  }
  CHECK(ci.low == doctest::Approx(strfkit::testing::percentile(reps, 0.025)).epsilon(1e-14));
  CHECK(ci.high == doctest::Approx(strfkit::testing::percentile(reps, 0.975)).epsilon(1e-14));
}

TEST_CASE("analyze_population reports undefined descriptors") {
  const ConversionRates rates{.frame_rate = 100.0, .channels_per_octave = 8.5};
  const auto one = analyze_population(std::vector<ModulationPoint>{pt(20.0, 1.0)}, rates);
  CHECK_FALSE(one.alpha_sep.has_value());
  CHECK_FALSE(one.alpha_sep_reason.empty());
  REQUIRE(one.alpha_star.has_value());
  CHECK(one.alpha_star->estimate == 0.0);

  const auto boxed = analyze_population(std::vector<ModulationPoint>{pt(1.0, 0.01), pt(2.0, 0.02)}, rates);
  CHECK_FALSE(boxed.alpha_star.has_value());
  CHECK_FALSE(boxed.alpha_star_reason.empty());
  CHECK(boxed.alpha_sep.has_value());

  const auto pop = random_population(8, 16);
  const auto s = analyze_population(pop, rates);
  CHECK(s.counts.n == 16);
  CHECK(s.alpha_low.estimate == alpha_low(pop));
  REQUIRE(s.alpha_sep.has_value());
  CHECK(s.alpha_sep->estimate > 0.0);
  CHECK(s.alpha_sep->estimate <= 1.0);
  CHECK(s.density.has_value());
}

}  // TEST_SUITE
