#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "specdiff/kinetic.hpp"
#include "specdiff/stats.hpp"

using namespace specdiff;

namespace {

Vec1 bump_sampler_1d(RngStream& rng) {
  for (;;) {
    double x = rng.uniform(0.0, 8.0);
    double z = (x - 1.5) / 0.5;
    if (rng.uniform() < std::exp(-z * z)) return Vec1{{x}};
  }
}

Vec2 bump_sampler_disk(RngStream& rng) {
  for (;;) {
    Vec2 y{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
    if (norm2(y) < 1.0 && rng.uniform() < std::exp(-8.0 * norm2(y - Vec2{{0.3, 0.0}})))
      return y;
  }
}

}  // namespace

TEST_CASE("ensemble init: supports, equilibrium velocities, determinism") {
  auto dom = DomainShape::half_space(1);
  auto ens = init_ensemble<1>(20000, bump_sampler_1d, dom, 0.5, 0.1, 7);
  CHECK(ens.size() == 20000);
  CHECK(ens.mass() == 1.0);
  for (long i = 0; i < ens.size(); ++i) CHECK(ens.x[i][0] >= 0.0);
  // Velocity marginal is the s = 1/2 equilibrium (Cauchy-type closed form).
  std::vector<double> v;
  for (long i = 0; i < ens.size(); ++i) v.push_back(ens.v[i][0]);
  double scale = EquilibriumSpec{0.5, 1}.sampling_scale();
  double ks = ks_one_sample(v, [&](double t) {
    return 0.5 + std::atan(t / scale) / 3.14159265358979323846;
  });
  CHECK(ks < 0.012);
  // Same seed reproduces the ensemble exactly; different seed does not.
  auto ens2 = init_ensemble<1>(20000, bump_sampler_1d, dom, 0.5, 0.1, 7);
  CHECK(ens2.x[123][0] == ens.x[123][0]);
  CHECK(ens2.v[456][0] == ens.v[456][0]);
  auto ens3 = init_ensemble<1>(20000, bump_sampler_1d, dom, 0.5, 0.1, 8);
  CHECK(ens3.x[123][0] != ens.x[123][0]);
  CHECK_THROWS_AS(init_ensemble<1>(0, bump_sampler_1d, dom, 0.5, 0.1, 7), ConfigError);
}

TEST_CASE("worker count does not change the trajectory") {
  auto dom = DomainShape::unit_ball(2);
  auto a = init_ensemble<2>(4000, bump_sampler_disk, dom, 0.5, 0.2, 11);
  auto b = a;
  for (int k = 0; k < 5; ++k) {
    step<2>(a, 1e-2, dom, Boundary::Specular, 1);
    step<2>(b, 1e-2, dom, Boundary::Specular, 3);
  }
  for (long i = 0; i < a.size(); ++i) {
    CHECK(a.x[i][0] == b.x[i][0]);
    CHECK(a.x[i][1] == b.x[i][1]);
    CHECK(a.v[i][0] == b.v[i][0]);
  }
}

TEST_CASE("specular walls conserve particle count exactly") {
  auto dom = DomainShape::unit_ball(2);
  auto ens = init_ensemble<2>(2000, bump_sampler_disk, dom, 0.5, 0.3, 3);
  for (int k = 0; k < 1000; ++k) {
    step<2>(ens, 5e-3, dom, Boundary::Specular);
    // Particles must stay inside the closed ball.
    if (k % 100 == 0)
      for (long i = 0; i < ens.size(); ++i)
        CHECK(boundary_distance(dom, ens.x[i]) > -1e-9);
  }
  CHECK(ens.mass() == 1.0);
  CHECK(ens.alive_count() == 2000);
}

TEST_CASE("absorbing walls: monotone mass, kill position on the boundary") {
  auto dom = DomainShape::unit_ball(2);
  auto ens = init_ensemble<2>(20000, bump_sampler_disk, dom, 0.5, 0.2, 5);
  double prev = ens.mass();
  for (int k = 0; k < 100; ++k) {
    step<2>(ens, 5e-3, dom, Boundary::Absorb);
    CHECK(ens.mass() <= prev);
    prev = ens.mass();
  }
  CHECK(ens.mass() < 1.0);  // heavy-tailed flights do exit by T = 0.5
  for (long i = 0; i < ens.size(); ++i)
    if (!ens.alive[i]) CHECK(std::fabs(norm(ens.x[i]) - 1.0) < 1e-9);
}

TEST_CASE("density histogram integrates to the alive fraction") {
  auto dom = DomainShape::half_space(1);
  auto ens = init_ensemble<1>(50000, bump_sampler_1d, dom, 0.5, 0.2, 9);
  for (int k = 0; k < 20; ++k) step<1>(ens, 1e-2, dom, Boundary::Specular);
  Grid1D g(0.0, 40.0, 160);
  auto f = density(ens, g);
  double captured = 0.0;
  for (long c = 0; c < g.n; ++c) captured += f.rho[c] * g.h();
  CHECK(f.mass == 1.0);
  CHECK(captured <= 1.0 + 1e-12);
  CHECK(captured > 0.9);  // most mass still inside the window

  auto dom2 = DomainShape::unit_ball(2);
  auto e2 = init_ensemble<2>(30000, bump_sampler_disk, dom2, 0.5, 0.2, 9);
  for (int k = 0; k < 20; ++k) step<2>(e2, 1e-2, dom2, Boundary::Absorb);
  PolarGrid pg(10, 16);
  auto f2 = density(e2, pg);
  double cap2 = 0.0;
  for (long i = 0; i < pg.n_r; ++i)
    for (long j = 0; j < pg.n_t; ++j) cap2 += f2.rho[pg.index(i, j)] * pg.area(i);
  CHECK(cap2 == doctest::Approx(f2.mass).epsilon(1e-12));
}

TEST_CASE("weighted phase-space norm: non-increasing trend for specular runs") {
  auto dom = DomainShape::half_space(1);
  auto ens = init_ensemble<1>(40000, bump_sampler_1d, dom, 0.5, 0.15, 17);
  Grid1D xg(0.0, 24.0, 48), vg(-30.0, 30.0, 60);
  std::vector<double> proxy;
  proxy.push_back(weighted_l2(ens, xg, vg));
  for (int snap = 0; snap < 19; ++snap) {
    for (int k = 0; k < 5; ++k) step<1>(ens, 5e-3, dom, Boundary::Specular);
    proxy.push_back(weighted_l2(ens, xg, vg));
  }
  // Mann-Kendall: reject an increasing trend at the 5% level.
  double z = mann_kendall_z(proxy);
  MESSAGE("weighted-L2 Mann-Kendall z = ", z);
  CHECK(z < 1.645);
  // Well-prepared data dissipate visibly over the run.
  CHECK(proxy.back() < proxy.front());
}

TEST_CASE("weighted norm guards") {
  auto dom = DomainShape::half_space(1);
  auto ens = init_ensemble<1>(500, bump_sampler_1d, dom, 0.5, 0.2, 1);
  Grid1D xg(0.0, 8.0, 16), vg(-10.0, 10.0, 20);
  CHECK_THROWS_AS(weighted_l2(ens, xg, vg), TooFewSamples);
}

TEST_CASE("free flight in the whole space matches straight-line transport") {
  auto dom = DomainShape::whole_space(2);
  ParticleEnsemble<2> ens;
  ens.x = {Vec2{{0.0, 0.0}}};
  ens.v = {Vec2{{1.0, 2.0}}};
  ens.alive = {1};
  ens.eps = 1.0;
  ens.s = 0.5;
  ens.seed = 42;
  auto before = ens.v[0];
  step<2>(ens, 0.25, dom, Boundary::Specular);
  // Transport happened before the collision redrew the velocity.
  CHECK(ens.x[0][0] != 0.0);
  CHECK(ens.t == doctest::Approx(0.25));
  (void)before;
}

TEST_CASE("step rejects bad input") {
  auto dom = DomainShape::half_space(1);
  auto ens = init_ensemble<1>(10, bump_sampler_1d, dom, 0.5, 0.2, 1);
  CHECK_THROWS_AS(step<1>(ens, 0.0, dom, Boundary::Specular), ConfigError);
  CHECK_THROWS_AS(step<1>(ens, -1.0, dom, Boundary::Specular), ConfigError);
}

TEST_CASE("half-line limit study: error decreases along the eps ladder" *
          doctest::skip(true)) {
  // Exercised by the acceptance binary; kept here for manual runs.
  LimitStudyConfig cfg;
  cfg.n = 20000;
  cfg.workers = 4;
  auto rows = limit_study_halfline(cfg);
  for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].l2_error < rows[i - 1].l2_error);
}
