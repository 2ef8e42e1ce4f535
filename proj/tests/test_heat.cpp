#include "doctest.h"

#include <cmath>

#include "core/heat.hpp"
#include "core/support.hpp"

using namespace parcap;
using namespace parcap::model;
using namespace parcap::heat;

TEST_CASE("heat_kernel: normalization point, mass, semigroup") {
  double t0 = 1.0 / (4.0 * M_PI);
  for (int N : {1, 2, 3}) CHECK(heat_kernel(make_vec(0.3, -0.1, 0.2), make_vec(0.3, -0.1, 0.2), t0, N) ==
                                doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(heat_kernel(make_vec(0), make_vec(0), 0.0, 1), Error);

  SUBCASE("unit mass by quadrature") {
    double t = 0.37;
    double w = 10.0 * std::sqrt(t);
    int n = 4001;
    double h = 2 * w / (n - 1);
    double acc = 0;
    for (int i = 0; i < n; ++i)
      acc += heat_kernel(make_vec(0.2), make_vec(-w + 0.2 + i * h), t, 1);
    CHECK(acc * h == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("semigroup identity by quadrature") {
    double t = 0.2, s = 0.35;
    Vec x = make_vec(0.1), y = make_vec(-0.4);
    double w = 12.0;
    int n = 6001;
    double h = 2 * w / (n - 1);
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      Vec z = make_vec(-w + i * h);
      acc += heat_kernel(x, z, t, 1) * heat_kernel(z, y, s, 1);
    }
    CHECK(acc * h == doctest::Approx(heat_kernel(x, y, t + s, 1)).epsilon(1e-8));
  }
}

TEST_CASE("heat_potential: atom, constant, Gaussian identities") {
  SUBCASE("unit atom reproduces the kernel") {
    auto src = Source::from_atoms(AtomicMeasure::dirac(make_vec(0.2, -0.3)));
    Vec x = make_vec(0.5, 0.4);
    CHECK(heat_potential_at(src, x, 0.7, 2) ==
          doctest::Approx(heat_kernel(x, make_vec(0.2, -0.3), 0.7, 2)).epsilon(1e-14));
  }
  SUBCASE("constant one stays one") {
    auto src = Source::constant_one();
    CHECK(heat_potential_at(src, make_vec(3, 1), 0.01, 2) == 1.0);
  }
  SUBCASE("Gaussian to Gaussian with the exact variance shift") {
    // eta = exp(-|x|^2), t = 1/4, N = 1: H[eta](x) = 2^{-1/2} exp(-|x|^2/2).
    Grid g(make_vec(-8), make_vec(8), 0.05, 1);
    GridFn eta{g, {}};
    eta.values.resize(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double x = g.node(i)[0];
      eta.values[i] = std::exp(-x * x);
    }
    auto src = Source::from_density(eta);
    for (double x : {0.0, 0.3, -0.9, 1.7}) {
      double expect = std::exp(-x * x / 2.0) / std::sqrt(2.0);
      CHECK(heat_potential_at(src, make_vec(x), 0.25, 1) ==
            doctest::Approx(expect).epsilon(1e-10));
    }
  }
  SUBCASE("linearity in the source and monotone comparison") {
    Grid g(make_vec(-2), make_vec(2), 0.1, 1);
    GridFn f1{g, std::vector<double>(g.node_count(), 0.0)};
    GridFn f2 = f1;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double x = g.node(i)[0];
      f1.values[i] = std::max(0.0, 1.0 - std::abs(x));
      f2.values[i] = f1.values[i] + 0.3 * std::exp(-x * x);
    }
    Vec x = make_vec(0.4);
    double a = heat_potential_at(Source::from_density(f1), x, 0.2, 1);
    double b = heat_potential_at(Source::from_density(f2), x, 0.2, 1);
    CHECK(b > a);  // source order is preserved
    GridFn sum = f1;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] *= 2.0;
    CHECK(heat_potential_at(Source::from_density(sum), x, 0.2, 1) ==
          doctest::Approx(2.0 * a).epsilon(1e-13));
  }
}

TEST_CASE("heat potential order property and spatial scaling") {
  Grid g(make_vec(-6), make_vec(6), 0.05, 1);
  GridFn eta{g, std::vector<double>(g.node_count(), 0.0)};
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double x = g.node(i)[0];
    eta.values[i] = std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
  }
  auto src = Source::from_density(eta);

  SUBCASE("H[H[eta](s)](t) = H[eta](t+s)") {
    double s = 0.15, t = 0.25;
    Grid mid(make_vec(-8), make_vec(8), 0.05, 1);
    GridFn midfn{mid, std::vector<double>(mid.node_count(), 0.0)};
    for (std::size_t i = 0; i < mid.node_count(); ++i)
      midfn.values[i] = heat_potential_at(src, mid.node(i), s, 1);
    auto src2 = Source::from_density(midfn);
    for (double x : {0.0, 0.7, -1.3}) {
      CHECK(heat_potential_at(src2, make_vec(x), t, 1) ==
            doctest::Approx(heat_potential_at(src, make_vec(x), t + s, 1)).epsilon(1e-8));
    }
  }
  SUBCASE("H[eta(tau .)](x, t) = H[eta](tau x, tau^2 t)") {
    for (double tau : {0.5, 2.0}) {
      Grid gs(make_vec(-6 / tau), make_vec(6 / tau), 0.05 / tau, 1);
      GridFn etas{gs, std::vector<double>(gs.node_count(), 0.0)};
      for (std::size_t i = 0; i < gs.node_count(); ++i) {
        double x = gs.node(i)[0] * tau;
        etas.values[i] = std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
      }
      auto srcs = Source::from_density(etas);
      double x = 0.4, t = 0.3;
      CHECK(heat_potential_at(srcs, make_vec(x), t, 1) ==
            doctest::Approx(heat_potential_at(src, make_vec(tau * x), tau * tau * t, 1))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("gaussian_domination_check") {
  Grid g(make_vec(-7), make_vec(7), 0.05, 1);
  double M = 2.0, a = 1.0;
  SUBCASE("pure Gaussian envelope is the equality case") {
    GridFn eta{g, std::vector<double>(g.node_count(), 0.0)};
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double x = g.node(i)[0];
      eta.values[i] = M * std::exp(-a * x * x);
    }
    auto rep = gaussian_domination_check(eta, M, a, 0.0, {0.1, 0.5, 1.0});
    CHECK(rep.worst_ratio == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("zero function gives zero ratio") {
    GridFn eta{g, std::vector<double>(g.node_count(), 0.0)};
    auto rep = gaussian_domination_check(eta, M, a, 0.0, {0.25});
    CHECK(rep.worst_ratio == 0.0);
  }
  SUBCASE("truncated profile with b = 1 stays below the provable bound") {
    GridFn eta{g, std::vector<double>(g.node_count(), 0.0)};
    double b = 1.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double x = g.node(i)[0];
      double pos = std::max(0.0, std::abs(x) - b);
      eta.values[i] = M * std::exp(-a * pos * pos);
    }
    auto rep = gaussian_domination_check(eta, M, a, b, {0.05, 0.2, 0.8, 2.0});
    CHECK(rep.worst_ratio_relaxed <= 1.0 + 1e-6);
    // The sharp constant-one normalization is exceeded by a bounded factor
    // for b > 0 (the b-shifted profile only holds with a constant in front).
    CHECK(rep.worst_ratio < 4.0);
  }
  SUBCASE("violated hypothesis raises the dedicated error") {
    GridFn eta{g, std::vector<double>(g.node_count(), 0.0)};
    for (std::size_t i = 0; i < g.node_count(); ++i) eta.values[i] = M * 1.5;
    try {
      gaussian_domination_check(eta, M, a, 0.0, {0.1});
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == errc::hypothesis_violated);
    }
  }
}

TEST_CASE("green_potential: zero, constant preservation, nested-quadrature oracle") {
  SUBCASE("zero source") {
    Grid g(make_vec(-1), make_vec(1), 0.25, 1);
    SpaceTimeField f;
    f.grid = g;
    f.times = {0.1, 0.2, 0.3, 0.4};
    f.values.assign(4, std::vector<double>(g.node_count(), 0.0));
    auto gf = green_potential(f, 1);
    for (const auto& slice : gf.values)
      for (double v : slice) CHECK(v == 0.0);
  }
  SUBCASE("constant one integrates to t") {
    // H[1] = 1, so G[1](t) = t; build a wide box so truncation is negligible
    // at the probe point.
    Grid g(make_vec(-26), make_vec(26), 0.25, 1);
    auto times = support::linspace(0.05, 1.0, 20);
    SpaceTimeField f;
    f.grid = g;
    f.times = times;
    f.values.assign(times.size(), std::vector<double>(g.node_count(), 1.0));
    Vec probe = make_vec(0.0);
    for (std::size_t k : {std::size_t(4), std::size_t(12), std::size_t(19)}) {
      double got = green_potential_at(f, 1, probe, times[k]);
      CHECK(got == doctest::Approx(times[k]).epsilon(1e-8));
    }
  }
  SUBCASE("time grid with fewer than 4 nodes is rejected") {
    Grid g(make_vec(-1), make_vec(1), 0.5, 1);
    SpaceTimeField f;
    f.grid = g;
    f.times = {0.1, 0.2};
    f.values.assign(2, std::vector<double>(g.node_count(), 0.0));
    CHECK_THROWS_AS(green_potential(f, 1), Error);
  }
  SUBCASE("squared mollified-kernel source against an independent nested quadrature") {
    // eta = exp(-x^2 / (2 s0^2)), f(y, s) = H[eta](y, s)^2, target G[f](0, T).
    double T = 0.5;
    double s0 = 0.1;
    double var0 = s0 * s0;
    Grid g(make_vec(-10), make_vec(10), 0.025, 1);
    auto amp = [&](double s) { return std::sqrt(var0 / (var0 + 2.0 * s)); };
    auto field = [&](double y, double s) {
      double v = amp(s) * std::exp(-y * y / (2.0 * (var0 + 2.0 * s)));
      return v * v;
    };
    auto times = support::linspace(T / 800.0, T, 800);
    SpaceTimeField f;
    f.grid = g;
    f.times = times;
    f.values.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      f.values[k].resize(g.node_count());
      for (std::size_t i = 0; i < g.node_count(); ++i)
        f.values[k][i] = field(g.node(i)[0], times[k]);
    }
    double got = green_potential_at(f, 1, make_vec(0), T);

    // Oracle: the inner spatial integral closes as a Gaussian product, the
    // remaining 1-d profile integrates adaptively.
    auto inner = [&](double s) {
      double A2 = amp(s) * amp(s);
      double beta = 1.0 / (4.0 * (T - s)) + 1.0 / (var0 + 2.0 * s);
      return A2 * std::sqrt(M_PI / beta) / std::sqrt(4.0 * M_PI * (T - s));
    };
    double oracle = support::adaptive_simpson(inner, 1e-12, T - 1e-12, 1e-12);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("r_functional: zero input, bump family ratio, dilation invariance") {
  auto ctx = make_context(2, 2.0);
  auto bump_on = [&](double width, double h) {
    Grid g(make_vec(-1.5, -1.5), make_vec(1.5, 1.5), h, 2);
    GridFn eta{g, std::vector<double>(g.node_count(), 0.0)};
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      double r = norm(g.node(i), 2) / width;
      eta.values[i] = r < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    }
    return eta;
  };
  SUBCASE("eta = 0 gives 0") {
    Grid g(make_vec(-1, -1), make_vec(1, 1), 0.25, 2);
    GridFn eta{g, std::vector<double>(g.node_count(), 0.0)};
    auto rep = r_functional(eta, ctx, 0.5);
    CHECK(rep.value == 0.0);
  }
  SUBCASE("bump family: ratio in a fixed window, stable under refinement") {
    for (double width : {0.6, 0.9, 1.2}) {
      auto coarse = r_functional(bump_on(width, 1.0 / 12), ctx, 0.5);
      auto fine = r_functional(bump_on(width, 1.0 / 16), ctx, 0.5);
      CHECK(fine.ratio > 0.45);
      CHECK(fine.ratio < 40.0);
      CHECK(std::abs(fine.ratio - coarse.ratio) / coarse.ratio < 0.15);
    }
  }
  SUBCASE("dilation leaves the ratio nearly invariant (sp = N)") {
    auto base = r_functional(bump_on(0.8, 1.0 / 16), ctx, 0.5);
    // eta_tau(x) = eta(tau x) sampled on the correspondingly scaled grid.
    double tau = 2.0;
    Grid gs(make_vec(-0.75, -0.75), make_vec(0.75, 0.75), 1.0 / 32, 2);
    GridFn etas{gs, std::vector<double>(gs.node_count(), 0.0)};
    for (std::size_t i = 0; i < gs.node_count(); ++i) {
      double r = norm(gs.node(i), 2) * tau / 0.8;
      etas.values[i] = r < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    }
    auto scaled = r_functional(etas, ctx, 0.5 / (tau * tau));
    CHECK(std::abs(scaled.ratio - base.ratio) / base.ratio < 0.05);
  }
  SUBCASE("out-of-range eta rejected") {
    Grid g(make_vec(-1, -1), make_vec(1, 1), 0.5, 2);
    GridFn eta{g, std::vector<double>(g.node_count(), 2.0)};
    CHECK_THROWS_AS(r_functional(eta, ctx, 0.5), Error);
  }
}

TEST_CASE("weighted_lq_norm: zero measure, supercritical finiteness, critical growth") {
  SUBCASE("zero measure") {
    auto ctx = make_context(2, 3.0);
    auto rep = weighted_lq_norm(AtomicMeasure{}, ctx, 1.0);
    CHECK(rep.lq_norm == 0.0);
    CHECK(rep.weighted_norm == 0.0);
  }
  SUBCASE("N=2, q=3 is strictly supercritical: finite extension and tail exponent") {
    auto ctx = make_context(2, 3.0);
    auto rep = weighted_lq_norm(AtomicMeasure::dirac(make_vec(0, 0)), ctx, 1.0);
    CHECK(rep.q_infty_finite);
    CHECK(rep.tail_exponent == doctest::Approx(-2.0));
    CHECK(rep.q_infty_norm > rep.lq_norm);
    CHECK(std::isfinite(rep.q_infty_norm));
    // Comparability of the two returned norms.
    CHECK(rep.weighted_norm / rep.lq_norm > 0.05);
    CHECK(rep.weighted_norm / rep.lq_norm < 20.0);
    // The slice integral decays like t^{-N(q-1)/2}: check empirically.
    auto rep2 = weighted_lq_norm(AtomicMeasure::dirac(make_vec(0, 0)), ctx, 2.0);
    CHECK(rep2.lq_norm > rep.lq_norm);
  }
  SUBCASE("q = q_c (N=2, q=2): truncated norms grow like log T") {
    auto ctx = make_context(2, 2.0);
    CHECK_FALSE(weighted_lq_norm(AtomicMeasure::dirac(make_vec(0, 0)), ctx, 1.0).q_infty_finite);
    double g1 = std::pow(weighted_lq_norm(AtomicMeasure::dirac(make_vec(0, 0)), ctx, 1.0).lq_norm, 2.0);
    double g2 = std::pow(weighted_lq_norm(AtomicMeasure::dirac(make_vec(0, 0)), ctx, 10.0).lq_norm, 2.0);
    double g3 = std::pow(weighted_lq_norm(AtomicMeasure::dirac(make_vec(0, 0)), ctx, 100.0).lq_norm, 2.0);
    double d1 = g2 - g1, d2 = g3 - g2;
    CHECK(d1 > 0);
    CHECK(d2 > 0);
    // log-divergence: equal decade increments within 20%
    CHECK(std::abs(d2 - d1) / d1 < 0.2);
  }
  SUBCASE("T <= 0 rejected") {
    auto ctx = make_context(2, 2.0);
    CHECK_THROWS_AS(weighted_lq_norm(AtomicMeasure::dirac(make_vec(0, 0)), ctx, 0.0), Error);
  }
}
