#include "core/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/capacity.hpp"

namespace parcap::heat {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double AtomicMeasure::total_mass() const {
  double m = 0;
  for (const auto& a : atoms) m += a.mass;
  return m;
}

AtomicMeasure AtomicMeasure::dirac(const Vec& x, double mass) {
  AtomicMeasure m;
  m.atoms.push_back({x, mass});
  return m;
}

double heat_kernel(const Vec& x, const Vec& y, double t, int N) {
  require(t > 0 && std::isfinite(t), errc::invalid_argument, "heat_kernel requires t > 0");
  double r2 = 0;
  for (int i = 0; i < N; ++i) {
    double d = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
    r2 += d * d;
  }
  return std::pow(4.0 * kPi * t, -0.5 * N) * std::exp(-r2 / (4.0 * t));
}

Source Source::from_atoms(AtomicMeasure m) {
  Source s;
  s.kind = Kind::atoms;
  s.measure = std::move(m);
  for (const auto& a : s.measure.atoms)
    require(a.mass >= 0 && std::isfinite(a.mass), errc::invalid_argument,
            "atomic measure masses must be finite and >= 0");
  return s;
}

Source Source::from_density(GridFn f) {
  Source s;
  s.kind = Kind::density;
  s.density = std::move(f);
  return s;
}

Source Source::constant_one(double c) {
  Source s;
  s.kind = Kind::constant;
  s.constant = c;
  return s;
}

double heat_potential_at(const Source& src, const Vec& x, double t, int N) {
  require(t > 0, errc::invalid_argument, "heat potential requires t > 0");
  switch (src.kind) {
    case Source::Kind::constant:
      return src.constant;  // the kernel has unit mass
    case Source::Kind::atoms: {
      double acc = 0;
      for (const auto& a : src.measure.atoms) acc += a.mass * heat_kernel(x, a.location, t, N);
      return acc;
    }
    case Source::Kind::density: {
      const Grid& g = src.density.grid;
      double hN = std::pow(g.spacing(), g.dim());
      double acc = 0;
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        double v = src.density.values[i];
        if (v != 0.0) acc += v * heat_kernel(x, g.node(i), t, N);
      }
      return hN * acc;
    }
  }
  return 0;
}

SpaceTimeField heat_potential(const Source& src, const Grid& eval_grid,
                              const std::vector<double>& t_values, int N) {
  require(!t_values.empty(), errc::invalid_argument, "heat_potential needs at least one time");
  for (std::size_t k = 1; k < t_values.size(); ++k)
    require(t_values[k] > t_values[k - 1], errc::invalid_argument,
            "t_values must be strictly increasing");
  SpaceTimeField f;
  f.grid = eval_grid;
  f.times = t_values;
  f.source_op = "heat_potential";
  f.values.resize(t_values.size());
  for (std::size_t k = 0; k < t_values.size(); ++k) {
    auto& slice = f.values[k];
    slice.resize(eval_grid.node_count());
    for (std::size_t i = 0; i < eval_grid.node_count(); ++i)
      slice[i] = heat_potential_at(src, eval_grid.node(i), t_values[k], N);
  }
  return f;
}

std::vector<double> convolve_heat(const GridFn& src, const Grid& eval, double t) {
  require(t > 0, errc::invalid_argument, "convolve_heat requires t > 0");
  const Grid& g = src.grid;
  int N = g.dim();
  require(eval.dim() == N, errc::invalid_argument, "convolve_heat: dimension mismatch");
  double h = g.spacing();
  double norm1 = h / std::sqrt(4.0 * kPi * t);

  // Axis kernels: K_a[e][s] = norm1 * exp(-(x_e - y_s)^2 / 4t).
  std::array<std::vector<double>, model::kMaxDim> ker;
  std::array<int, model::kMaxDim> ne{1, 1, 1}, ns{1, 1, 1};
  for (int a = 0; a < N; ++a) {
    std::size_t k = static_cast<std::size_t>(a);
    ne[k] = eval.nodes_along(a);
    ns[k] = g.nodes_along(a);
    ker[k].resize(static_cast<std::size_t>(ne[k]) * static_cast<std::size_t>(ns[k]));
    for (int e = 0; e < ne[k]; ++e)
      for (int s = 0; s < ns[k]; ++s) {
        double d = eval.coordinate(a, e) - g.coordinate(a, s);
        ker[k][static_cast<std::size_t>(e) * static_cast<std::size_t>(ns[k]) +
               static_cast<std::size_t>(s)] = norm1 * std::exp(-d * d / (4.0 * t));
      }
  }

  // Contract one axis at a time; the layout is row-major with axis 0 slowest.
  std::vector<double> cur = src.values;
  std::array<int, model::kMaxDim> shape{ns[0], ns[1], ns[2]};
  for (int a = N - 1; a >= 0; --a) {
    std::size_t ka = static_cast<std::size_t>(a);
    std::size_t inner = 1;
    for (int b2 = a + 1; b2 < N; ++b2) inner *= static_cast<std::size_t>(shape[static_cast<std::size_t>(b2)]);
    std::size_t outer = 1;
    for (int b2 = 0; b2 < a; ++b2) outer *= static_cast<std::size_t>(shape[static_cast<std::size_t>(b2)]);
    std::size_t src_len = static_cast<std::size_t>(shape[ka]);
    std::size_t dst_len = static_cast<std::size_t>(ne[ka]);
    std::vector<double> next(outer * dst_len * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t e = 0; e < dst_len; ++e) {
        const double* krow = &ker[ka][e * src_len];
        double* dst = &next[(o * dst_len + e) * inner];
        for (std::size_t s = 0; s < src_len; ++s) {
          double w = krow[s];
          if (w == 0.0) continue;
          const double* sp = &cur[(o * src_len + s) * inner];
          for (std::size_t in = 0; in < inner; ++in) dst[in] += w * sp[in];
        }
      }
    cur = std::move(next);
    shape[ka] = static_cast<int>(dst_len);
  }
  return cur;
}

DominationReport gaussian_domination_check(const GridFn& eta, double M, double a, double b,
                                           const std::vector<double>& t_values) {
  require(M > 0 && a > 0 && b >= 0, errc::invalid_argument, "need M, a > 0 and b >= 0");
  const Grid& g = eta.grid;
  int N = g.dim();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double r = model::norm(g.node(i), N);
    double cap = M * std::exp(-a * std::pow(std::max(0.0, r - b), 2));
    require(eta.values[i] >= -1e-12 && eta.values[i] <= cap * (1.0 + 1e-9) + 1e-300,
            errc::hypothesis_violated, "eta exceeds the Gaussian envelope");
  }
  Source src = Source::from_density(eta);
  DominationReport rep;
  for (double t : t_values) {
    require(t > 0, errc::invalid_argument, "domination check requires t > 0");
    double scale = std::pow(4.0 * a * t + 1.0, 0.5 * N);
    double scale_rel = std::pow(2.0 * a * t + 1.0, 0.5 * N) * std::exp(-a * b * b);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      Vec x = g.node(i);
      double value = heat_potential_at(src, x, t, N);
      double r = model::norm(x, N);
      double pos = std::max(0.0, r - b);
      double ratio = value * scale * std::exp(a * pos * pos / (4.0 * a * t + 1.0)) / M;
      double relaxed =
          value * scale_rel * std::exp(0.5 * a * r * r / (2.0 * a * t + 1.0)) / M;
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_x = x;
        rep.worst_t = t;
      }
      rep.worst_ratio_relaxed = std::max(rep.worst_ratio_relaxed, relaxed);
    }
  }
  return rep;
}

namespace {

// One integration pass of G[f](t_k) at a single target node; s runs over the
// field's own times below t_k, with a rectangle for the leading [0, s_0] gap.
double green_quadrature(const SpaceTimeField& f, int N, const Vec& x, std::size_t k) {
  const auto& ts = f.times;
  auto slice_source = [&](std::size_t j) {
    GridFn fn;
    fn.grid = f.grid;
    fn.values = f.values[j];
    return Source::from_density(std::move(fn));
  };
  double t = ts[k];
  auto integrand = [&](std::size_t j) -> double {
    if (j == k) {
      // H[f(t)](0) = f(t); the target grid is the field grid, so interpolate
      // by nearest node.
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (std::size_t i = 0; i < f.grid.node_count(); ++i) {
        double d = model::dist(f.grid.node(i), x, N);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return f.values[k][best];
    }
    return heat_potential_at(slice_source(j), x, t - ts[j], N);
  };
  double acc = ts[0] * integrand(0);  // rectangle over [0, s_0]
  double prev = integrand(0);
  for (std::size_t j = 1; j <= k; ++j) {
    double cur = integrand(j);
    acc += 0.5 * (prev + cur) * (ts[j] - ts[j - 1]);
    prev = cur;
  }
  return acc;
}

}  // namespace

SpaceTimeField green_potential(const SpaceTimeField& f, int N) {
  require(f.times.size() >= 4, errc::invalid_argument,
          "green_potential needs at least 4 time nodes");
  SpaceTimeField out;
  out.grid = f.grid;
  out.times = f.times;
  out.source_op = "green_potential";
  out.values.assign(f.times.size(), std::vector<double>(f.grid.node_count(), 0.0));

  // Precompute per (target time, source time) convolution slices.
  for (std::size_t k = 0; k < f.times.size(); ++k) {
    auto& slice = out.values[k];
    double t = f.times[k];
    std::vector<double> prev(f.grid.node_count()), cur(f.grid.node_count());
    auto eval_layer = [&](std::size_t j, std::vector<double>& dst) {
      if (j == k) {
        dst = f.values[k];
        return;
      }
      GridFn fn;
      fn.grid = f.grid;
      fn.values = f.values[j];
      dst = convolve_heat(fn, f.grid, t - f.times[j]);
      (void)N;
    };
    eval_layer(0, prev);
    for (std::size_t i = 0; i < slice.size(); ++i) slice[i] = f.times[0] * prev[i];
    for (std::size_t j = 1; j <= k; ++j) {
      eval_layer(j, cur);
      double dt = f.times[j] - f.times[j - 1];
      for (std::size_t i = 0; i < slice.size(); ++i)
        slice[i] += 0.5 * dt * (prev[i] + cur[i]);
      std::swap(prev, cur);
    }
  }
  return out;
}

double green_potential_at(const SpaceTimeField& f, int N, const Vec& x, double t) {
  require(f.times.size() >= 4, errc::invalid_argument,
          "green_potential needs at least 4 time nodes");
  std::size_t k = 0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t j = 0; j < f.times.size(); ++j) {
    double d = std::abs(f.times[j] - t);
    if (d < best) {
      best = d;
      k = j;
    }
  }
  return green_quadrature(f, N, x, k);
}

RFunctionalReport r_functional(const GridFn& eta, const ExponentContext& ctx, double t_horizon) {
  require(t_horizon > 0, errc::invalid_argument, "r_functional requires a positive horizon");
  const Grid& g = eta.grid;
  int N = g.dim();
  for (double v : eta.values)
    require(v >= -1e-12 && v <= 1.0 + 1e-12, errc::invalid_argument,
            "r_functional requires 0 <= eta <= 1");

  double qp = ctx.q_prime;
  double h = g.spacing();

  // Evaluation grid inflated so Gaussian tails are negligible at the horizon.
  double margin = std::ceil(6.0 * std::sqrt(t_horizon) / h) * h;
  Vec lo = g.lo(), hi = g.hi();
  for (int a = 0; a < N; ++a) {
    std::size_t k = static_cast<std::size_t>(a);
    lo[k] -= margin;
    hi[k] += margin;
  }
  Grid eval(lo, hi, h, N);

  auto spatial_integral = [&](double t) -> double {
    // H[eta] on the eval grid, then R = |grad|^2 + |Delta| by central
    // differences; time derivative via the heat equation identity.
    std::vector<double> field = convolve_heat(eta, eval, t);
    double acc = 0;
    double hN = std::pow(h, N);
    auto idx_of = [&](const std::array<int, model::kMaxDim>& idx) { return eval.flatten(idx); };
    for (std::size_t i = 0; i < eval.node_count(); ++i) {
      auto idx = eval.unflatten(i);
      bool interior = true;
      for (int a = 0; a < N; ++a) {
        std::size_t k = static_cast<std::size_t>(a);
        if (idx[k] == 0 || idx[k] == eval.nodes_along(a) - 1) interior = false;
      }
      if (!interior) continue;
      double grad2 = 0, lap = 0;
      for (int a = 0; a < N; ++a) {
        std::size_t k = static_cast<std::size_t>(a);
        auto up = idx, dn = idx;
        up[k] += 1;
        dn[k] -= 1;
        double fu = field[idx_of(up)], fd = field[idx_of(dn)], fc = field[i];
        double d1 = (fu - fd) / (2.0 * h);
        grad2 += d1 * d1;
        lap += (fu - 2.0 * fc + fd) / (h * h);
      }
      double r = grad2 + std::abs(lap);
      acc += std::pow(r, qp);
    }
    return hN * acc;
  };

  auto times = support::geomspace(0.25 * h * h, t_horizon, 28);
  RFunctionalReport rep;
  double prev = spatial_integral(times[0]);
  rep.value = times[0] * prev;  // rectangle over [0, t_0]
  for (std::size_t j = 1; j < times.size(); ++j) {
    double cur = spatial_integral(times[j]);
    rep.value += 0.5 * (prev + cur) * (times[j] - times[j - 1]);
    prev = cur;
  }
  double gamma = 0.5 * (N + 2.0) * qp - 0.5 * N;  // integrand decay exponent
  if (gamma > 1.0) rep.tail_estimate = prev * t_horizon / (gamma - 1.0);
  rep.value += rep.tail_estimate;

  // Comparator: the Besov energy of eta over its own box.
  model::DiscreteSet whole;
  whole.grid = g;
  whole.source = model::SetSpec::box(g.lo(), g.hi());
  whole.mask.assign(g.node_count(), 1);
  capacity::FractionalEnergy energy(ctx, whole);
  rep.comparator = energy.energy(eta.values);
  rep.ratio = rep.comparator > 0 ? rep.value / rep.comparator : 0.0;
  return rep;
}

WeightedLqReport weighted_lq_norm(const AtomicMeasure& mu, const ExponentContext& ctx, double T) {
  require(T > 0, errc::invalid_argument, "weighted_lq_norm requires T > 0");
  WeightedLqReport rep;
  rep.tail_exponent = -0.5 * ctx.N * (ctx.q - 1.0);
  rep.q_infty_finite = 0.5 * ctx.N * (ctx.q - 1.0) > 1.0;
  if (mu.atoms.empty()) return rep;

  int N = ctx.N;
  double q = ctx.q;
  Source src = Source::from_atoms(mu);

  Vec alo = mu.atoms.front().location, ahi = alo;
  for (const auto& a : mu.atoms)
    for (int i = 0; i < N; ++i) {
      std::size_t k = static_cast<std::size_t>(i);
      alo[k] = std::min(alo[k], a.location[k]);
      ahi[k] = std::max(ahi[k], a.location[k]);
    }

  auto lq_slice = [&](double t) -> double {
    // integral of H[mu]^q over space at time t; box scaled to the diffusion
    // length so the Gaussian tail is below rounding.
    double w = 10.0 * std::sqrt(t);
    int nodes = 161;
    double acc = 0;
    if (N == 1) {
      double lo = alo[0] - w, hi = ahi[0] + w;
      double hx = (hi - lo) / (nodes - 1);
      for (int i = 0; i < nodes; ++i) {
        Vec x = model::make_vec(lo + i * hx);
        acc += std::pow(heat_potential_at(src, x, t, N), q);
      }
      return acc * hx;
    }
    int nodes2 = 121;
    double lox = alo[0] - w, hix = ahi[0] + w;
    double loy = alo[1] - w, hiy = ahi[1] + w;
    double hx = (hix - lox) / (nodes2 - 1), hy = (hiy - loy) / (nodes2 - 1);
    for (int i = 0; i < nodes2; ++i)
      for (int j = 0; j < nodes2; ++j) {
        Vec x = model::make_vec(lox + i * hx, loy + j * hy);
        acc += std::pow(heat_potential_at(src, x, t, N), q);
      }
    return acc * hx * hy;
  };

  double t_min = 1e-3 * std::min(1.0, T);
  auto times = support::geomspace(t_min, T, 160);
  double lq_pow = 0, weighted_pow = 0;
  double prev_l = lq_slice(times[0]);
  double prev_w = prev_l * std::exp(-q * times[0]);
  for (std::size_t j = 1; j < times.size(); ++j) {
    double cur_l = lq_slice(times[j]);
    double cur_w = cur_l * std::exp(-q * times[j]);
    double dt = times[j] - times[j - 1];
    lq_pow += 0.5 * dt * (prev_l + cur_l);
    weighted_pow += 0.5 * dt * (prev_w + cur_w);
    prev_l = cur_l;
    prev_w = cur_w;
  }
  // Extend the weighted norm beyond T: the decay t^{tail} e^{-qt} makes the
  // remainder geometric; continue until negligible.
  double t = T;
  double last = prev_w;
  while (last > 1e-14 * weighted_pow && t < T + 60.0 / q) {
    double t2 = t * 1.2;
    double cur = lq_slice(t2) * std::exp(-q * t2);
    weighted_pow += 0.5 * (t2 - t) * (last + cur);
    t = t2;
    last = cur;
  }
  rep.lq_norm = std::pow(lq_pow, 1.0 / q);
  rep.weighted_norm = std::pow(weighted_pow, 1.0 / q);
  if (rep.q_infty_finite) {
    // Analytic tail of the unweighted norm beyond T via the decay exponent.
    double gamma = 0.5 * ctx.N * (ctx.q - 1.0);
    double tail = prev_l * T / (gamma - 1.0);
    rep.q_infty_norm = std::pow(lq_pow + tail, 1.0 / q);
  }
  return rep;
}

}  // namespace parcap::heat
