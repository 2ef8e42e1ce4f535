#include "core/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parcap::capacity {

namespace {

double signed_power(double u, double pm1) {
  if (u == 0.0) return 0.0;  // subgradient 0 at ties
  double a = std::pow(std::abs(u), pm1);
  return u > 0 ? a : -a;
}

}  // namespace

FractionalEnergy::FractionalEnergy(const ExponentContext& ctx, const DiscreteSet& omega)
    : ctx_(ctx), omega_(omega) {
  gradient_mode_ = ctx.gradient_mode();
  p_ = ctx.q_prime;
  sp_ = ctx.sp();
  nodes_ = omega.member_indices();
  int n = omega.grid.dim();
  double h = omega.grid.spacing();
  coords_.reserve(nodes_.size());
  for (auto i : nodes_) coords_.push_back(omega.grid.node(i));

  if (gradient_mode_) {
    edge_weight_ = std::pow(h, n - 2);
    std::vector<std::int64_t> slot(omega.grid.node_count(), -1);
    for (std::size_t k = 0; k < nodes_.size(); ++k) slot[nodes_[k]] = static_cast<std::int64_t>(k);
    boundary_degree_.assign(nodes_.size(), 0.0);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      auto idx = omega.grid.unflatten(nodes_[k]);
      for (int axis = 0; axis < n; ++axis) {
        std::size_t a = static_cast<std::size_t>(axis);
        auto nb = idx;
        nb[a] += 1;
        if (nb[a] < omega.grid.nodes_along(axis)) {
          std::int64_t j = slot[omega.grid.flatten(nb)];
          if (j >= 0)
            edges_.emplace_back(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j));
          else
            boundary_degree_[k] += 1.0;  // exit edge, phi = 0 on the other side
        } else {
          boundary_degree_[k] += 1.0;
        }
        auto pb = idx;
        pb[a] -= 1;
        if (pb[a] >= 0) {
          if (slot[omega.grid.flatten(pb)] < 0) boundary_degree_[k] += 1.0;
        } else {
          boundary_degree_[k] += 1.0;
        }
      }
    }
    return;
  }

  pair_weight_scale_ = std::pow(h, 2 * n);
  // Pair distances on a uniform lattice take few distinct values; tabulate
  // |x_i - x_j|^{-(N+sp)} by integer offset.
  lattice_.reserve(nodes_.size());
  for (auto i : nodes_) lattice_.push_back(omega.grid.unflatten(i));
  table_shape_ = {1, 1, 1};
  for (int a = 0; a < n; ++a)
    table_shape_[static_cast<std::size_t>(a)] = omega.grid.nodes_along(a);
  std::size_t table_size = static_cast<std::size_t>(table_shape_[0]) *
                           static_cast<std::size_t>(table_shape_[1]) *
                           static_cast<std::size_t>(table_shape_[2]);
  kernel_table_.assign(table_size, 0.0);
  double expo = -(n + sp_);
  for (int dz = 0; dz < table_shape_[2]; ++dz)
    for (int dy = 0; dy < table_shape_[1]; ++dy)
      for (int dx = 0; dx < table_shape_[0]; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        double r = h * std::sqrt(double(dx) * dx + double(dy) * dy + double(dz) * dz);
        kernel_table_[table_at(dx, dy, dz)] = std::pow(r, expo);
      }

  confinement_.assign(nodes_.size(), 0.0);
  std::vector<std::array<int, model::kMaxDim>> outside;
  for (std::size_t i = 0; i < omega.grid.node_count(); ++i)
    if (!omega.mask[i]) outside.push_back(omega.grid.unflatten(i));
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& a = lattice_[k];
    double acc = 0;
    for (const auto& b : outside)
      acc += kernel_table_[table_at(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]),
                                    std::abs(a[2] - b[2]))];
    confinement_[k] = pair_weight_scale_ * acc;
  }
}

std::size_t FractionalEnergy::table_at(int dx, int dy, int dz) const {
  return (static_cast<std::size_t>(dz) * static_cast<std::size_t>(table_shape_[1]) +
          static_cast<std::size_t>(dy)) *
             static_cast<std::size_t>(table_shape_[0]) +
         static_cast<std::size_t>(dx);
}

double FractionalEnergy::energy(const std::vector<double>& phi) const {
  require(phi.size() == nodes_.size(), errc::invalid_argument, "energy: phi shape mismatch");
  if (gradient_mode_) {
    double acc = 0;
    for (const auto& [a, b] : edges_) {
      double d = phi[a] - phi[b];
      acc += d * d;
    }
    for (std::size_t k = 0; k < phi.size(); ++k)
      acc += boundary_degree_[k] * phi[k] * phi[k];
    return edge_weight_ * acc;
  }
  double acc = 0;
  std::size_t m = nodes_.size();
  bool p2 = p_ == 2.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = lattice_[i];
    double pi = phi[i];
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& b = lattice_[j];
      double w = kernel_table_[table_at(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]),
                                        std::abs(a[2] - b[2]))];
      double d = pi - phi[j];
      if (d == 0.0) continue;
      acc += w * (p2 ? d * d : std::pow(std::abs(d), p_));
    }
  }
  double total = 2.0 * pair_weight_scale_ * acc;  // both orientations of each pair
  for (std::size_t i = 0; i < m; ++i)
    if (phi[i] != 0.0)
      total += 2.0 * confinement_[i] * (p2 ? phi[i] * phi[i] : std::pow(std::abs(phi[i]), p_));
  return total;
}

void FractionalEnergy::gradient(const std::vector<double>& phi, std::vector<double>& grad) const {
  require(phi.size() == nodes_.size(), errc::invalid_argument, "gradient: phi shape mismatch");
  grad.assign(phi.size(), 0.0);
  if (gradient_mode_) {
    for (const auto& [a, b] : edges_) {
      double d = phi[a] - phi[b];
      grad[a] += 2.0 * d;
      grad[b] -= 2.0 * d;
    }
    for (std::size_t k = 0; k < phi.size(); ++k)
      grad[k] += 2.0 * boundary_degree_[k] * phi[k];
    for (auto& g : grad) g *= edge_weight_;
    return;
  }
  double pm1 = p_ - 1.0;
  bool p2 = p_ == 2.0;
  std::size_t m = nodes_.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = lattice_[i];
    double pi = phi[i];
    double gi = 0;
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& b = lattice_[j];
      double w = kernel_table_[table_at(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]),
                                        std::abs(a[2] - b[2]))];
      double d = pi - phi[j];
      double g = w * (p2 ? d : signed_power(d, pm1));
      gi += g;
      grad[j] -= g;
    }
    grad[i] += gi;
  }
  double scale = 2.0 * p_ * pair_weight_scale_;
  for (std::size_t i = 0; i < m; ++i)
    grad[i] = scale * grad[i] +
              2.0 * p_ * confinement_[i] * (p2 ? phi[i] : signed_power(phi[i], pm1));
}

double as_energy(const std::vector<double>& phi_domain, const FractionalEnergy& energy) {
  return energy.energy(phi_domain);
}

double lp_norm_p(const std::vector<double>& phi, const FractionalEnergy& energy) {
  double hN = std::pow(energy.omega().grid.spacing(), energy.omega().grid.dim());
  double acc = 0;
  for (double v : phi) acc += std::pow(std::abs(v), energy.p());
  return hN * acc;
}

namespace {

struct Objective {
  const FractionalEnergy* energy;
  bool with_lp;  // adds the L^p mass term (Bessel surrogate)
  double hN;
  double p;

  double value(const std::vector<double>& phi) const {
    double v = energy->energy(phi);
    if (with_lp) {
      double acc = 0;
      for (double x : phi) acc += std::pow(std::abs(x), p);
      v += hN * acc;
    }
    return v;
  }

  void grad(const std::vector<double>& phi, std::vector<double>& g) const {
    energy->gradient(phi, g);
    if (with_lp) {
      double s = hN * p;
      for (std::size_t i = 0; i < phi.size(); ++i) g[i] += s * signed_power(phi[i], p - 1.0);
    }
  }
};

// Projected gradient with a Barzilai-Borwein step and step halving whenever a
// trial step would increase the objective. Constraint nodes carry phi = 1 and
// are excluded from the update; free nodes are clamped to [0, 1].
CapacityResult minimize(const FractionalEnergy& energy, const std::vector<std::uint8_t>& fixed_one,
                        bool with_lp, const SolveOptions& opts) {
  const auto& nodes = energy.domain_nodes();
  std::size_t m = nodes.size();
  CapacityResult res;
  res.nodes = nodes;
  res.minimizer.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (fixed_one[i]) res.minimizer[i] = 1.0;

  Objective obj{&energy, with_lp,
                std::pow(energy.omega().grid.spacing(), energy.omega().grid.dim()), energy.p()};

  bool any_free = false;
  for (std::size_t i = 0; i < m; ++i)
    if (!fixed_one[i]) any_free = true;

  double e = obj.value(res.minimizer);
  if (!any_free || m == 0) {
    res.value = e;
    res.converged = true;
    return res;
  }

  std::vector<double> phi = res.minimizer;
  std::vector<double> g(m), g_prev(m), phi_prev(m), trial(m);
  obj.grad(phi, g);

  double step;
  {
    double gnorm2 = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (!fixed_one[i]) gnorm2 += g[i] * g[i];
    step = gnorm2 > 0 ? 1.0 / std::sqrt(gnorm2) : 1.0;
  }

  int it = 0;
  double step_norm = 0;
  bool flat = false;
  for (; it < opts.max_iterations && !flat; ++it) {
    bool decreased = false;
    double e_trial = e;
    double alpha = step;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t i = 0; i < m; ++i)
        trial[i] = fixed_one[i] ? 1.0 : std::clamp(phi[i] - alpha * g[i], 0.0, 1.0);
      e_trial = obj.value(trial);
      if (e_trial <= e) {
        decreased = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!decreased) break;  // no descent at any step length: stalled at optimum

    phi_prev = phi;
    g_prev = g;
    phi = trial;
    double e_prev = e;
    e = e_trial;
    obj.grad(phi, g);

    double ss = 0, sy = 0;
    step_norm = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (fixed_one[i]) continue;
      double s = phi[i] - phi_prev[i];
      double y = g[i] - g_prev[i];
      ss += s * s;
      sy += s * y;
    }
    step_norm = std::sqrt(ss);
    step = (sy > 1e-300) ? ss / sy : alpha * 2.0;

    double scale = std::max({std::abs(e), std::abs(e_prev), 1e-300});
    if (std::abs(e - e_prev) <= opts.rel_tol * scale && it > 2) flat = true;
  }

  res.minimizer = phi;
  res.value = e;
  res.iterations = it;
  res.final_step_norm = step_norm;
  res.converged = flat || it < opts.max_iterations;
  return res;
}

std::vector<std::uint8_t> constraint_mask(const DiscreteSet& K, const FractionalEnergy& energy) {
  const auto& nodes = energy.domain_nodes();
  std::vector<std::uint8_t> fixed(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (K.mask[nodes[i]]) fixed[i] = 1;
  return fixed;
}

void attach_measure(CapacityResult& res, const DiscreteSet& K, const FractionalEnergy& energy,
                    bool with_lp) {
  std::vector<double> g;
  Objective obj{&energy, with_lp,
                std::pow(energy.omega().grid.spacing(), energy.omega().grid.dim()), energy.p()};
  obj.grad(res.minimizer, g);
  double invp = 1.0 / energy.p();
  res.measure.clear();
  res.measure_nodes.clear();
  res.measure_mass = 0;
  const auto& nodes = energy.domain_nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!K.mask[nodes[i]]) continue;
    double w = std::max(0.0, g[i] * invp);
    res.measure_nodes.push_back(nodes[i]);
    res.measure.push_back(w);
    res.measure_mass += w;
  }
}

}  // namespace

CapacityResult besov_capacity(const DiscreteSet& K, const DiscreteSet& omega,
                              const ExponentContext& ctx, const SolveOptions& opts) {
  require(K.grid == omega.grid, errc::invalid_argument, "besov_capacity: K and Omega grids differ");
  for (std::size_t i = 0; i < K.mask.size(); ++i)
    require(!K.mask[i] || omega.mask[i], errc::invalid_argument,
            "besov_capacity: K must be contained in Omega");
  FractionalEnergy energy(ctx, omega);
  auto fixed = constraint_mask(K, energy);
  CapacityResult res = minimize(energy, fixed, /*with_lp=*/false, opts);
  attach_measure(res, K, energy, false);
  return res;
}

CapacityResult bessel_capacity_result(const DiscreteSet& K, const ExponentContext& ctx,
                                      const Grid& box, const SolveOptions& opts) {
  require(K.grid == box, errc::invalid_argument, "bessel_capacity: K must live on the box grid");
  int n = box.dim();
  for (std::size_t i = 0; i < K.mask.size(); ++i) {
    if (!K.mask[i]) continue;
    auto idx = box.unflatten(i);
    for (int a = 0; a < n; ++a) {
      std::size_t k = static_cast<std::size_t>(a);
      require(idx[k] != 0 && idx[k] != box.nodes_along(a) - 1, errc::invalid_argument,
              "bessel_capacity: K touches the box boundary");
    }
  }
  DiscreteSet whole;
  whole.grid = box;
  whole.source = model::SetSpec::box(box.lo(), box.hi());
  whole.mask.assign(box.node_count(), 1);
  FractionalEnergy energy(ctx, whole);
  auto fixed = constraint_mask(K, energy);
  CapacityResult res = minimize(energy, fixed, /*with_lp=*/true, opts);
  attach_measure(res, K, energy, true);
  return res;
}

double bessel_capacity(const DiscreteSet& K, const ExponentContext& ctx, const Grid& box,
                       const SolveOptions& opts) {
  if (K.empty()) return 0.0;
  return bessel_capacity_result(K, ctx, box, opts).value;
}

ScalingCheck capacity_scaling_check(const model::SetSpec& K, const model::SetSpec& omega,
                                    const model::Grid& grid, const ExponentContext& ctx,
                                    double tau, const SolveOptions& opts) {
  require(tau > 0 && std::isfinite(tau), errc::invalid_argument, "scaling check needs tau > 0");
  ScalingCheck out;
  auto K0 = model::rasterize(K, grid);
  auto O0 = model::rasterize(omega, grid);
  out.value = besov_capacity(K0, O0, ctx, opts).value;

  double inv = 1.0 / tau;
  model::Vec lo = grid.lo(), hi = grid.hi();
  for (auto& c : lo) c *= inv;
  for (auto& c : hi) c *= inv;
  model::Grid scaled_grid(lo, hi, grid.spacing() * inv, grid.dim());
  auto K1 = model::rasterize(K.scaled(inv), scaled_grid);
  auto O1 = model::rasterize(omega.scaled(inv), scaled_grid);
  out.value_scaled = besov_capacity(K1, O1, ctx, opts).value;

  double denom = std::pow(tau, ctx.N - ctx.sp()) * out.value_scaled;
  out.ratio = denom != 0 ? out.value / denom
                         : (out.value == 0 ? 1.0 : std::numeric_limits<double>::infinity());
  return out;
}

CapacitaryMeasure capacitary_measure(const CapacityResult& result, const DiscreteSet& K,
                                     const FractionalEnergy& energy) {
  require(result.converged, errc::not_converged,
          "capacitary_measure requires a converged minimizer");
  (void)K;
  (void)energy;
  CapacitaryMeasure m;
  m.nodes = result.measure_nodes;
  m.weights = result.measure;
  m.mass = result.measure_mass;
  return m;
}

QuasiAdditivityReport quasi_additivity_check(const model::SetSpec& G,
                                             const std::vector<std::pair<Vec, double>>& balls,
                                             const ExponentContext& ctx, double h,
                                             double box_margin, const SolveOptions& opts) {
  require(!balls.empty(), errc::invalid_argument, "quasi_additivity_check needs covering balls");
  QuasiAdditivityReport rep;
  rep.theta = 1.0 - 2.0 / (ctx.N * (ctx.q - 1.0));
  int n = ctx.N;

  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      double ri = std::pow(balls[i].second, rep.theta);
      double rj = std::pow(balls[j].second, rep.theta);
      double d = model::dist(balls[i].first, balls[j].first, n);
      require(d > ri + rj, errc::separation_violated,
              "quasi_additivity_check: dilated balls overlap");
    }

  auto boxed_capacity = [&](const model::SetSpec& set) -> double {
    Vec lo{}, hi{};
    if (!set.bounding_box(lo, hi, n)) return 0.0;
    for (int a = 0; a < n; ++a) {
      std::size_t k = static_cast<std::size_t>(a);
      lo[k] = std::floor((lo[k] - box_margin) / h) * h;
      hi[k] = std::ceil((hi[k] + box_margin) / h) * h;
    }
    model::Grid box(lo, hi, h, n);
    auto raster = model::rasterize(set, box);
    if (raster.empty()) return 0.0;
    return bessel_capacity(raster, ctx, box, opts);
  };

  rep.whole = boxed_capacity(G);
  require(rep.whole > 0, errc::invalid_argument, "quasi_additivity_check: G has zero capacity");
  double sum = 0;
  for (const auto& [center, radius] : balls) {
    auto piece = model::SetSpec::intersect(G, model::SetSpec::ball(center, radius));
    double c = boxed_capacity(piece);
    rep.pieces.push_back(c);
    sum += c;
  }
  rep.ratio = sum / rep.whole;
  return rep;
}

}  // namespace parcap::capacity
