#pragma once

#include <vector>

#include "core/model.hpp"

namespace parcap::capacity {

using model::DiscreteSet;
using model::ExponentContext;
using model::Grid;
using model::Vec;

struct SolveOptions {
  double rel_tol = 1e-9;    // relative objective change at convergence
  int max_iterations = 50000;
};

// Discretization of the Aronszajn-Slobodeckij energy on a domain raster.
// Pairs with both endpoints off the domain never contribute (the admissible
// class extends by zero), so interactions reduce to domain pairs plus a
// per-node confinement weight against the grid nodes outside the domain.
// When the context sits at s = 1, p = 2 the energy is the Dirichlet integral
// on grid edges instead.
class FractionalEnergy {
public:
  FractionalEnergy(const ExponentContext& ctx, const DiscreteSet& omega);

  double p() const { return p_; }
  bool gradient_mode() const { return gradient_mode_; }
  const DiscreteSet& omega() const { return omega_; }
  const std::vector<std::size_t>& domain_nodes() const { return nodes_; }

  // phi is given on the domain node list (extension by zero elsewhere).
  double energy(const std::vector<double>& phi) const;
  void gradient(const std::vector<double>& phi, std::vector<double>& grad) const;

private:
  ExponentContext ctx_;
  DiscreteSet omega_;
  bool gradient_mode_ = false;
  double p_ = 2;
  double sp_ = 0;
  std::vector<std::size_t> nodes_;            // flat grid index per domain node
  std::vector<model::Vec> coords_;
  std::vector<double> confinement_;           // sum of kernel weights to off-domain nodes
  double pair_weight_scale_ = 0;              // h^{2N}
  // fractional mode: kernel values tabulated by integer lattice offset
  std::vector<std::array<int, model::kMaxDim>> lattice_;
  std::array<int, model::kMaxDim> table_shape_{1, 1, 1};
  std::vector<double> kernel_table_;
  std::size_t table_at(int dx, int dy, int dz) const;
  // gradient mode: edge list (a, b) into the domain node array, plus per-node
  // count of edges leaving the domain (those see phi = 0).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
  std::vector<double> boundary_degree_;
  double edge_weight_ = 0;                    // h^{N-2}
};

// Free grid function evaluated against an energy (zero off the domain).
double as_energy(const std::vector<double>& phi_domain, const FractionalEnergy& energy);

struct CapacityResult {
  double value = 0;
  std::vector<double> minimizer;   // on the energy's domain node list
  std::vector<std::size_t> nodes;  // flat grid indices for the minimizer entries
  std::vector<double> measure;     // nonnegative, supported on the constraint set
  std::vector<std::size_t> measure_nodes;
  double measure_mass = 0;
  int iterations = 0;
  double final_step_norm = 0;
  bool converged = false;
  bool energy_monotone = true;
};

// Relative Besov capacity R^Omega_{s,p}(K): minimize the seminorm over
// {0 <= phi <= 1, phi = 1 on K, phi = 0 off Omega}.
CapacityResult besov_capacity(const DiscreteSet& K, const DiscreteSet& omega,
                              const ExponentContext& ctx, const SolveOptions& opts = {});

// Whole-space Bessel surrogate: the full norm (L^p + seminorm) minimized over
// the box with no exterior confinement. Stands in wherever the source text
// writes C_{2/q,q'}.
CapacityResult bessel_capacity_result(const DiscreteSet& K, const ExponentContext& ctx,
                                      const Grid& box, const SolveOptions& opts = {});
double bessel_capacity(const DiscreteSet& K, const ExponentContext& ctx, const Grid& box,
                       const SolveOptions& opts = {});

// R^Omega(K) / (tau^{N-sp} R^{Omega/tau}(K/tau)) at matched resolution.
struct ScalingCheck {
  double ratio = 0;
  double value = 0;
  double value_scaled = 0;
};

ScalingCheck capacity_scaling_check(const model::SetSpec& K, const model::SetSpec& omega,
                                    const model::Grid& grid, const ExponentContext& ctx,
                                    double tau, const SolveOptions& opts = {});

// Euler-Lagrange measure of a converged solve (mass equals the value).
struct CapacitaryMeasure {
  std::vector<std::size_t> nodes;
  std::vector<double> weights;
  double mass = 0;
};

CapacitaryMeasure capacitary_measure(const CapacityResult& result, const DiscreteSet& K,
                                     const FractionalEnergy& energy);

struct QuasiAdditivityReport {
  double ratio = 0;          // sum of piece capacities over the whole capacity
  double whole = 0;
  std::vector<double> pieces;
  double theta = 0;
};

// Pieces are balls covering G; the dilated balls of radius rho_j^theta with
// theta = 1 - 2/(N(q-1)) must be pairwise disjoint.
QuasiAdditivityReport quasi_additivity_check(const model::SetSpec& G,
                                             const std::vector<std::pair<Vec, double>>& balls,
                                             const ExponentContext& ctx, double h,
                                             double box_margin = 1.5,
                                             const SolveOptions& opts = {});

double lp_norm_p(const std::vector<double>& phi_domain, const FractionalEnergy& energy);

}  // namespace parcap::capacity
