#pragma once

#include <vector>

#include "core/model.hpp"

namespace parcap::vss {

using model::ExponentContext;

// Radial self-similar profile: f'' + (N-1) f'/y + y f'/2 + f/(q-1) - f^q = 0
// with f'(0) = 0 and the fast-decay condition y^{2/(q-1)} f -> 0.
struct ProfileSolution {
  double q = 0;
  int N = 1;
  double f0 = 0;                  // shooting value at the origin
  double bracket_width = 0;       // final bisection bracket width on f(0)
  std::vector<double> y;          // radial samples
  std::vector<double> f;
  std::vector<double> fp;
  double tail_prefactor_exponent = 0;  // fitted exponent of y in the tail
  double gaussian_rate_residual = 0;   // drift of log f + y^2/4 - k log y
  int bisection_steps = 0;

  double value(double yy) const;       // quintic Hermite interpolation
  double derivative(double yy) const;
  double second_derivative(double yy) const;  // from the profile equation
};

// The existence window for the fast-decay profile: 1 < q < 1 + 2/N.
bool profile_exists(int N, double q);

ProfileSolution vss_profile(const ExponentContext& ctx, double y_max = 12.0,
                            double tol = 1e-12);

// The one-dimensional barrier profile of the flat-trace estimate.
ProfileSolution flat_profile(double q, double y_max = 12.0, double tol = 1e-12);

// L2 norm of the PDE residual of u(x,t) = t^{-1/(q-1)} f(|x|/sqrt t), with all
// derivatives taken by finite differences of interpolated values only.
double insertion_residual(const ProfileSolution& prof, int N);

}  // namespace parcap::vss
