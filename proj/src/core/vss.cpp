#include "core/vss.hpp"

#include <algorithm>
#include <cmath>

#include "core/support.hpp"

namespace parcap::vss {

namespace {

struct Rhs {
  double q, N;
  // state (f, g = f'); returns (f', g')
  void operator()(double y, double f, double g, double& df, double& dg) const {
    df = g;
    double fq = f > 0 ? std::pow(f, q) : -std::pow(-f, q);
    double curv = (N > 1 && y > 0) ? (N - 1) * g / y : 0.0;
    dg = -curv - 0.5 * y * g - f / (q - 1.0) + fq;
  }
};

struct Shot {
  enum class Outcome { overshoot, undershoot };
  Outcome outcome = Outcome::undershoot;
  std::vector<double> y, f, fp;
};

// Adaptive RK45 (Cash-Karp) integration of the profile equation from y0 with
// dense sample output. Stops early on a sign change (overshoot).
Shot integrate(const Rhs& rhs, double f0, double y_max, double sample_step) {
  static const double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
  static const double b21 = 1.0 / 5;
  static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
  static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
  static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
  static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                      b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
  static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
  static const double d1 = 2825.0 / 27648, d3 = 18575.0 / 48384, d4 = 13525.0 / 55296,
                      d5 = 277.0 / 14336, d6 = 1.0 / 4;

  Shot shot;
  double y = 0.0, f = f0, g = 0.0;
  if (rhs.N > 1) {
    // Series start around the regular singular point:
    // f(y) = f0 + f''(0) y^2/2 with N f''(0) = f0^q - f0/(q-1).
    double f2 = (std::pow(f0, rhs.q) - f0 / (rhs.q - 1.0)) / rhs.N;
    y = 1e-3;
    f = f0 + 0.5 * f2 * y * y;
    g = f2 * y;
    shot.y.push_back(0.0);
    shot.f.push_back(f0);
    shot.fp.push_back(0.0);
  }
  shot.y.push_back(y);
  shot.f.push_back(f);
  shot.fp.push_back(g);

  const double rtol = 1e-11, atol = 1e-18;
  double h = 1e-4;
  double next_sample = y + sample_step;
  while (y < y_max) {
    h = std::min(h, y_max - y);
    h = std::min(h, next_sample - y + 1e-15);
    double k1f, k1g, k2f, k2g, k3f, k3g, k4f, k4g, k5f, k5g, k6f, k6g;
    rhs(y, f, g, k1f, k1g);
    rhs(y + a2 * h, f + h * b21 * k1f, g + h * b21 * k1g, k2f, k2g);
    rhs(y + a3 * h, f + h * (b31 * k1f + b32 * k2f), g + h * (b31 * k1g + b32 * k2g), k3f, k3g);
    rhs(y + a4 * h, f + h * (b41 * k1f + b42 * k2f + b43 * k3f),
        g + h * (b41 * k1g + b42 * k2g + b43 * k3g), k4f, k4g);
    rhs(y + a5 * h, f + h * (b51 * k1f + b52 * k2f + b53 * k3f + b54 * k4f),
        g + h * (b51 * k1g + b52 * k2g + b53 * k3g + b54 * k4g), k5f, k5g);
    rhs(y + a6 * h, f + h * (b61 * k1f + b62 * k2f + b63 * k3f + b64 * k4f + b65 * k5f),
        g + h * (b61 * k1g + b62 * k2g + b63 * k3g + b64 * k4g + b65 * k5g), k6f, k6g);
    double f5 = f + h * (c1 * k1f + c3 * k3f + c4 * k4f + c6 * k6f);
    double g5 = g + h * (c1 * k1g + c3 * k3g + c4 * k4g + c6 * k6g);
    double f4 = f + h * (d1 * k1f + d3 * k3f + d4 * k4f + d5 * k5f + d6 * k6f);
    double g4 = g + h * (d1 * k1g + d3 * k3g + d4 * k4g + d5 * k5g + d6 * k6g);
    double scale_f = atol + rtol * std::max(std::abs(f), std::abs(f5));
    double scale_g = atol + rtol * std::max(std::abs(g), std::abs(g5));
    double err = std::max(std::abs(f5 - f4) / scale_f, std::abs(g5 - g4) / scale_g);
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
      continue;
    }
    y += h;
    f = f5;
    g = g5;
    if (err > 1e-30) h *= std::min(5.0, 0.9 * std::pow(err, -0.2));
    if (f <= 0.0) {
      shot.outcome = Shot::Outcome::overshoot;
      shot.y.push_back(y);
      shot.f.push_back(f);
      shot.fp.push_back(g);
      return shot;
    }
    if (y >= next_sample - 1e-12) {
      shot.y.push_back(y);
      shot.f.push_back(f);
      shot.fp.push_back(g);
      next_sample += sample_step;
    }
  }
  // A shot that stayed positive is an undershoot: the slow algebraic branch
  // takes over and y^{2/(q-1)} f turns increasing over the last decade, while
  // overshoots were already caught by the sign change above.
  shot.outcome = Shot::Outcome::undershoot;
  return shot;
}

ProfileSolution shoot(int N, double q, double y_max, double tol) {
  require(profile_exists(N, q), errc::domain_error,
          "fast-decay profile requires 1 < q < 1 + 2/N");
  require(y_max >= 10.0, errc::invalid_argument, "y_max must be at least 10");
  Rhs rhs{q, static_cast<double>(N)};
  double cap = std::pow(q - 1.0, -1.0 / (q - 1.0));
  double lo = 1e-6, hi = 10.0 * cap;

  auto classify = [&](double f0) {
    return integrate(rhs, f0, y_max, 0.05).outcome;
  };
  require(classify(lo) == Shot::Outcome::undershoot, errc::domain_error,
          "lower bracket endpoint fails to undershoot");
  require(classify(hi) == Shot::Outcome::overshoot, errc::domain_error,
          "upper bracket endpoint fails to overshoot");

  int steps = 0;
  while (hi - lo > tol * std::max(1.0, lo) && steps < 200) {
    double mid = 0.5 * (lo + hi);
    if (classify(mid) == Shot::Outcome::overshoot)
      hi = mid;
    else
      lo = mid;
    ++steps;
  }

  ProfileSolution prof;
  prof.q = q;
  prof.N = N;
  prof.f0 = lo;  // the undershoot side stays positive on [0, y_max]
  prof.bracket_width = hi - lo;
  prof.bisection_steps = steps;
  auto shot = integrate(rhs, lo, y_max, 0.01);
  prof.y = std::move(shot.y);
  prof.f = std::move(shot.f);
  prof.fp = std::move(shot.fp);

  // Tail diagnostics on a window clear of both the core and the horizon.
  double k_expect = (3.0 - q) / (q - 1.0);
  std::vector<double> xs, ys;
  double drift_min = 1e300, drift_max = -1e300;
  for (std::size_t i = 0; i < prof.y.size(); ++i) {
    double yy = prof.y[i];
    if (yy < 6.0 || yy > std::min(10.0, y_max)) continue;
    if (prof.f[i] <= 0) continue;
    double logf = std::log(prof.f[i]);
    xs.push_back(std::log(yy));
    ys.push_back(logf + 0.25 * yy * yy);
    double drift = logf + 0.25 * yy * yy - k_expect * std::log(yy);
    drift_min = std::min(drift_min, drift);
    drift_max = std::max(drift_max, drift);
  }
  if (xs.size() >= 2) {
    prof.tail_prefactor_exponent = support::fit_slope(xs, ys);
    prof.gaussian_rate_residual = drift_max - drift_min;
  }
  return prof;
}

}  // namespace

bool profile_exists(int N, double q) { return q > 1.0 && q < 1.0 + 2.0 / N; }

ProfileSolution vss_profile(const ExponentContext& ctx, double y_max, double tol) {
  return shoot(ctx.N, ctx.q, y_max, tol);
}

ProfileSolution flat_profile(double q, double y_max, double tol) {
  return shoot(1, q, y_max, tol);
}

double ProfileSolution::value(double yy) const {
  double ay = std::abs(yy);
  if (ay >= y.back()) return f.back();
  auto it = std::upper_bound(y.begin(), y.end(), ay);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - y.begin())) - 1;
  if (i + 1 >= y.size()) i = y.size() - 2;
  double h = y[i + 1] - y[i];
  double s = (ay - y[i]) / h;
  // Quintic Hermite from (f, f', f'') at both ends; f'' via the equation.
  auto dd = [&](std::size_t k) {
    double df, dg;
    Rhs rhs{q, static_cast<double>(N)};
    rhs(y[k], f[k], fp[k], df, dg);
    return dg;
  };
  double f0v = f[i], f1v = f[i + 1];
  double d0 = fp[i] * h, d1 = fp[i + 1] * h;
  double c0 = dd(i) * h * h, c1 = dd(i + 1) * h * h;
  // Quintic Hermite basis
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  double H3 = 0.5 * s3 - s4 + 0.5 * s5;
  double H4 = -4 * s3 + 7 * s4 - 3 * s5;
  double H5 = 10 * s3 - 15 * s4 + 6 * s5;
  return f0v * H0 + d0 * H1 + c0 * H2 + c1 * H3 + d1 * H4 + f1v * H5;
}

double ProfileSolution::derivative(double yy) const {
  double ay = std::abs(yy);
  if (ay >= y.back()) return fp.back();
  auto it = std::upper_bound(y.begin(), y.end(), ay);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - y.begin())) - 1;
  if (i + 1 >= y.size()) i = y.size() - 2;
  double h = y[i + 1] - y[i];
  double s = (ay - y[i]) / h;
  double v = fp[i] * (1 - s) + fp[i + 1] * s;
  return yy >= 0 ? v : -v;
}

double ProfileSolution::second_derivative(double yy) const {
  Rhs rhs{q, static_cast<double>(N)};
  double df, dg;
  rhs(std::abs(yy), value(yy), derivative(std::abs(yy)), df, dg);
  return dg;
}

double insertion_residual(const ProfileSolution& prof, int N) {
  double q = prof.q;
  // u(x, t) = t^{-1/(q-1)} f(|x| / sqrt t); residual of u_t - Lap u + u^q
  // across a space-time sample, derivatives by central differences of u only.
  auto u = [&](double x, double t) {
    return std::pow(t, -1.0 / (q - 1.0)) * prof.value(x / std::sqrt(t));
  };
  double dx = 0.02, dt = 0.005;
  double acc = 0;
  int count = 0;
  for (double t = 0.5; t <= 1.0; t += 0.1) {
    for (double x = (N > 1 ? 0.1 : 0.0); x <= 3.0; x += 0.1) {
      double ut = (u(x, t + dt) - u(x, t - dt)) / (2 * dt);
      double uxx = (-u(x + 2 * dx, t) + 16 * u(x + dx, t) - 30 * u(x, t) + 16 * u(x - dx, t) -
                    u(x - 2 * dx, t)) /
                   (12 * dx * dx);
      double lap = uxx;
      if (N > 1 && x > 0) {
        double ux = (u(x + dx, t) - u(x - dx, t)) / (2 * dx);
        lap += (N - 1) * ux / x;
      }
      double r = ut - lap + std::pow(u(x, t), q);
      acc += r * r;
      ++count;
    }
  }
  return std::sqrt(acc / count);
}

}  // namespace parcap::vss
