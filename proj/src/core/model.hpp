#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/support.hpp"

namespace parcap::model {

constexpr int kMaxDim = 3;

// Point in R^N, N <= 3; coordinates beyond N are zero.
using Vec = std::array<double, kMaxDim>;

inline Vec make_vec(double x = 0, double y = 0, double z = 0) { return {x, y, z}; }

double dist(const Vec& a, const Vec& b, int n);
double norm(const Vec& a, int n);

// Absorption exponent q > 1 together with every derived exponent used by the
// capacity and potential machinery.
struct ExponentContext {
  int N = 0;
  double q = 0;
  double q_prime = 0;     // q / (q - 1)
  double s = 0;           // 2 / q, the fractional order
  double q_c = 0;         // 1 + N/2
  bool supercritical = false;

  // Energy degenerates to the Dirichlet integral exactly when s = 1, p = 2.
  bool gradient_mode() const { return q == 2.0; }
  double sp() const { return s * q_prime; }  // equals 2/(q-1)
};

ExponentContext make_context(int N, double q);

// Closed subsets of R^N given by a small constructive grammar. Membership is
// closed-set consistent: boundary points are members.
class SetSpec {
public:
  enum class Kind { empty, ball, box, annulus, cantor, points, set_union, intersection };

  static SetSpec empty_set();
  static SetSpec ball(const Vec& center, double radius);
  static SetSpec box(const Vec& lo, const Vec& hi);
  static SetSpec annulus(const Vec& center, double r_in, double r_out);
  static SetSpec cantor(int iterations, double ratio, const Vec& lo, const Vec& hi);
  static SetSpec points(std::vector<Vec> pts);
  static SetSpec unite(std::vector<SetSpec> parts);
  static SetSpec intersect(SetSpec a, SetSpec b);

  Kind kind() const { return kind_; }
  bool is_empty_spec() const { return kind_ == Kind::empty; }

  // True when the closed axis-aligned cell [lo, hi] meets the set.
  bool intersects_cell(const Vec& lo, const Vec& hi, int n) const;

  // Affine images; used by scaling/translation covariance paths.
  SetSpec scaled(double factor) const;
  SetSpec translated(const Vec& shift, int n) const;

  // Largest |y - x| over the set (rasterization-free geometric bound).
  double max_distance(const Vec& x, int n) const;
  bool bounding_box(Vec& lo, Vec& hi, int n) const;  // false for empty

  // Canonical textual form, e.g. "ball:0,0:0.5" or unions joined with '+'.
  std::string to_text(int n) const;
  static SetSpec parse(const std::string& text, int n);

private:
  Kind kind_ = Kind::empty;
  Vec a_{};  // center / lo
  Vec b_{};  // hi
  double r0_ = 0, r1_ = 0;
  int iters_ = 0;
  double ratio_ = 0;
  std::vector<Vec> pts_;
  std::vector<SetSpec> parts_;

  bool cantor_cell_hits(const Vec& lo, const Vec& hi, int n) const;
};

// Uniform axis-aligned grid; node i runs over a row-major lattice.
class Grid {
public:
  Grid() = default;
  Grid(const Vec& lo, const Vec& hi, double h, int n);

  int dim() const { return n_; }
  double spacing() const { return h_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  int nodes_along(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  std::size_t node_count() const { return count_; }

  Vec node(std::size_t flat) const;
  double coordinate(int axis, int index) const;
  std::array<int, kMaxDim> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, kMaxDim>& idx) const;

  bool operator==(const Grid& other) const;

private:
  Vec lo_{}, hi_{};
  double h_ = 0;
  int n_ = 0;
  std::array<int, kMaxDim> shape_{1, 1, 1};
  std::size_t count_ = 0;
};

// Closed set sampled on a grid: mask true at nodes whose cell meets the set.
struct DiscreteSet {
  Grid grid;
  std::vector<std::uint8_t> mask;
  SetSpec source;

  std::size_t member_count() const;
  std::vector<std::size_t> member_indices() const;
  bool empty() const { return member_count() == 0; }
};

DiscreteSet rasterize(const SetSpec& set, const Grid& grid);

struct Shell {
  int n = 0;
  double d_inner = 0;  // sqrt(n t)
  double d_outer = 0;  // sqrt((n+1) t)
  std::vector<std::size_t> nodes;  // indices into the parent grid
  bool empty() const { return nodes.empty(); }
};

// Annular slicing of a discrete set about a space-time point (x, t).
struct ShellDecomposition {
  Vec center{};
  double t = 0;
  std::vector<Shell> shells;  // indexed by n = 0 .. last
  int a_t = -1;               // largest n with a nonempty shell (-1: empty set)

  // Smallest n with F contained in the closed ball of radius sqrt((n+1) t).
  int covering_index() const;
  // Smallest j with F contained in the closed ball of radius sqrt(j t).
  int enclosing_index() const;

  std::size_t sliced_node_count() const;
  double max_radius = 0;  // largest |y - x| over members
};

// Shell n holds nodes with d_n <= |x - y| < d_{n+1}; the outermost nonempty
// shell is closed on its outer boundary by construction of the index map.
ShellDecomposition annular_slices(const DiscreteSet& F, const Vec& x, double t,
                                  double series_tolerance = 1e-10);

}  // namespace parcap::model
