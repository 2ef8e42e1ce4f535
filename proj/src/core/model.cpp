#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace parcap::model {

double dist(const Vec& a, const Vec& b, int n) {
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += (a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]) *
                                     (a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]);
  return std::sqrt(acc);
}

double norm(const Vec& a, int n) {
  Vec zero{};
  return dist(a, zero, n);
}

ExponentContext make_context(int N, double q) {
  require(N >= 1 && N <= kMaxDim, errc::invalid_argument, "N must be in [1, 3]");
  require(std::isfinite(q) && q > 1.0, errc::invalid_argument, "q must be finite and > 1");
  ExponentContext ctx;
  ctx.N = N;
  ctx.q = q;
  ctx.q_prime = q / (q - 1.0);
  ctx.s = 2.0 / q;
  ctx.q_c = 1.0 + N / 2.0;
  ctx.supercritical = q >= ctx.q_c;
  return ctx;
}

// ---------------------------------------------------------------------------
// SetSpec

SetSpec SetSpec::empty_set() { return SetSpec{}; }

SetSpec SetSpec::ball(const Vec& center, double radius) {
  require(radius >= 0, errc::invalid_argument, "ball radius must be >= 0");
  SetSpec s;
  s.kind_ = Kind::ball;
  s.a_ = center;
  s.r0_ = radius;
  return s;
}

SetSpec SetSpec::box(const Vec& lo, const Vec& hi) {
  SetSpec s;
  s.kind_ = Kind::box;
  s.a_ = lo;
  s.b_ = hi;
  for (int i = 0; i < kMaxDim; ++i)
    require(lo[static_cast<std::size_t>(i)] <= hi[static_cast<std::size_t>(i)],
            errc::invalid_argument, "box needs lo <= hi");
  return s;
}

SetSpec SetSpec::annulus(const Vec& center, double r_in, double r_out) {
  require(r_in >= 0 && r_in <= r_out, errc::invalid_argument, "annulus needs 0 <= r_in <= r_out");
  SetSpec s;
  s.kind_ = Kind::annulus;
  s.a_ = center;
  s.r0_ = r_in;
  s.r1_ = r_out;
  return s;
}

SetSpec SetSpec::cantor(int iterations, double ratio, const Vec& lo, const Vec& hi) {
  require(iterations >= 0, errc::invalid_argument, "cantor iterations must be >= 0");
  require(ratio > 0 && ratio <= 0.5, errc::invalid_argument, "cantor ratio must be in (0, 1/2]");
  SetSpec s;
  s.kind_ = Kind::cantor;
  s.a_ = lo;
  s.b_ = hi;
  s.iters_ = iterations;
  s.ratio_ = ratio;
  return s;
}

SetSpec SetSpec::points(std::vector<Vec> pts) {
  SetSpec s;
  s.kind_ = pts.empty() ? Kind::empty : Kind::points;
  s.pts_ = std::move(pts);
  return s;
}

SetSpec SetSpec::unite(std::vector<SetSpec> parts) {
  std::vector<SetSpec> keep;
  for (auto& p : parts)
    if (!p.is_empty_spec()) keep.push_back(std::move(p));
  if (keep.empty()) return empty_set();
  if (keep.size() == 1) return keep.front();
  SetSpec s;
  s.kind_ = Kind::set_union;
  s.parts_ = std::move(keep);
  return s;
}

SetSpec SetSpec::intersect(SetSpec a, SetSpec b) {
  if (a.is_empty_spec() || b.is_empty_spec()) return empty_set();
  SetSpec s;
  s.kind_ = Kind::intersection;
  s.parts_.push_back(std::move(a));
  s.parts_.push_back(std::move(b));
  return s;
}

namespace {

double cell_min_dist2(const Vec& c, const Vec& lo, const Vec& hi, int n) {
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    std::size_t k = static_cast<std::size_t>(i);
    double v = std::clamp(c[k], lo[k], hi[k]) - c[k];
    acc += v * v;
  }
  return acc;
}

double cell_max_dist2(const Vec& c, const Vec& lo, const Vec& hi, int n) {
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    std::size_t k = static_cast<std::size_t>(i);
    double v = std::max(std::abs(lo[k] - c[k]), std::abs(hi[k] - c[k]));
    acc += v * v;
  }
  return acc;
}

bool cantor_hits_1d(double cl, double ch, double lo, double hi, double ratio, int iters) {
  if (ch < lo || cl > hi) return false;
  if (iters == 0) return true;
  double len = (hi - lo) * ratio;
  return cantor_hits_1d(cl, ch, lo, lo + len, ratio, iters - 1) ||
         cantor_hits_1d(cl, ch, hi - len, hi, ratio, iters - 1);
}

}  // namespace

bool SetSpec::cantor_cell_hits(const Vec& lo, const Vec& hi, int n) const {
  // The dust is a product of one-dimensional Cantor sets, so the cell meets it
  // iff every axis interval meets the corresponding 1-d set.
  for (int i = 0; i < n; ++i) {
    std::size_t k = static_cast<std::size_t>(i);
    if (!cantor_hits_1d(lo[k], hi[k], a_[k], b_[k], ratio_, iters_)) return false;
  }
  return true;
}

bool SetSpec::intersects_cell(const Vec& lo, const Vec& hi, int n) const {
  switch (kind_) {
    case Kind::empty:
      return false;
    case Kind::ball:
      return cell_min_dist2(a_, lo, hi, n) <= r0_ * r0_;
    case Kind::box: {
      for (int i = 0; i < n; ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        if (hi[k] < a_[k] || lo[k] > b_[k]) return false;
      }
      return true;
    }
    case Kind::annulus:
      return cell_min_dist2(a_, lo, hi, n) <= r1_ * r1_ &&
             cell_max_dist2(a_, lo, hi, n) >= r0_ * r0_;
    case Kind::cantor:
      return cantor_cell_hits(lo, hi, n);
    case Kind::points: {
      for (const auto& p : pts_) {
        bool inside = true;
        for (int i = 0; i < n && inside; ++i) {
          std::size_t k = static_cast<std::size_t>(i);
          inside = p[k] >= lo[k] && p[k] <= hi[k];
        }
        if (inside) return true;
      }
      return false;
    }
    case Kind::set_union: {
      for (const auto& part : parts_)
        if (part.intersects_cell(lo, hi, n)) return true;
      return false;
    }
    case Kind::intersection:
      return parts_[0].intersects_cell(lo, hi, n) && parts_[1].intersects_cell(lo, hi, n);
  }
  return false;
}

SetSpec SetSpec::scaled(double factor) const {
  require(factor > 0, errc::invalid_argument, "scale factor must be positive");
  SetSpec s = *this;
  auto scale_vec = [&](Vec& v) {
    for (auto& c : v) c *= factor;
  };
  switch (kind_) {
    case Kind::empty:
      break;
    case Kind::ball:
      scale_vec(s.a_);
      s.r0_ *= factor;
      break;
    case Kind::box:
    case Kind::cantor:
      scale_vec(s.a_);
      scale_vec(s.b_);
      break;
    case Kind::annulus:
      scale_vec(s.a_);
      s.r0_ *= factor;
      s.r1_ *= factor;
      break;
    case Kind::points:
      for (auto& p : s.pts_) scale_vec(p);
      break;
    case Kind::set_union:
    case Kind::intersection:
      for (auto& part : s.parts_) part = part.scaled(factor);
      break;
  }
  return s;
}

SetSpec SetSpec::translated(const Vec& shift, int n) const {
  SetSpec s = *this;
  auto shift_vec = [&](Vec& v) {
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] += shift[static_cast<std::size_t>(i)];
  };
  switch (kind_) {
    case Kind::empty:
      break;
    case Kind::ball:
    case Kind::annulus:
      shift_vec(s.a_);
      break;
    case Kind::box:
    case Kind::cantor:
      shift_vec(s.a_);
      shift_vec(s.b_);
      break;
    case Kind::points:
      for (auto& p : s.pts_) shift_vec(p);
      break;
    case Kind::set_union:
    case Kind::intersection:
      for (auto& part : s.parts_) part = part.translated(shift, n);
      break;
  }
  return s;
}

double SetSpec::max_distance(const Vec& x, int n) const {
  switch (kind_) {
    case Kind::empty:
      return 0;
    case Kind::ball:
      return dist(a_, x, n) + r0_;
    case Kind::annulus:
      return dist(a_, x, n) + r1_;
    case Kind::box:
    case Kind::cantor: {
      // Box corners belong to the set (the dust keeps segment endpoints).
      double acc = 0;
      for (int i = 0; i < n; ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        double v = std::max(std::abs(a_[k] - x[k]), std::abs(b_[k] - x[k]));
        acc += v * v;
      }
      return std::sqrt(acc);
    }
    case Kind::points: {
      double best = 0;
      for (const auto& p : pts_) best = std::max(best, dist(p, x, n));
      return best;
    }
    case Kind::set_union: {
      double best = 0;
      for (const auto& part : parts_) best = std::max(best, part.max_distance(x, n));
      return best;
    }
    case Kind::intersection:
      return std::min(parts_[0].max_distance(x, n), parts_[1].max_distance(x, n));
  }
  return 0;
}

bool SetSpec::bounding_box(Vec& lo, Vec& hi, int n) const {
  switch (kind_) {
    case Kind::empty:
      return false;
    case Kind::ball:
    case Kind::annulus: {
      double r = kind_ == Kind::ball ? r0_ : r1_;
      for (int i = 0; i < n; ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        lo[k] = a_[k] - r;
        hi[k] = a_[k] + r;
      }
      return true;
    }
    case Kind::box:
    case Kind::cantor:
      lo = a_;
      hi = b_;
      return true;
    case Kind::points: {
      lo = pts_.front();
      hi = pts_.front();
      for (const auto& p : pts_)
        for (int i = 0; i < n; ++i) {
          std::size_t k = static_cast<std::size_t>(i);
          lo[k] = std::min(lo[k], p[k]);
          hi[k] = std::max(hi[k], p[k]);
        }
      return true;
    }
    case Kind::set_union: {
      bool any = false;
      Vec l{}, h{};
      for (const auto& part : parts_) {
        Vec pl{}, ph{};
        if (!part.bounding_box(pl, ph, n)) continue;
        if (!any) {
          l = pl;
          h = ph;
          any = true;
        } else {
          for (int i = 0; i < n; ++i) {
            std::size_t k = static_cast<std::size_t>(i);
            l[k] = std::min(l[k], pl[k]);
            h[k] = std::max(h[k], ph[k]);
          }
        }
      }
      lo = l;
      hi = h;
      return any;
    }
    case Kind::intersection: {
      Vec l0{}, h0{}, l1{}, h1{};
      if (!parts_[0].bounding_box(l0, h0, n) || !parts_[1].bounding_box(l1, h1, n)) return false;
      for (int i = 0; i < n; ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        lo[k] = std::max(l0[k], l1[k]);
        hi[k] = std::min(h0[k], h1[k]);
        if (lo[k] > hi[k]) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

std::string coords_text(const Vec& v, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ',';
    out += support::format_double(v[static_cast<std::size_t>(i)]);
  }
  return out;
}

Vec parse_coords(const std::string& text, int n) {
  Vec v{};
  std::stringstream ss(text);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    require(i < n, errc::invalid_argument, "too many coordinates in '" + text + "'");
    std::size_t pos = 0;
    v[static_cast<std::size_t>(i)] = std::stod(item, &pos);
    require(pos == item.size(), errc::invalid_argument, "bad coordinate '" + item + "'");
    ++i;
  }
  require(i == n, errc::invalid_argument, "expected " + std::to_string(n) + " coordinates in '" +
                                              text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string SetSpec::to_text(int n) const {
  switch (kind_) {
    case Kind::empty:
      return "empty";
    case Kind::ball:
      return "ball:" + coords_text(a_, n) + ":" + support::format_double(r0_);
    case Kind::box:
      return "box:" + coords_text(a_, n) + ":" + coords_text(b_, n);
    case Kind::annulus:
      return "annulus:" + coords_text(a_, n) + ":" + support::format_double(r0_) + ":" +
             support::format_double(r1_);
    case Kind::cantor:
      return "cantor:" + std::to_string(iters_) + ":" + support::format_double(ratio_) + ":" +
             coords_text(a_, n) + ":" + coords_text(b_, n);
    case Kind::points: {
      std::string out = "points:";
      for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (i) out += ';';
        out += coords_text(pts_[i], n);
      }
      return out;
    }
    case Kind::set_union: {
      std::string out;
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) out += '+';
        out += parts_[i].to_text(n);
      }
      return out;
    }
    case Kind::intersection:
      return "intersect(" + parts_[0].to_text(n) + "&" + parts_[1].to_text(n) + ")";
  }
  return "empty";
}

SetSpec SetSpec::parse(const std::string& text, int n) {
  require(n >= 1 && n <= kMaxDim, errc::invalid_argument, "dimension must be in [1, 3]");
  auto terms = split(text, '+');
  std::vector<SetSpec> parts;
  for (const auto& term : terms) {
    require(!term.empty(), errc::invalid_argument, "empty term in set text");
    auto fields = split(term, ':');
    const std::string& kind = fields[0];
    if (kind == "empty") {
      require(fields.size() == 1, errc::invalid_argument, "empty takes no arguments");
      parts.push_back(empty_set());
    } else if (kind == "ball") {
      require(fields.size() == 3, errc::invalid_argument, "ball:center:radius");
      parts.push_back(ball(parse_coords(fields[1], n), std::stod(fields[2])));
    } else if (kind == "box") {
      require(fields.size() == 3, errc::invalid_argument, "box:lo:hi");
      parts.push_back(box(parse_coords(fields[1], n), parse_coords(fields[2], n)));
    } else if (kind == "annulus") {
      require(fields.size() == 4, errc::invalid_argument, "annulus:center:r_in:r_out");
      parts.push_back(
          annulus(parse_coords(fields[1], n), std::stod(fields[2]), std::stod(fields[3])));
    } else if (kind == "cantor") {
      // cantor:iters:ratio:lo:hi, or the shorthand "cantor:iters:ratio:box"
      // for the unit box [0,1]^N.
      require(fields.size() == 4 || fields.size() == 5, errc::invalid_argument,
              "cantor:iters:ratio:lo:hi (or cantor:iters:ratio:box)");
      int iters = std::stoi(fields[1]);
      double ratio = std::stod(fields[2]);
      Vec lo{}, hi{};
      if (fields.size() == 4) {
        require(fields[3] == "box", errc::invalid_argument,
                "cantor shorthand expects literal 'box'");
        for (int i = 0; i < n; ++i) hi[static_cast<std::size_t>(i)] = 1.0;
      } else {
        lo = parse_coords(fields[3], n);
        hi = parse_coords(fields[4], n);
      }
      parts.push_back(cantor(iters, ratio, lo, hi));
    } else if (kind == "points") {
      require(fields.size() == 2, errc::invalid_argument, "points:x1,y1;x2,y2;...");
      std::vector<Vec> pts;
      for (const auto& p : split(fields[1], ';'))
        if (!p.empty()) pts.push_back(parse_coords(p, n));
      parts.push_back(points(std::move(pts)));
    } else {
      fail(errc::invalid_argument, "unknown set kind '" + kind + "'");
    }
  }
  return unite(std::move(parts));
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(const Vec& lo, const Vec& hi, double h, int n) {
  require(n >= 1 && n <= kMaxDim, errc::invalid_argument, "grid dimension must be in [1, 3]");
  require(h > 0 && std::isfinite(h), errc::invalid_argument, "grid spacing must be positive");
  lo_ = lo;
  hi_ = hi;
  h_ = h;
  n_ = n;
  count_ = 1;
  for (int i = 0; i < n; ++i) {
    std::size_t k = static_cast<std::size_t>(i);
    double span = hi[k] - lo[k];
    require(span > 0, errc::invalid_argument, "grid box must have positive volume");
    double steps = span / h;
    long rounded = std::lround(steps);
    require(rounded >= 1 && std::abs(steps - static_cast<double>(rounded)) < 1e-6,
            errc::invalid_argument, "grid box span must be a multiple of the spacing");
    shape_[k] = static_cast<int>(rounded) + 1;
    count_ *= static_cast<std::size_t>(shape_[k]);
  }
}

double Grid::coordinate(int axis, int index) const {
  std::size_t k = static_cast<std::size_t>(axis);
  if (index == shape_[k] - 1) return hi_[k];
  return lo_[k] + h_ * index;
}

std::array<int, kMaxDim> Grid::unflatten(std::size_t flat) const {
  std::array<int, kMaxDim> idx{0, 0, 0};
  for (int axis = n_ - 1; axis >= 0; --axis) {
    std::size_t k = static_cast<std::size_t>(axis);
    std::size_t m = static_cast<std::size_t>(shape_[k]);
    idx[k] = static_cast<int>(flat % m);
    flat /= m;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int axis = 0; axis < n_; ++axis) {
    std::size_t k = static_cast<std::size_t>(axis);
    flat = flat * static_cast<std::size_t>(shape_[k]) + static_cast<std::size_t>(idx[k]);
  }
  return flat;
}

Vec Grid::node(std::size_t flat) const {
  auto idx = unflatten(flat);
  Vec v{};
  for (int axis = 0; axis < n_; ++axis)
    v[static_cast<std::size_t>(axis)] = coordinate(axis, idx[static_cast<std::size_t>(axis)]);
  return v;
}

bool Grid::operator==(const Grid& other) const {
  if (n_ != other.n_ || h_ != other.h_) return false;
  for (int i = 0; i < n_; ++i) {
    std::size_t k = static_cast<std::size_t>(i);
    if (lo_[k] != other.lo_[k] || hi_[k] != other.hi_[k]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// DiscreteSet

std::size_t DiscreteSet::member_count() const {
  std::size_t c = 0;
  for (auto m : mask) c += m;
  return c;
}

std::vector<std::size_t> DiscreteSet::member_indices() const {
  std::vector<std::size_t> out;
  out.reserve(member_count());
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

DiscreteSet rasterize(const SetSpec& set, const Grid& grid) {
  DiscreteSet ds;
  ds.grid = grid;
  ds.source = set;
  ds.mask.assign(grid.node_count(), 0);
  if (set.is_empty_spec()) return ds;
  double half = 0.5 * grid.spacing();
  int n = grid.dim();
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    Vec c = grid.node(i);
    Vec lo = c, hi = c;
    for (int a = 0; a < n; ++a) {
      std::size_t k = static_cast<std::size_t>(a);
      lo[k] -= half;
      hi[k] += half;
    }
    ds.mask[i] = set.intersects_cell(lo, hi, n) ? 1 : 0;
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Annular slicing

ShellDecomposition annular_slices(const DiscreteSet& F, const Vec& x, double t,
                                  double series_tolerance) {
  require(t > 0 && std::isfinite(t), errc::invalid_argument, "slicing requires t > 0");
  ShellDecomposition out;
  out.center = x;
  out.t = t;

  // Terms of the capacitary series carry e^{-n/4}; shells beyond the first n
  // with e^{-n/4} below the tolerance cannot contribute and are dropped.
  int n_trunc = series_tolerance > 0
                    ? static_cast<int>(std::ceil(-4.0 * std::log(series_tolerance)))
                    : std::numeric_limits<int>::max();

  int n_dim = F.grid.dim();
  int max_shell = -1;
  std::vector<std::pair<int, std::size_t>> assignment;
  for (std::size_t i = 0; i < F.mask.size(); ++i) {
    if (!F.mask[i]) continue;
    double r = dist(F.grid.node(i), x, n_dim);
    out.max_radius = std::max(out.max_radius, r);
    int n = static_cast<int>(std::floor(r * r / t));
    if (n > n_trunc) continue;
    assignment.emplace_back(n, i);
    max_shell = std::max(max_shell, n);
  }
  out.a_t = max_shell;
  if (max_shell < 0) return out;

  out.shells.resize(static_cast<std::size_t>(max_shell) + 1);
  for (int n = 0; n <= max_shell; ++n) {
    auto& sh = out.shells[static_cast<std::size_t>(n)];
    sh.n = n;
    sh.d_inner = std::sqrt(static_cast<double>(n) * t);
    sh.d_outer = std::sqrt(static_cast<double>(n + 1) * t);
  }
  for (auto& [n, i] : assignment)
    out.shells[static_cast<std::size_t>(n)].nodes.push_back(i);
  return out;
}

int ShellDecomposition::covering_index() const {
  if (a_t < 0) return 0;
  double v = max_radius * max_radius / t - 1.0;
  int n = static_cast<int>(std::ceil(v - 1e-12));
  return std::max(0, n);
}

int ShellDecomposition::enclosing_index() const {
  if (a_t < 0) return 0;
  double v = max_radius * max_radius / t;
  int n = static_cast<int>(std::ceil(v - 1e-12));
  return std::max(0, n);
}

std::size_t ShellDecomposition::sliced_node_count() const {
  std::size_t c = 0;
  for (const auto& sh : shells) c += sh.nodes.size();
  return c;
}

}  // namespace parcap::model
