#include "core/support.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace parcap::support {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::io_error, "cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  require(out.good(), errc::io_error, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::io_error, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  require(!ec, errc::io_error, "cannot create directory: " + path);
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

namespace {

struct Sha256 {
  std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                        0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
  static constexpr std::uint32_t k[64] = {
      0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
      0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
      0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
      0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
      0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
      0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
      0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
      0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
      0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
      0xc67178f2};

  static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void block(const unsigned char* p) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                  hh = h[7];
    for (int i = 0; i < 64; ++i) {
      std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      std::uint32_t ch = (e & f) ^ (~e & g);
      std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
      std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      std::uint32_t t2 = s0 + maj;
      hh = g; g = f; f = e; e = d + t1;
      d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }
};

constexpr std::uint32_t Sha256::k[64];

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 s;
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t n = bytes.size();
  std::size_t i = 0;
  for (; i + 64 <= n; i += 64) s.block(data + i);
  unsigned char tail[128] = {0};
  std::size_t rem = n - i;
  std::memcpy(tail, data + i, rem);
  tail[rem] = 0x80;
  std::size_t tail_len = (rem < 56) ? 64 : 128;
  std::uint64_t bits = std::uint64_t(n) * 8;
  for (int b = 0; b < 8; ++b) tail[tail_len - 1 - b] = static_cast<unsigned char>(bits >> (8 * b));
  s.block(tail);
  if (tail_len == 128) s.block(tail + 64);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint32_t word : s.h)
    for (int b = 28; b >= 0; b -= 4) out.push_back(hex[(word >> b) & 0xf]);
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : ncols_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += header[i];
  }
  buf_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& row) {
  require(row.size() == ncols_, errc::invalid_argument, "csv row width mismatch");
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += format_double(row[i]);
  }
  buf_ += '\n';
}

void CsvWriter::add_row_mixed(const std::vector<std::string>& row) {
  require(row.size() == ncols_, errc::invalid_argument, "csv row width mismatch");
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += row[i];
  }
  buf_ += '\n';
}

void CsvWriter::write(const std::string& path) const { write_text_file(path, buf_); }

std::vector<double> linspace(double lo, double hi, int n) {
  require(n >= 2, errc::invalid_argument, "linspace needs n >= 2");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

std::vector<double> geomspace(double lo, double hi, int n) {
  require(lo > 0 && hi > 0, errc::invalid_argument, "geomspace needs positive bounds");
  require(n >= 2, errc::invalid_argument, "geomspace needs n >= 2");
  std::vector<double> v(static_cast<std::size_t>(n));
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
  v.back() = hi;
  return v;
}

namespace {
// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double gl16_x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                              0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                              0.9445750230732326, 0.9894009349916499};
constexpr double gl16_w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                              0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                              0.0622535239386479, 0.0271524594117541};
}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels, int nodes_per_panel) {
  require(panels >= 1, errc::invalid_argument, "gauss_legendre needs >= 1 panel");
  (void)nodes_per_panel;  // fixed 16-point rule per panel
  double total = 0.0;
  double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * w;
    double mid = lo + 0.5 * w;
    double half = 0.5 * w;
    double acc = 0.0;
    for (int i = 0; i < 8; ++i) {
      acc += gl16_w[i] * (f(mid + half * gl16_x[i]) + f(mid - half * gl16_x[i]));
    }
    total += acc * half;
  }
  return total;
}

double romberg(const std::function<double(double)>& f, double a, double b, double rel_tol,
               int max_levels, double fa, double fb) {
  std::vector<double> prev, cur;
  double h = b - a;
  double t = 0.5 * h * (fa + fb);
  prev.push_back(t);
  std::size_t n = 1;
  for (int level = 1; level <= max_levels; ++level) {
    double sum = 0.0;
    double step = h / static_cast<double>(2 * n);
    for (std::size_t i = 0; i < n; ++i) sum += f(a + step * (2.0 * static_cast<double>(i) + 1.0));
    t = 0.5 * t + step * sum;
    cur.assign(1, t);
    double p4 = 4.0;
    for (std::size_t m = 1; m <= prev.size(); ++m) {
      cur.push_back((p4 * cur[m - 1] - prev[m - 1]) / (p4 - 1.0));
      p4 *= 4.0;
    }
    if (level >= 4) {
      double best = cur.back(), prev_best = prev.back();
      double scale = std::max({std::abs(best), std::abs(prev_best), 1e-300});
      if (std::abs(best - prev_best) <= rel_tol * scale) return best;
    }
    prev = cur;
    n *= 2;
  }
  return prev.back();
}

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

int default_jobs() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(hw > 8 ? 8 : hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int jobs) {
  if (jobs <= 0) jobs = default_jobs();
  if (n == 0) return;
  if (jobs == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, errc::invalid_argument, "fit_slope inputs");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace parcap::support
