#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parcap {

enum class errc {
  ok = 0,
  invalid_argument,
  domain_error,
  not_converged,
  separation_violated,
  hypothesis_violated,
  io_error,
};

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

namespace support {

// Deterministic 64-bit generator (splitmix64). Used only for sample placement,
// so results are identical across platforms and standard-library versions.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::uint64_t state_;
};

// Shortest round-trip decimal representation; locale-free.
std::string format_double(double v);

std::string join_path(const std::string& dir, const std::string& name);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void ensure_directory(const std::string& path);
bool file_exists(const std::string& path);

// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);

// Simple CSV emitter: header row, comma separators, LF endings, '.' decimals.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  void add_row_mixed(const std::vector<std::string>& row);
  const std::string& str() const { return buf_; }
  void write(const std::string& path) const;

private:
  std::string buf_;
  std::size_t ncols_;
};

std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> geomspace(double lo, double hi, int n);

// Composite Gauss-Legendre with fixed nodes per panel.
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels, int nodes_per_panel = 16);

// Romberg integration by interval doubling; endpoint values are taken as given
// limits (useful when the integrand vanishes at the endpoints).
double romberg(const std::function<double(double)>& f, double a, double b,
               double rel_tol, int max_levels = 20, double fa = 0.0, double fb = 0.0);

// Adaptive Simpson.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 30);

// Runs fn(i) for i in [0, n) across up to `jobs` threads, deterministic in output
// as long as each index writes only its own slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int jobs = 0);

int default_jobs();

// Least squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace support
}  // namespace parcap
