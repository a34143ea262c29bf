#pragma once

// Small shared building blocks: fixed-capacity state vectors and matrices
// for systems of up to two conservation laws, error types carrying solver
// diagnostics, a deterministic RNG layer, and a static-chunk parallel map.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gorinn {

// ---------------------------------------------------------------------------
// State vectors and small matrices (D <= 2)
// ---------------------------------------------------------------------------

/// Per-cell state vector of a conservation-law system. Capacity is fixed at
/// two components; all benchmark systems have D <= 2.
class State {
 public:
  State() = default;
  explicit State(int n) : n_(check_dim(n)) {}
  static State scalar(double a) {
    State s(1);
    s.c_[0] = a;
    return s;
  }
  static State pair(double a, double b) {
    State s(2);
    s.c_[0] = a;
    s.c_[1] = b;
    return s;
  }

  int size() const { return n_; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

  State& operator+=(const State& o) {
    for (int i = 0; i < n_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  State& operator-=(const State& o) {
    for (int i = 0; i < n_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  State& operator*=(double a) {
    for (int i = 0; i < n_; ++i) c_[i] *= a;
    return *this;
  }
  friend State operator+(State a, const State& b) { return a += b; }
  friend State operator-(State a, const State& b) { return a -= b; }
  friend State operator*(double a, State v) { return v *= a; }
  friend State operator*(State v, double a) { return v *= a; }

  double dot(const State& o) const {
    double s = 0;
    for (int i = 0; i < n_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm_l1() const {
    double s = 0;
    for (int i = 0; i < n_; ++i) s += std::abs(c_[i]);
    return s;
  }
  double norm_inf() const {
    double s = 0;
    for (int i = 0; i < n_; ++i) s = std::max(s, std::abs(c_[i]));
    return s;
  }
  bool finite() const {
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

 private:
  static int check_dim(int n) {
    if (n < 1 || n > 2) throw std::invalid_argument("State: dim must be 1 or 2");
    return n;
  }
  int n_ = 0;
  std::array<double, 2> c_{0.0, 0.0};
};

/// Dense D x D matrix, D <= 2. Row-major entries.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n) {}
  static Mat scalar(double a) {
    Mat m(1);
    m(0, 0) = a;
    return m;
  }
  static Mat mat2(double a00, double a01, double a10, double a11) {
    Mat m(2);
    m(0, 0) = a00;
    m(0, 1) = a01;
    m(1, 0) = a10;
    m(1, 1) = a11;
    return m;
  }

  int size() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(2 * i + j)]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(2 * i + j)]; }

  State apply(const State& v) const {
    State out(n_);
    for (int i = 0; i < n_; ++i) {
      double s = 0;
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }
  double norm_inf() const {
    double s = 0;
    for (int i = 0; i < n_; ++i) {
      double row = 0;
      for (int j = 0; j < n_; ++j) row += std::abs((*this)(i, j));
      s = std::max(s, row);
    }
    return s;
  }

 private:
  int n_ = 0;
  std::array<double, 4> a_{0.0, 0.0, 0.0, 0.0};
};

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

/// CFL number exceeded 1 during an explicit step.
class CflError : public std::runtime_error {
 public:
  explicit CflError(double cfl)
      : std::runtime_error("CFL condition violated: max |s| dt/dx = " + std::to_string(cfl)),
        cfl_number(cfl) {}
  double cfl_number;
};

/// A linearized interface matrix lost real diagonalizability. Carries the
/// (pair, cell) site when raised during residual assembly; -1 when unknown.
class HyperbolicityError : public std::runtime_error {
 public:
  HyperbolicityError(double discriminant, long pair, long cell)
      : std::runtime_error("hyperbolicity loss: complex eigenvalues (disc = " +
                           std::to_string(discriminant) + ") at pair " + std::to_string(pair) +
                           ", cell " + std::to_string(cell)),
        disc(discriminant),
        pair_index(pair),
        cell_index(cell) {}
  double disc;
  long pair_index;
  long cell_index;

  HyperbolicityError at_site(long pair, long cell) const {
    return HyperbolicityError(disc, pair, cell);
  }
};

/// Invalid run configuration (bad file, bad value, incompatible options).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error("config error: " + what) {}
};

/// Stored file does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error("schema error: " + what) {}
};

/// An iterative solve failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what)
      : std::runtime_error("convergence failure: " + what) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG
// ---------------------------------------------------------------------------

/// mt19937_64 wrapper that derives doubles and bounded integers from the raw
/// bit stream. std::uniform_*_distribution is implementation-defined, so all
/// sampling goes through these helpers to keep runs bit-reproducible across
/// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  /// Standard normal via Box-Muller on the deterministic stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = u01();
    double u2 = u01();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform integer in [0, n) by rejection on the top bits.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Parallel map
// ---------------------------------------------------------------------------

/// Static-chunk parallel loop over [0, n). Each worker owns a disjoint index
/// range, so writes to per-index slots are race-free and results do not
/// depend on the schedule. Runs inline when a single thread is requested.
inline void parallel_for(long n, int n_threads, const std::function<void(long, long)>& body) {
  if (n <= 0) return;
  if (n_threads <= 1 || n < 2 * n_threads) {
    body(0, n);
    return;
  }
  const long chunk = (n + n_threads - 1) / n_threads;
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int t = 0; t < n_threads; ++t) {
    const long lo = t * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline int default_thread_count() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace gorinn
