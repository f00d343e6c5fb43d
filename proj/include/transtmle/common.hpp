// Shared numeric helpers, error types and a small parallel-for used by the
// replication harnesses.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace transtmle {

using Vec = std::vector<double>;

// ---- errors ---------------------------------------------------------------

// Base for anything that should map to CLI exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StructuralViolation : ValidationError {
  StructuralViolation(long row, const std::string& what)
      : ValidationError("row " + std::to_string(row) + ": " + what), row(row) {}
  long row;
};

struct EmptyStratum : ValidationError {
  using ValidationError::ValidationError;
};

struct SchemaMismatch : ValidationError {
  using ValidationError::ValidationError;
};

// Numerical failures map to CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnumerationInfeasible : NumericError {
  using NumericError::NumericError;
};

// ---- scalar helpers -------------------------------------------------------

inline double expit(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) {
  const double q = std::clamp(p, 1e-15, 1.0 - 1e-15);
  return std::log(q / (1.0 - q));
}

inline double clamp_prob(double p, double lo, double hi) {
  return std::clamp(p, lo, hi);
}

inline double mean(const Vec& x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Population-style standard deviation (divides by n); this is the sigma_n
// convention used for Wald intervals throughout.
inline double sd_pop(const Vec& x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

inline bool all_finite(const Vec& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// ---- parallel replication helper -------------------------------------------

// Runs f(i) for i in [0, n) on up to `jobs` threads. Callers write results
// into pre-sized slots indexed by i, so output does not depend on scheduling.
inline void parallel_for_index(int n, int jobs, const std::function<void(int)>& f) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

inline int default_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace transtmle
