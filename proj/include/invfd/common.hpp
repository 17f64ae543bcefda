#pragma once
// Small shared utilities: a value-or-error carrier and a reproducible RNG.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace invfd {

// Value-or-error result for operations whose failure is data (missing stencil
// index, zero pivot, divergence) rather than a programming error.  Constructor
// misuse still throws; see the mesh and field types.
template <typename T>
class Result {
 public:
  static Result ok(T value) {
    Result r;
    r.value_ = std::move(value);
    return r;
  }
  static Result fail(std::string message) {
    Result r;
    r.error_ = std::move(message);
    return r;
  }

  bool has_value() const { return value_.has_value(); }
  explicit operator bool() const { return has_value(); }

  const T& value() const {
    if (!value_) throw std::logic_error("Result::value on failure: " + error_);
    return *value_;
  }
  T& value() {
    if (!value_) throw std::logic_error("Result::value on failure: " + error_);
    return *value_;
  }
  const std::string& error() const { return error_; }

 private:
  Result() = default;
  std::optional<T> value_;
  std::string error_;
};

// Uniform doubles built directly on mt19937_64 output so that streams are
// bit-identical across standard library implementations (the distribution
// classes are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline bool nearly_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

// Scalar Newton iteration.  Succeeds once the step size drops below
// tol * (1 + |x|); fails on a vanishing derivative, a non-finite iterate,
// or exhaustion of max_iter.
template <typename F, typename DF>
Result<double> newton_scalar(F f, DF df, double seed, double tol,
                             int max_iter) {
  double x = seed;
  for (int it = 0; it < max_iter; ++it) {
    const double d = df(x);
    if (!std::isfinite(d) || std::abs(d) < 1e-300)
      return Result<double>::fail("newton_scalar: derivative vanished at x=" +
                                  std::to_string(x));
    const double step = f(x) / d;
    x -= step;
    if (!std::isfinite(x))
      return Result<double>::fail("newton_scalar: iterate became non-finite");
    if (std::abs(step) <= tol * (1.0 + std::abs(x)))
      return Result<double>::ok(x);
  }
  return Result<double>::fail("newton_scalar: no convergence after " +
                              std::to_string(max_iter) + " iterations");
}

}  // namespace invfd
