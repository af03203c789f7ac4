#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace kahlerflow {

inline constexpr double kPi = 3.14159265358979323846;

// Failure kinds surfaced by the numeric modules. The CLI maps NumericError
// to exit code 2 and std::invalid_argument to exit code 1.
enum class NumErr {
  NonFinite,
  NonSquare,
  Singular,
  NotPositive,
  Diverged,
  EmptyDataset,
  AllMasked,
  NegativeDensity,
  PositivityLost,
  MongeAmpereViolation,
  ZeroMass,
  IoError,
};

struct NumericError : std::runtime_error {
  NumErr kind;
  NumericError(NumErr k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

[[noreturn]] inline void fail(NumErr k, const std::string& what) { throw NumericError(k, what); }

// Complex value over a generic real scalar. T is double for plain
// evaluation and ad::Var when recording a tape; all complex arithmetic
// lowers to real pairs so one implementation serves both paths.
template <typename T>
struct CT {
  T re{};
  T im{};
};

using Cx = CT<double>;

template <typename T> inline CT<T> operator+(const CT<T>& a, const CT<T>& b) { return {a.re + b.re, a.im + b.im}; }
template <typename T> inline CT<T> operator-(const CT<T>& a, const CT<T>& b) { return {a.re - b.re, a.im - b.im}; }
template <typename T> inline CT<T> operator-(const CT<T>& a) { return {-a.re, -a.im}; }
template <typename T> inline CT<T> operator*(const CT<T>& a, const CT<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <typename T> inline CT<T> operator*(double s, const CT<T>& a) { return {s * a.re, s * a.im}; }
template <typename T> inline CT<T> operator*(const CT<T>& a, double s) { return {a.re * s, a.im * s}; }
template <typename T> inline CT<T> conj(const CT<T>& a) { return {a.re, -a.im}; }

template <typename T> inline T abs2(const CT<T>& a) { return a.re * a.re + a.im * a.im; }

inline double cabs(const Cx& a) { return std::hypot(a.re, a.im); }

inline Cx operator/(const Cx& a, const Cx& b) {
  const double d = abs2(b);
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline Cx operator/(const Cx& a, double s) { return {a.re / s, a.im / s}; }

inline Cx cexp(const Cx& a) {
  const double r = std::exp(a.re);
  return {r * std::cos(a.im), r * std::sin(a.im)};
}
inline Cx clog(const Cx& a) { return {std::log(cabs(a)), std::atan2(a.im, a.re)}; }

inline bool finite(double x) { return std::isfinite(x); }
inline bool finite(const Cx& a) { return std::isfinite(a.re) && std::isfinite(a.im); }

// Deterministic RNG: mt19937_64 sequence is pinned by the standard and the
// uniform/normal conversions below are our own, so identical seeds give
// identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return eng_(); }

  std::uint64_t index(std::uint64_t n) { return eng_() % n; }

  double normal() { // Box-Muller, one value per call, cached pair
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kahlerflow
