#pragma once

// Scalar modes shared by every module: IEEE double for sweeps and searches,
// exact rationals for equality checks.  All templated code in this library
// is written against the helpers below so that one implementation serves
// both modes.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

namespace bellman {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

template <class T>
inline constexpr bool is_rational_v = std::is_same_v<T, Rational>;

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

/// Relative tolerance used for every floating-point precondition check.
inline constexpr double kFloatRelTol = 1e-12;

template <Scalar T>
T from_int(long long n) {
  return T(n);
}

/// p/q as a scalar.  Exact in rational mode.
template <Scalar T>
T ratio(long long num, long long den) {
  return T(num) / T(den);
}

template <Scalar T>
double to_double(const T& x) {
  if constexpr (is_rational_v<T>) {
    return x.template convert_to<double>();
  } else {
    return x;
  }
}

template <Scalar T>
bool is_integer_valued(const T& x) {
  if constexpr (is_rational_v<T>) {
    return boost::multiprecision::denominator(x) == 1;
  } else {
    return std::isfinite(x) && std::floor(x) == x;
  }
}

namespace detail {

inline Rational integer_power(Rational base, long long n) {
  if (n < 0) {
    if (base == 0) throw std::domain_error("zero raised to a negative power");
    base = Rational(1) / base;
    n = -n;
  }
  Rational result(1);
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

}  // namespace detail

/// base^exponent.  Rational mode accepts integer exponents only.
template <Scalar T>
T power(const T& base, const T& exponent) {
  if constexpr (is_rational_v<T>) {
    if (!is_integer_valued(exponent)) {
      throw std::domain_error("rational mode requires integer exponents");
    }
    const auto& n = boost::multiprecision::numerator(exponent);
    if (boost::multiprecision::abs(n) > 4096) {
      throw std::domain_error("rational exponent too large");
    }
    return detail::integer_power(base, n.template convert_to<long long>());
  } else {
    if (base == 0.0) return exponent > 0.0 ? 0.0 : 1.0;
    return std::pow(base, exponent);
  }
}

template <Scalar T>
T power(const T& base, long long exponent) {
  if constexpr (is_rational_v<T>) {
    return detail::integer_power(base, exponent);
  } else {
    return std::pow(base, static_cast<double>(exponent));
  }
}

template <Scalar T>
T max_of(const T& a, const T& b) {
  return a < b ? b : a;
}

template <Scalar T>
T min_of(const T& a, const T& b) {
  return b < a ? b : a;
}

template <Scalar T>
T positive_part(const T& x) {
  return x > 0 ? x : T(0);
}

/// a <= b, exactly for rationals and up to kFloatRelTol for doubles.
template <Scalar T>
bool tolerant_le(const T& a, const T& b) {
  if constexpr (is_rational_v<T>) {
    return a <= b;
  } else {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return a <= b + kFloatRelTol * scale;
  }
}

template <Scalar T>
bool is_finite_value(const T& x) {
  if constexpr (is_rational_v<T>) {
    return true;
  } else {
    return std::isfinite(x);
  }
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::domain_error(message);
}

/// A construction whose constraints cannot be met (as opposed to bad input).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bellman
