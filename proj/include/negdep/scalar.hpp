#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace negdep {

/// Arbitrary-precision rational scalar for the exact backend.
///
/// Thin value wrapper around boost::multiprecision::cpp_rational with
/// constructors constrained so that Eigen expression templates never probe
/// boost's converting-constructor machinery (which is not SFINAE-friendly
/// against Eigen types on this toolchain).
class Rational {
 public:
  using rep_type = boost::multiprecision::cpp_rational;
  using int_type = boost::multiprecision::cpp_int;

  Rational() : v_(0) {}
  Rational(int n) : v_(n) {}
  Rational(long n) : v_(n) {}
  Rational(long long n) : v_(n) {}
  Rational(long long num, long long den) : v_(int_type(num), int_type(den)) {}

  template <class T, std::enable_if_t<std::is_same_v<std::decay_t<T>, rep_type>, int> = 0>
  Rational(T&& rep) : v_(std::forward<T>(rep)) {}
  template <class T, std::enable_if_t<std::is_same_v<std::decay_t<T>, int_type>, int> = 0>
  explicit Rational(const T& n) : v_(n) {}

  /// Exact conversion: every binary64 value is a dyadic rational.
  static Rational from_double(double x) { return Rational(rep_type(x)); }

  /// Parses "num/den", "num", or a decimal literal such as "-0.25".
  static Rational parse(const std::string& text);

  const rep_type& rep() const { return v_; }
  double to_double() const { return v_.template convert_to<double>(); }
  std::string str() const;

  int_type numerator() const { return boost::multiprecision::numerator(v_); }
  int_type denominator() const { return boost::multiprecision::denominator(v_); }
  bool is_integer() const { return denominator() == 1; }
  int sign() const { return v_.sign(); }

  /// Largest integer <= *this, returned as a Rational.
  Rational floor() const {
    int_type q = numerator() / denominator();
    if (v_ < 0 && q * denominator() != numerator()) --q;
    return Rational(q);
  }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(rep_type(a.v_ + b.v_)); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(rep_type(a.v_ - b.v_)); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(rep_type(a.v_ * b.v_)); }
  friend Rational operator/(const Rational& a, const Rational& b) { return Rational(rep_type(a.v_ / b.v_)); }
  Rational operator-() const { return Rational(rep_type(-v_)); }
  Rational operator+() const { return *this; }
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) { v_ /= o.v_; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r);

 private:
  rep_type v_;
};

inline Rational abs(const Rational& r) { return r < Rational(0) ? -r : r; }
inline double to_double(const Rational& r) { return r.to_double(); }
inline double to_double(double x) { return x; }

inline std::string Rational::str() const {
  std::string s = numerator().str();
  if (denominator() != 1) s += "/" + denominator().str();
  return s;
}

inline std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

namespace detail {

/// Decimal integer parse.  boost's string constructor treats a leading zero
/// as an octal prefix, so digits are folded by hand.
inline Rational::int_type parse_decimal_int(const std::string& text) {
  bool negative = false;
  std::size_t at = 0;
  if (at < text.size() && (text[at] == '-' || text[at] == '+')) {
    negative = text[at] == '-';
    ++at;
  }
  if (at == text.size()) throw std::invalid_argument("bad integer literal '" + text + "'");
  Rational::int_type value(0);
  for (; at < text.size(); ++at) {
    if (text[at] < '0' || text[at] > '9')
      throw std::invalid_argument("bad integer literal '" + text + "'");
    value = value * 10 + (text[at] - '0');
  }
  return negative ? Rational::int_type(-value) : value;
}

}  // namespace detail

inline Rational Rational::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const int_type num = detail::parse_decimal_int(text.substr(0, slash));
    const int_type den = detail::parse_decimal_int(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(rep_type(num, den));
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(detail::parse_decimal_int(text));
  // Decimal literal: digits after the dot scale the denominator.
  const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t frac_len = text.size() - dot - 1;
  int_type num = detail::parse_decimal_int(digits);
  int_type den(1);
  for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
  return Rational(rep_type(num, den));
}

/// Numeric policy of a backend scalar: tolerances and conversions that the
/// generic distribution/LP code needs.  The exact backend runs with all
/// tolerances at zero.
template <class Scalar>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  static const char* backend_name() { return "float"; }
  static double zero() { return 0.0; }
  static double abs(double x) { return std::abs(x); }
  /// Total-mass tolerance for validating a distribution.
  static double mass_tolerance() { return 1e-12; }
  /// Tolerance on the constant-sum property and distribution equality.
  static double sum_tolerance() { return 1e-9; }
  /// Half-width of the band treated as zero in sign verdicts.
  static double sign_band() { return 1e-10; }
  static double floor(double x) { return std::floor(x); }
  static double from_double(double x) { return x; }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool is_exact = true;
  static const char* backend_name() { return "rational"; }
  static Rational zero() { return Rational(0); }
  static Rational abs(const Rational& x) { return negdep::abs(x); }
  static Rational mass_tolerance() { return Rational(0); }
  static Rational sum_tolerance() { return Rational(0); }
  static Rational sign_band() { return Rational(0); }
  static Rational floor(const Rational& x) { return x.floor(); }
  static Rational from_double(double x) { return Rational::from_double(x); }
};

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace negdep

namespace Eigen {

template <>
struct NumTraits<negdep::Rational> {
  using Self = negdep::Rational;
  using Real = Self;
  using NonInteger = Self;
  using Nested = Self;
  using Literal = Self;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 60,
    MulCost = 60,
  };
  static Self epsilon() { return Self(0); }
  static Self dummy_precision() { return Self(0); }
  static int digits10() { return 0; }
};

}  // namespace Eigen
