#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "crnash/errors.hpp"

namespace crnash {

/// Exact rational arithmetic on 64-bit numerator/denominator with 128-bit
/// intermediates. Throws InternalError on overflow instead of degrading.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(long long n, long long d) : num_(n), den_(d) {
    if (den_ == 0) throw InternalError("rational with zero denominator");
    normalize();
  }

  long long num() const { return num_; }
  long long den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ - i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw InternalError("rational division by zero");
    return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }

  Rational pow(int e) const {
    if (e < 0) throw InternalError("rational pow with negative exponent");
    Rational r(1), base = *this;
    while (e > 0) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }

  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// "12.345" -> 12345/1000. Accepts an optional leading '-'.
  static Rational from_decimal(const std::string& text) {
    long long num = 0, den = 1;
    bool neg = false;
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
      neg = text[i] == '-';
      ++i;
    }
    bool after_dot = false, any = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (c == '.') {
        if (after_dot) throw InternalError("malformed decimal literal: " + text);
        after_dot = true;
        continue;
      }
      if (c < '0' || c > '9') throw InternalError("malformed decimal literal: " + text);
      any = true;
      __int128 n = i128(num) * 10 + (c - '0');
      __int128 d = after_dot ? i128(den) * 10 : i128(den);
      num = narrow(n);
      den = narrow(d);
    }
    if (!any) throw InternalError("empty decimal literal");
    return Rational(neg ? -num : num, den);
  }

 private:
  static __int128 i128(long long v) { return static_cast<__int128>(v); }

  static long long narrow(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw InternalError("rational overflow");
    return static_cast<long long>(v);
  }

  static Rational from_i128(__int128 n, __int128 d) {
    if (d == 0) throw InternalError("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    Rational r;
    r.num_ = narrow(n);
    r.den_ = narrow(d);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  long long num_ = 0;
  long long den_ = 1;
};

/// Complex number with exact rational real/imaginary parts (literal values).
struct CRational {
  Rational re, im;

  CRational() = default;
  CRational(Rational r, Rational i) : re(r), im(i) {}
  explicit CRational(long long r) : re(r), im(0) {}

  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  bool is_real() const { return im.is_zero(); }
  CRational conj() const { return {re, -im}; }

  friend CRational operator+(const CRational& a, const CRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend CRational operator-(const CRational& a, const CRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend CRational operator*(const CRational& a, const CRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  CRational operator-() const { return {-re, -im}; }
  friend bool operator==(const CRational& a, const CRational& b) {
    return a.re == b.re && a.im == b.im;
  }

  CRational pow(int e) const {
    CRational r{Rational(1), Rational(0)}, base = *this;
    while (e > 0) {
      if (e & 1) r = r * base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }

  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
};

}  // namespace crnash
