// Scalar modes shared by the whole library.
//
// Every quantity is computed either over exact big rationals (Rat) or over
// IEEE doubles with a global comparison tolerance.  Values carry their mode
// in the template parameter of whatever holds them; the two modes never mix
// silently.  Conversions Rat -> double are explicit and lossy, double -> Rat
// is explicit and exact (a double is a rational).

#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ratnear {

using Rat = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

// 50 decimal digits, used internally by models that need radicals resolved
// well below any tolerance we ever compare against.
using HiFloat = boost::multiprecision::cpp_bin_float_50;

// Global comparison tolerance for double-mode equality and zero tests.
// Configurable; reads vastly outnumber writes, so a plain double is fine
// (set it once before going parallel).
inline double& comparison_tolerance() {
  static double tol = 1e-10;
  return tol;
}

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Rat> {
  static constexpr bool is_exact = true;
  static bool is_zero(const Rat& x) { return x == 0; }
  static Rat abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }
  static double to_double(const Rat& x) { return x.convert_to<double>(); }
  static Rat from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite scalar");
    return Rat(x);  // exact binary expansion
  }
  static Rat from_int(long v) { return Rat(v); }
  static std::string to_string(const Rat& x) { return x.str(); }
};

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  static bool is_zero(double x) { return std::fabs(x) <= comparison_tolerance(); }
  static double abs(double x) { return std::fabs(x); }
  static double to_double(double x) { return x; }
  static double from_double(double x) { return x; }
  static double from_int(long v) { return static_cast<double>(v); }
  static std::string to_string(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
};

inline long long to_ll(const BigInt& v) { return v.convert_to<long long>(); }

}  // namespace ratnear
