#pragma once

#include <mpfr.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "relucert/types.hpp"

namespace relucert {

struct EnclosureDomainError : std::runtime_error {
  explicit EnclosureDomainError(const std::string& what) : std::runtime_error(what) {}
};

// A rigorous scalar interval [lo, hi] at a fixed bit precision. Every
// operation rounds lo down and hi up (outward), so the true real result of
// the corresponding exact computation is always contained. This is the
// artifact's replacement for variable-precision symbolic arithmetic: same
// guarantee class, mechanically checkable.
class Enclosure {
 public:
  static constexpr int kDefaultPrecision = 256;

  Enclosure() : Enclosure(kDefaultPrecision) {}
  explicit Enclosure(int precision_bits);
  Enclosure(const Enclosure& o);
  Enclosure(Enclosure&& o) noexcept;
  Enclosure& operator=(const Enclosure& o);
  Enclosure& operator=(Enclosure&& o) noexcept;
  ~Enclosure();

  // Exact embeddings (doubles are representable at any precision >= 53).
  static Enclosure point(double v, int precision_bits = kDefaultPrecision);
  static Enclosure interval(double lo, double hi, int precision_bits = kDefaultPrecision);
  static Enclosure pi(int precision_bits = kDefaultPrecision);

  int precision() const { return prec_; }

  double lo_double() const;   // rounded toward -inf: still a valid lower bound
  double hi_double() const;   // rounded toward +inf: still a valid upper bound
  double mid_double() const;  // no containment guarantee; hint extraction only
  double width_upper() const;
  // Upper bound on |x| over the enclosure.
  double mag_upper() const;

  bool contains_zero() const;
  bool contains(double v) const;
  bool is_strictly_positive() const;  // lo > 0
  bool is_strictly_negative() const;  // hi < 0
  bool lo_nonnegative() const;

  std::string str(int digits = 10) const;

  // Raw access for the implementation of the arithmetic free functions.
  mpfr_srcptr lo_raw() const { return lo_; }
  mpfr_srcptr hi_raw() const { return hi_; }
  mpfr_ptr lo_raw() { return lo_; }
  mpfr_ptr hi_raw() { return hi_; }

 private:
  mpfr_t lo_;
  mpfr_t hi_;
  int prec_;
};

Enclosure operator+(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a, const Enclosure& b);
Enclosure operator*(const Enclosure& a, const Enclosure& b);
// Requires b to exclude zero.
Enclosure operator/(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a);

Enclosure operator+(const Enclosure& a, double b);
Enclosure operator-(const Enclosure& a, double b);
Enclosure operator-(double a, const Enclosure& b);
Enclosure operator*(const Enclosure& a, double b);
Enclosure operator*(double a, const Enclosure& b);
Enclosure operator/(const Enclosure& a, double b);
Enclosure operator/(double a, const Enclosure& b);

Enclosure sqr(const Enclosure& a);                 // always >= 0
Enclosure sqrt(const Enclosure& a);                // requires lo >= 0
Enclosure abs(const Enclosure& a);
Enclosure acos(const Enclosure& a);                // domain intersected with [-1, 1]
Enclosure sin_on_0_pi(const Enclosure& theta);     // requires theta in [0, pi] (outward slack ok)
Enclosure min(const Enclosure& a, const Enclosure& b);
Enclosure max(const Enclosure& a, const Enclosure& b);
Enclosure hull(const Enclosure& a, const Enclosure& b);

// a.hi < b.lo — the comparison certifies.
bool certainly_less(const Enclosure& a, const Enclosure& b);

// ---------------------------------------------------------------------------
// Small dense interval linear algebra, enough for the certification pipeline.
// ---------------------------------------------------------------------------

struct IntervalVector {
  std::vector<Enclosure> v;

  IntervalVector() = default;
  IntervalVector(int size, int precision_bits) : v(size, Enclosure(precision_bits)) {}
  int size() const { return static_cast<int>(v.size()); }
  Enclosure& operator[](int i) { return v[i]; }
  const Enclosure& operator[](int i) const { return v[i]; }

  static IntervalVector exact(const Vector& x, int precision_bits);
};

struct IntervalMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Enclosure> a;

  IntervalMatrix() = default;
  IntervalMatrix(int r, int c, int precision_bits)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, Enclosure(precision_bits)) {}
  Enclosure& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  const Enclosure& at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  static IntervalMatrix exact(const Matrix& m, int precision_bits);
  Matrix mid() const;
};

Enclosure dot(const IntervalVector& a, const IntervalVector& b);
Enclosure norm2(const IntervalVector& a);
// Upper bound (as an exact-point enclosure) on the Frobenius distance
// sup_{A in [A]} ||A - B||_F for a double matrix B.
Enclosure frobenius_distance_upper(const IntervalMatrix& A, const Matrix& B, int precision_bits);
// Plain interval matrix product; entries evaluated independently (OpenMP).
IntervalMatrix matmul(const IntervalMatrix& A, const IntervalMatrix& B);

}  // namespace relucert
