#include "relucert/enclosure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace relucert {

Enclosure::Enclosure(int precision_bits) : prec_(precision_bits) {
  mpfr_init2(lo_, precision_bits);
  mpfr_init2(hi_, precision_bits);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

Enclosure::Enclosure(const Enclosure& o) : prec_(o.prec_) {
  mpfr_init2(lo_, prec_);
  mpfr_init2(hi_, prec_);
  mpfr_set(lo_, o.lo_, MPFR_RNDD);
  mpfr_set(hi_, o.hi_, MPFR_RNDU);
}

Enclosure::Enclosure(Enclosure&& o) noexcept : prec_(o.prec_) {
  mpfr_init2(lo_, prec_);
  mpfr_init2(hi_, prec_);
  mpfr_swap(lo_, o.lo_);
  mpfr_swap(hi_, o.hi_);
}

Enclosure& Enclosure::operator=(const Enclosure& o) {
  if (this != &o) {
    if (prec_ != o.prec_) {
      mpfr_set_prec(lo_, o.prec_);
      mpfr_set_prec(hi_, o.prec_);
      prec_ = o.prec_;
    }
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }
  return *this;
}

Enclosure& Enclosure::operator=(Enclosure&& o) noexcept {
  if (this != &o) {
    mpfr_swap(lo_, o.lo_);
    mpfr_swap(hi_, o.hi_);
    std::swap(prec_, o.prec_);
  }
  return *this;
}

Enclosure::~Enclosure() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

Enclosure Enclosure::point(double v, int precision_bits) {
  Enclosure e(precision_bits);
  mpfr_set_d(e.lo_, v, MPFR_RNDD);
  mpfr_set_d(e.hi_, v, MPFR_RNDU);
  return e;
}

Enclosure Enclosure::interval(double lo, double hi, int precision_bits) {
  if (!(lo <= hi)) throw EnclosureDomainError("interval: lo > hi");
  Enclosure e(precision_bits);
  mpfr_set_d(e.lo_, lo, MPFR_RNDD);
  mpfr_set_d(e.hi_, hi, MPFR_RNDU);
  return e;
}

Enclosure Enclosure::pi(int precision_bits) {
  // mpfr_const_pi uses a global cache; serialize in case MPFR lacks TLS.
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  Enclosure e(precision_bits);
  mpfr_const_pi(e.lo_, MPFR_RNDD);
  mpfr_const_pi(e.hi_, MPFR_RNDU);
  return e;
}

double Enclosure::lo_double() const { return mpfr_get_d(lo_, MPFR_RNDD); }
double Enclosure::hi_double() const { return mpfr_get_d(hi_, MPFR_RNDU); }

double Enclosure::mid_double() const {
  mpfr_t m;
  mpfr_init2(m, prec_);
  mpfr_add(m, lo_, hi_, MPFR_RNDN);
  mpfr_div_2ui(m, m, 1, MPFR_RNDN);
  const double r = mpfr_get_d(m, MPFR_RNDN);
  mpfr_clear(m);
  return r;
}

double Enclosure::width_upper() const {
  mpfr_t w;
  mpfr_init2(w, prec_);
  mpfr_sub(w, hi_, lo_, MPFR_RNDU);
  const double r = mpfr_get_d(w, MPFR_RNDU);
  mpfr_clear(w);
  return r;
}

double Enclosure::mag_upper() const {
  const double a = std::abs(mpfr_get_d(lo_, MPFR_RNDD));
  const double b = std::abs(mpfr_get_d(hi_, MPFR_RNDU));
  return std::max(a, b);
}

bool Enclosure::contains_zero() const { return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0; }

bool Enclosure::contains(double v) const {
  return mpfr_cmp_d(lo_, v) <= 0 && mpfr_cmp_d(hi_, v) >= 0;
}

bool Enclosure::is_strictly_positive() const { return mpfr_sgn(lo_) > 0; }
bool Enclosure::is_strictly_negative() const { return mpfr_sgn(hi_) < 0; }
bool Enclosure::lo_nonnegative() const { return mpfr_sgn(lo_) >= 0; }

std::string Enclosure::str(int digits) const {
  char* s = nullptr;
  const std::string fmt = "[%." + std::to_string(digits) + "RDe, %." + std::to_string(digits) + "RUe]";
  if (mpfr_asprintf(&s, fmt.c_str(), lo_, hi_) < 0) return "[?]";
  std::string out(s);
  mpfr_free_str(s);
  return out;
}

namespace {

int join_prec(const Enclosure& a, const Enclosure& b) { return std::max(a.precision(), b.precision()); }

}  // namespace

Enclosure operator+(const Enclosure& a, const Enclosure& b) {
  Enclosure r(join_prec(a, b));
  mpfr_add(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_add(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  return r;
}

Enclosure operator-(const Enclosure& a, const Enclosure& b) {
  Enclosure r(join_prec(a, b));
  mpfr_sub(r.lo_raw(), a.lo_raw(), b.hi_raw(), MPFR_RNDD);
  mpfr_sub(r.hi_raw(), a.hi_raw(), b.lo_raw(), MPFR_RNDU);
  return r;
}

Enclosure operator-(const Enclosure& a) {
  Enclosure r(a.precision());
  mpfr_neg(r.lo_raw(), a.hi_raw(), MPFR_RNDD);
  mpfr_neg(r.hi_raw(), a.lo_raw(), MPFR_RNDU);
  return r;
}

namespace {

// min/max over the four endpoint products with directed rounding.
Enclosure mul_or_div(const Enclosure& a, const Enclosure& b, bool divide) {
  const int prec = join_prec(a, b);
  if (divide && b.contains_zero()) throw EnclosureDomainError("interval division by enclosure containing 0");
  Enclosure r(prec);
  mpfr_t t;
  mpfr_init2(t, prec);
  mpfr_srcptr as[2] = {a.lo_raw(), a.hi_raw()};
  mpfr_srcptr bs[2] = {b.lo_raw(), b.hi_raw()};
  bool first = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (divide)
        mpfr_div(t, as[i], bs[j], MPFR_RNDD);
      else
        mpfr_mul(t, as[i], bs[j], MPFR_RNDD);
      if (first || mpfr_cmp(t, r.lo_raw()) < 0) mpfr_set(r.lo_raw(), t, MPFR_RNDD);
      if (divide)
        mpfr_div(t, as[i], bs[j], MPFR_RNDU);
      else
        mpfr_mul(t, as[i], bs[j], MPFR_RNDU);
      if (first || mpfr_cmp(t, r.hi_raw()) > 0) mpfr_set(r.hi_raw(), t, MPFR_RNDU);
      first = false;
    }
  mpfr_clear(t);
  return r;
}

}  // namespace

Enclosure operator*(const Enclosure& a, const Enclosure& b) { return mul_or_div(a, b, false); }
Enclosure operator/(const Enclosure& a, const Enclosure& b) { return mul_or_div(a, b, true); }

Enclosure operator+(const Enclosure& a, double b) { return a + Enclosure::point(b, a.precision()); }
Enclosure operator-(const Enclosure& a, double b) { return a - Enclosure::point(b, a.precision()); }
Enclosure operator-(double a, const Enclosure& b) { return Enclosure::point(a, b.precision()) - b; }
Enclosure operator*(const Enclosure& a, double b) { return a * Enclosure::point(b, a.precision()); }
Enclosure operator*(double a, const Enclosure& b) { return Enclosure::point(a, b.precision()) * b; }
Enclosure operator/(const Enclosure& a, double b) { return a / Enclosure::point(b, a.precision()); }
Enclosure operator/(double a, const Enclosure& b) { return Enclosure::point(a, b.precision()) / b; }

Enclosure sqr(const Enclosure& a) {
  Enclosure r(a.precision());
  const int slo = mpfr_sgn(a.lo_raw());
  const int shi = mpfr_sgn(a.hi_raw());
  if (slo >= 0) {
    mpfr_sqr(r.lo_raw(), a.lo_raw(), MPFR_RNDD);
    mpfr_sqr(r.hi_raw(), a.hi_raw(), MPFR_RNDU);
  } else if (shi <= 0) {
    mpfr_sqr(r.lo_raw(), a.hi_raw(), MPFR_RNDD);
    mpfr_sqr(r.hi_raw(), a.lo_raw(), MPFR_RNDU);
  } else {
    mpfr_set_zero(r.lo_raw(), 1);
    mpfr_t t;
    mpfr_init2(t, a.precision());
    mpfr_sqr(t, a.lo_raw(), MPFR_RNDU);
    mpfr_sqr(r.hi_raw(), a.hi_raw(), MPFR_RNDU);
    if (mpfr_cmp(t, r.hi_raw()) > 0) mpfr_set(r.hi_raw(), t, MPFR_RNDU);
    mpfr_clear(t);
  }
  return r;
}

Enclosure sqrt(const Enclosure& a) {
  if (mpfr_sgn(a.lo_raw()) < 0) throw EnclosureDomainError("sqrt of enclosure with negative lo");
  Enclosure r(a.precision());
  mpfr_sqrt(r.lo_raw(), a.lo_raw(), MPFR_RNDD);
  mpfr_sqrt(r.hi_raw(), a.hi_raw(), MPFR_RNDU);
  return r;
}

Enclosure abs(const Enclosure& a) {
  Enclosure r(a.precision());
  if (a.contains_zero()) {
    mpfr_set_zero(r.lo_raw(), 1);
    mpfr_t t;
    mpfr_init2(t, a.precision());
    mpfr_abs(t, a.lo_raw(), MPFR_RNDU);
    mpfr_abs(r.hi_raw(), a.hi_raw(), MPFR_RNDU);
    if (mpfr_cmp(t, r.hi_raw()) > 0) mpfr_set(r.hi_raw(), t, MPFR_RNDU);
    mpfr_clear(t);
  } else if (mpfr_sgn(a.lo_raw()) > 0) {
    r = a;
  } else {
    r = -a;
  }
  return r;
}

Enclosure acos(const Enclosure& a) {
  // The exact argument is a true cosine, so intersecting with [-1, 1] keeps
  // containment. This is not a clamp of a float value: the enclosure itself
  // is narrowed to the domain.
  Enclosure arg(a.precision());
  mpfr_set(arg.lo_raw(), a.lo_raw(), MPFR_RNDD);
  mpfr_set(arg.hi_raw(), a.hi_raw(), MPFR_RNDU);
  if (mpfr_cmp_d(arg.lo_raw(), -1.0) < 0) mpfr_set_d(arg.lo_raw(), -1.0, MPFR_RNDD);
  if (mpfr_cmp_d(arg.hi_raw(), 1.0) > 0) mpfr_set_d(arg.hi_raw(), 1.0, MPFR_RNDU);
  if (mpfr_cmp(arg.lo_raw(), arg.hi_raw()) > 0) throw EnclosureDomainError("acos: enclosure disjoint from [-1, 1]");
  Enclosure r(a.precision());
  mpfr_acos(r.lo_raw(), arg.hi_raw(), MPFR_RNDD);
  mpfr_acos(r.hi_raw(), arg.lo_raw(), MPFR_RNDU);
  return r;
}

Enclosure sin_on_0_pi(const Enclosure& theta) {
  if (mpfr_sgn(theta.lo_raw()) < 0) throw EnclosureDomainError("sin_on_0_pi: negative lower bound");
  if (mpfr_cmp_d(theta.hi_raw(), 3.15) > 0) throw EnclosureDomainError("sin_on_0_pi: upper bound above pi");
  const int prec = theta.precision();
  Enclosure r(prec);
  mpfr_t slo, shi, half_pi;
  mpfr_init2(slo, prec);
  mpfr_init2(shi, prec);
  mpfr_init2(half_pi, prec);

  // sin is concave on [0, pi]: its minimum over a subinterval is attained at
  // an endpoint, and its maximum is 1 iff the subinterval can contain pi/2.
  mpfr_sin(slo, theta.lo_raw(), MPFR_RNDD);
  mpfr_sin(shi, theta.hi_raw(), MPFR_RNDD);
  if (mpfr_cmp(slo, shi) < 0)
    mpfr_set(r.lo_raw(), slo, MPFR_RNDD);
  else
    mpfr_set(r.lo_raw(), shi, MPFR_RNDD);

  {
    Enclosure tmp = Enclosure::pi(prec);
    mpfr_div_2ui(half_pi, tmp.hi_raw(), 1, MPFR_RNDU);
  }
  const bool may_contain_peak = mpfr_cmp(theta.lo_raw(), half_pi) <= 0 && [&] {
    mpfr_t half_pi_lo;
    mpfr_init2(half_pi_lo, prec);
    Enclosure tmp = Enclosure::pi(prec);
    mpfr_div_2ui(half_pi_lo, tmp.lo_raw(), 1, MPFR_RNDD);
    const bool above = mpfr_cmp(theta.hi_raw(), half_pi_lo) >= 0;
    mpfr_clear(half_pi_lo);
    return above;
  }();
  if (may_contain_peak) {
    mpfr_set_d(r.hi_raw(), 1.0, MPFR_RNDU);
  } else {
    mpfr_sin(slo, theta.lo_raw(), MPFR_RNDU);
    mpfr_sin(shi, theta.hi_raw(), MPFR_RNDU);
    if (mpfr_cmp(slo, shi) > 0)
      mpfr_set(r.hi_raw(), slo, MPFR_RNDU);
    else
      mpfr_set(r.hi_raw(), shi, MPFR_RNDU);
  }
  mpfr_clear(slo);
  mpfr_clear(shi);
  mpfr_clear(half_pi);
  return r;
}

Enclosure min(const Enclosure& a, const Enclosure& b) {
  Enclosure r(join_prec(a, b));
  mpfr_min(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_min(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  return r;
}

Enclosure max(const Enclosure& a, const Enclosure& b) {
  Enclosure r(join_prec(a, b));
  mpfr_max(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_max(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  return r;
}

Enclosure hull(const Enclosure& a, const Enclosure& b) {
  Enclosure r(join_prec(a, b));
  mpfr_min(r.lo_raw(), a.lo_raw(), b.lo_raw(), MPFR_RNDD);
  mpfr_max(r.hi_raw(), a.hi_raw(), b.hi_raw(), MPFR_RNDU);
  return r;
}

bool certainly_less(const Enclosure& a, const Enclosure& b) { return mpfr_cmp(a.hi_raw(), b.lo_raw()) < 0; }

IntervalVector IntervalVector::exact(const Vector& x, int precision_bits) {
  IntervalVector out(static_cast<int>(x.size()), precision_bits);
  for (int i = 0; i < out.size(); ++i) out.v[i] = Enclosure::point(x[i], precision_bits);
  return out;
}

IntervalMatrix IntervalMatrix::exact(const Matrix& m, int precision_bits) {
  IntervalMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()), precision_bits);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = Enclosure::point(m(r, c), precision_bits);
  return out;
}

Matrix IntervalMatrix::mid() const {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = at(r, c).mid_double();
  return m;
}

Enclosure dot(const IntervalVector& a, const IntervalVector& b) {
  if (a.size() != b.size()) throw EnclosureDomainError("dot: size mismatch");
  const int prec = a.size() > 0 ? std::max(a.v[0].precision(), b.v[0].precision()) : Enclosure::kDefaultPrecision;
  Enclosure acc(prec);
  for (int i = 0; i < a.size(); ++i) acc = acc + a[i] * b[i];
  return acc;
}

Enclosure norm2(const IntervalVector& a) {
  const int prec = a.size() > 0 ? a.v[0].precision() : Enclosure::kDefaultPrecision;
  Enclosure acc(prec);
  for (int i = 0; i < a.size(); ++i) acc = acc + sqr(a[i]);
  return sqrt(acc);
}

Enclosure frobenius_distance_upper(const IntervalMatrix& A, const Matrix& B, int precision_bits) {
  Enclosure acc(precision_bits);
  for (int r = 0; r < A.rows; ++r)
    for (int c = 0; c < A.cols; ++c) {
      const Enclosure d = A.at(r, c) - Enclosure::point(B(r, c), precision_bits);
      acc = acc + sqr(abs(d));
    }
  Enclosure s = sqrt(acc);
  // Collapse to the certified upper bound.
  return Enclosure::interval(0.0, s.hi_double(), precision_bits);
}

IntervalMatrix matmul(const IntervalMatrix& A, const IntervalMatrix& B) {
  if (A.cols != B.rows) throw EnclosureDomainError("matmul: shape mismatch");
  const int prec = A.a.empty() ? Enclosure::kDefaultPrecision : A.a[0].precision();
  IntervalMatrix C(A.rows, B.cols, prec);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < A.rows; ++r) {
    for (int c = 0; c < B.cols; ++c) {
      Enclosure acc(prec);
      for (int t = 0; t < A.cols; ++t) acc = acc + A.at(r, t) * B.at(t, c);
      C.at(r, c) = acc;
    }
  }
  return C;
}

}  // namespace relucert
