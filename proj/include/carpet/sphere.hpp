#pragma once

#include <array>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace carpet {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates an operation's documented precondition (e.g. a degree-1 map
// handed to a dynamical routine).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A point of the Riemann sphere: a finite complex value or the point at
/// infinity. Non-finite complex input collapses to infinity, so no NaN/inf
/// sentinel ever escapes as a "finite" value.
class SpherePoint {
 public:
  SpherePoint() = default;
  SpherePoint(cplx z);  // NOLINT(google-explicit-constructor)
  SpherePoint(double re, double im = 0.0) : SpherePoint(cplx(re, im)) {}

  static SpherePoint infinity();

  bool is_infinity() const { return inf_; }
  bool is_finite() const { return !inf_; }
  /// Finite value; zero for the point at infinity.
  cplx value() const { return z_; }
  double modulus() const;

  /// Coordinate in the chart where it has modulus <= 1: z itself, or w = 1/z
  /// with `inverted` set.
  cplx chart(bool& inverted) const;

  SpherePoint reciprocal() const;
  SpherePoint conj() const;

 private:
  cplx z_{};
  bool inf_ = false;
};

/// sigma(z, w) = 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)), evaluated in whichever
/// chart keeps the arithmetic bounded. Lies in [0, 2].
double chordal_distance(const SpherePoint& z, const SpherePoint& w);

/// Dense complex polynomial c0 + c1 z + ... + cd z^d. Exact trailing zeros are
/// dropped, so degree() is the index of the last nonzero coefficient and the
/// zero polynomial has degree -1.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coefficients);

  static Polynomial monomial(int k, cplx c = 1.0);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<cplx>& coefficients() const { return c_; }
  cplx coefficient(int i) const;
  cplx leading() const { return c_.empty() ? cplx{} : c_.back(); }

  cplx operator()(cplx z) const;
  void eval_with_derivative(cplx z, cplx& p, cplx& dp) const;

  Polynomial derivative() const;
  /// z^d p(1/z); requires d >= degree().
  Polynomial reversed(int d) const;
  /// Coefficients below rel_tol * max|c| are zeroed before trimming.
  Polynomial trimmed(double rel_tol) const;
  /// Zeroes coefficients with |c_i| <= rel_tol * |bound_i|, where bound holds
  /// the absolute term sums that produced them.
  Polynomial cancelled(const Polynomial& bound, double rel_tol) const;
  /// Coefficient magnitudes.
  Polynomial abs() const;
  Polynomial conj() const;
  Polynomial pow(int k) const;
  double max_abs_coefficient() const;
  /// sum |c_i| r^i, the natural scale for relative residuals at |z| = r.
  double magnitude(double r) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(cplx s, const Polynomial& a);

 private:
  std::vector<cplx> c_;
};

class MoebiusMap;

/// Image of a point together with the derivative of the map read in the
/// local charts chosen by the point and by its image (see SpherePoint::chart).
struct ChartJet {
  SpherePoint image;
  cplx derivative;
  bool domain_inverted = false;
  bool image_inverted = false;
  /// |f'| measured in the chordal metric; chart independent.
  double spherical_derivative = 0.0;
};

/// A rational map P/Q of degree max(deg P, deg Q) >= 1 with P, Q coprime.
class RationalMap {
 public:
  /// Validates: Q nonzero, degree >= 1, no root of P within 1e-6 of a root of Q.
  RationalMap(Polynomial numerator, Polynomial denominator);

  /// Skips the numerical coprimality check; for maps built by composition or
  /// conjugation of already-validated maps.
  static RationalMap trusted(Polynomial numerator, Polynomial denominator);
  static RationalMap power(int k);

  const Polynomial& numerator() const { return p_; }
  const Polynomial& denominator() const { return q_; }
  int degree() const { return degree_; }

  SpherePoint operator()(const SpherePoint& z) const;
  ChartJet jet(const SpherePoint& z) const;
  /// Euclidean derivative; only meaningful where z and f(z) are finite.
  cplx derivative(cplx z) const;
  /// Finite-plane evaluation used in hot loops; caller keeps z away from poles.
  cplx eval_finite(cplx z) const;

 private:
  RationalMap(Polynomial numerator, Polynomial denominator, bool check);
  void chart_values(const SpherePoint& z, cplx& n, cplx& d, cplx& dn, cplx& dd,
                    cplx& u, bool& inverted) const;

  Polynomial p_, q_;
  Polynomial p_rev_, q_rev_;
  int degree_ = 0;
};

struct CriticalPoint {
  SpherePoint point;
  int local_degree = 1;
};

/// Critical points as roots of the Wronskian P'Q - PQ' plus the remainder
/// 2d - 2 - deg W assigned to infinity. Requires degree >= 2.
std::vector<CriticalPoint> critical_points(const RationalMap& f);
struct RootOptions;
std::vector<CriticalPoint> critical_points(const RationalMap& f, const RootOptions& roots);

/// Local degree from a precomputed critical set (match within 1e-6 chordal).
int local_degree(std::span<const CriticalPoint> critical, const SpherePoint& p);
int local_degree(const RationalMap& f, const SpherePoint& p);

/// A point of f^{-1}(y) with its local degree (its multiplicity as a root of
/// P - yQ, or the degree drop for the preimage at infinity).
struct Preimage {
  SpherePoint point;
  int local_degree = 1;
};

std::vector<Preimage> preimages(const RationalMap& f, const SpherePoint& y);

/// f o g
RationalMap compose(const RationalMap& f, const RationalMap& g);
/// f^n, n >= 1
RationalMap iterate(const RationalMap& f, int n);

/// z -> (a w + b) / (c w + d) with w = z or w = conj(z).
class MoebiusMap {
 public:
  MoebiusMap(cplx a, cplx b, cplx c, cplx d, bool conjugate_first = false);

  static MoebiusMap identity();
  static MoebiusMap conjugation();
  /// The unique map (of the requested orientation) sending src[i] to dst[i].
  static MoebiusMap from_triples(const std::array<SpherePoint, 3>& src,
                                 const std::array<SpherePoint, 3>& dst,
                                 bool orientation_reversing);

  cplx a() const { return m_[0]; }
  cplx b() const { return m_[1]; }
  cplx c() const { return m_[2]; }
  cplx d() const { return m_[3]; }
  bool orientation_reversing() const { return conj_; }
  const std::array<cplx, 4>& matrix() const { return m_; }

  SpherePoint operator()(const SpherePoint& z) const;
  /// this o inner
  MoebiusMap compose(const MoebiusMap& inner) const;
  MoebiusMap inverse() const;
  /// Representative with ad - bc = 1 and the first significant entry on the
  /// positive real axis.
  MoebiusMap normalized() const;
  cplx determinant() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

 private:
  std::array<cplx, 4> m_;
  bool conj_ = false;
};

inline MoebiusMap operator*(const MoebiusMap& outer, const MoebiusMap& inner) {
  return outer.compose(inner);
}

/// Frobenius distance between unit-norm representatives after the optimal
/// common phase; infinite when orientations differ.
double moebius_distance(const MoebiusMap& x, const MoebiusMap& y);

/// Least-squares Moebius map (fixed orientation) through point pairs, via
/// the smallest singular vector of the linearised system. Needs >= 3 pairs.
MoebiusMap fit_moebius(std::span<const SpherePoint> src, std::span<const SpherePoint> dst,
                       bool orientation_reversing);

/// m o f o m^{-1}
RationalMap conjugate(const RationalMap& f, const MoebiusMap& m);

}  // namespace carpet
