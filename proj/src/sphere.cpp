#include "carpet/sphere.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "carpet/roots.hpp"

namespace carpet {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

constexpr double kCoprimeDistance = 1e-6;
constexpr double kCriticalMatch = 1e-6;
constexpr double kCancel = 64.0 * std::numeric_limits<double>::epsilon();

}  // namespace

// ---------------------------------------------------------------- SpherePoint

SpherePoint::SpherePoint(cplx z) {
  if (finite(z)) {
    z_ = z;
  } else {
    inf_ = true;
  }
}

SpherePoint SpherePoint::infinity() {
  SpherePoint p;
  p.inf_ = true;
  return p;
}

double SpherePoint::modulus() const {
  return inf_ ? std::numeric_limits<double>::infinity() : std::abs(z_);
}

cplx SpherePoint::chart(bool& inverted) const {
  if (inf_) {
    inverted = true;
    return {};
  }
  if (std::abs(z_) <= 1.0) {
    inverted = false;
    return z_;
  }
  inverted = true;
  return 1.0 / z_;
}

SpherePoint SpherePoint::reciprocal() const {
  if (inf_) return SpherePoint(0.0);
  if (z_ == cplx{}) return infinity();
  return SpherePoint(1.0 / z_);
}

SpherePoint SpherePoint::conj() const { return inf_ ? *this : SpherePoint(std::conj(z_)); }

double chordal_distance(const SpherePoint& z, const SpherePoint& w) {
  bool zi = false, wi = false;
  const cplx u = z.chart(zi);
  const cplx v = w.chart(wi);
  const double nu = std::sqrt(1.0 + std::norm(u));
  const double nv = std::sqrt(1.0 + std::norm(v));
  double num;
  if (zi == wi) {
    num = std::abs(u - v);  // inversion is an isometry
  } else {
    num = std::abs(1.0 - u * v);  // one coordinate is the reciprocal of the point
  }
  return std::min(2.0, 2.0 * num / (nu * nv));
}

// ---------------------------------------------------------------- Polynomial

Polynomial::Polynomial(std::vector<cplx> coefficients) : c_(std::move(coefficients)) {
  while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
}

Polynomial Polynomial::monomial(int k, cplx c) {
  std::vector<cplx> v(k + 1);
  v[k] = c;
  return Polynomial(std::move(v));
}

cplx Polynomial::coefficient(int i) const {
  return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : cplx{};
}

cplx Polynomial::operator()(cplx z) const {
  cplx acc{};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

void Polynomial::eval_with_derivative(cplx z, cplx& p, cplx& dp) const {
  p = {};
  dp = {};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    dp = dp * z + p;
    p = p * z + *it;
  }
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<cplx> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::reversed(int d) const {
  std::vector<cplx> r(d + 1);
  for (int i = 0; i <= degree(); ++i) r[d - i] = c_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::trimmed(double rel_tol) const {
  const double cut = rel_tol * max_abs_coefficient();
  std::vector<cplx> v = c_;
  for (auto& x : v)
    if (std::abs(x) <= cut) x = {};
  return Polynomial(std::move(v));
}

Polynomial Polynomial::cancelled(const Polynomial& bound, double rel_tol) const {
  std::vector<cplx> v = c_;
  for (size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) <= rel_tol * std::abs(bound.coefficient(static_cast<int>(i)))) v[i] = {};
  return Polynomial(std::move(v));
}

Polynomial Polynomial::abs() const {
  std::vector<cplx> v(c_.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = std::abs(c_[i]);
  return Polynomial(std::move(v));
}

Polynomial Polynomial::conj() const {
  std::vector<cplx> v = c_;
  for (auto& x : v) x = std::conj(x);
  return Polynomial(std::move(v));
}

Polynomial Polynomial::pow(int k) const {
  Polynomial result(std::vector<cplx>{1.0});
  for (int i = 0; i < k; ++i) result = result * *this;
  return result;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& x : c_) m = std::max(m, std::abs(x));
  return m;
}

double Polynomial::magnitude(double r) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<cplx> v(std::max(a.c_.size(), b.c_.size()));
  for (size_t i = 0; i < a.c_.size(); ++i) v[i] += a.c_[i];
  for (size_t i = 0; i < b.c_.size(); ++i) v[i] += b.c_[i];
  return Polynomial(std::move(v));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> v(a.c_.size() + b.c_.size() - 1);
  for (size_t i = 0; i < a.c_.size(); ++i)
    for (size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(v));
}

Polynomial operator*(cplx s, const Polynomial& a) {
  std::vector<cplx> v = a.c_;
  for (auto& x : v) x *= s;
  return Polynomial(std::move(v));
}

// ---------------------------------------------------------------- RationalMap

RationalMap::RationalMap(Polynomial numerator, Polynomial denominator)
    : RationalMap(std::move(numerator), std::move(denominator), true) {}

RationalMap RationalMap::trusted(Polynomial numerator, Polynomial denominator) {
  return RationalMap(std::move(numerator), std::move(denominator), false);
}

RationalMap RationalMap::power(int k) {
  return RationalMap(Polynomial::monomial(k), Polynomial(std::vector<cplx>{1.0}));
}

RationalMap::RationalMap(Polynomial numerator, Polynomial denominator, bool check)
    : p_(std::move(numerator)), q_(std::move(denominator)) {
  if (q_.is_zero()) throw PreconditionError("rational map: zero denominator");
  if (p_.is_zero()) throw PreconditionError("rational map: constant map (zero numerator)");
  degree_ = std::max(p_.degree(), q_.degree());
  if (degree_ < 1) throw PreconditionError("rational map: degree must be at least 1");

  // Scale so the largest coefficient has modulus one.
  const double s = std::max(p_.max_abs_coefficient(), q_.max_abs_coefficient());
  p_ = cplx(1.0 / s) * p_;
  q_ = cplx(1.0 / s) * q_;

  if (check && p_.degree() >= 1 && q_.degree() >= 1) {
    const auto rp = polynomial_roots(p_);
    const auto rq = polynomial_roots(q_);
    for (const auto& a : rp)
      for (const auto& b : rq)
        if (std::abs(a.z - b.z) <= kCoprimeDistance)
          throw PreconditionError("rational map: numerator and denominator share a root");
  }
  p_rev_ = p_.reversed(degree_);
  q_rev_ = q_.reversed(degree_);
}

void RationalMap::chart_values(const SpherePoint& z, cplx& n, cplx& d, cplx& dn, cplx& dd,
                               cplx& u, bool& inverted) const {
  u = z.chart(inverted);
  if (inverted) {
    // f(1/w) = Prev(w) / Qrev(w)
    p_rev_.eval_with_derivative(u, n, dn);
    q_rev_.eval_with_derivative(u, d, dd);
  } else {
    p_.eval_with_derivative(u, n, dn);
    q_.eval_with_derivative(u, d, dd);
  }
}

ChartJet RationalMap::jet(const SpherePoint& z) const {
  cplx n, d, dn, dd, u;
  bool in_inv = false;
  chart_values(z, n, d, dn, dd, u, in_inv);
  ChartJet out;
  out.domain_inverted = in_inv;
  cplx v;
  if (std::abs(n) <= std::abs(d)) {
    v = n / d;
    out.derivative = (dn * d - n * dd) / (d * d);
    out.image = SpherePoint(v);
    out.image_inverted = false;
  } else {
    v = d / n;
    out.derivative = (dd * n - d * dn) / (n * n);
    out.image_inverted = true;
    out.image = (v == cplx{}) ? SpherePoint::infinity() : SpherePoint(1.0 / v);
  }
  out.spherical_derivative = std::abs(out.derivative) * (1.0 + std::norm(u)) / (1.0 + std::norm(v));
  return out;
}

SpherePoint RationalMap::operator()(const SpherePoint& z) const {
  bool inv = false;
  const cplx u = z.chart(inv);
  const cplx n = inv ? p_rev_(u) : p_(u);
  const cplx d = inv ? q_rev_(u) : q_(u);
  if (std::abs(n) <= std::abs(d)) return SpherePoint(n / d);
  const cplx v = d / n;
  if (v == cplx{}) return SpherePoint::infinity();
  return SpherePoint(1.0 / v);
}

cplx RationalMap::derivative(cplx z) const {
  cplx n, dn, d, dd;
  p_.eval_with_derivative(z, n, dn);
  q_.eval_with_derivative(z, d, dd);
  return (dn * d - n * dd) / (d * d);
}

cplx RationalMap::eval_finite(cplx z) const { return p_(z) / q_(z); }

// ------------------------------------------------------------ critical points

std::vector<CriticalPoint> critical_points(const RationalMap& f) {
  return critical_points(f, RootOptions{});
}

std::vector<CriticalPoint> critical_points(const RationalMap& f, const RootOptions& roots) {
  const int deg = f.degree();
  if (deg < 2) throw PreconditionError("critical_points: degree must be at least 2");
  const auto& p = f.numerator().coefficients();
  const auto& q = f.denominator().coefficients();

  // W_k = sum_{i+j=k+1} (i - j) p_i q_j; the i == j terms vanish exactly.
  std::vector<cplx> w(std::max<size_t>(1, p.size() + q.size()));
  std::vector<cplx> bound(w.size());
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = 0; j < q.size(); ++j) {
      if (i == j || i + j == 0) continue;
      const cplx term =
          static_cast<double>(static_cast<int>(i) - static_cast<int>(j)) * p[i] * q[j];
      w[i + j - 1] += term;
      bound[i + j - 1] += std::abs(term);
    }
  // Coefficients within rounding of their own term sum are cancellations.
  const Polynomial wronskian =
      Polynomial(std::move(w)).cancelled(Polynomial(std::move(bound)), kCancel);

  std::vector<CriticalPoint> out;
  int finite_count = 0;
  if (wronskian.degree() >= 1) {
    for (const Root& r : polynomial_roots(wronskian, roots)) {
      out.push_back({SpherePoint(r.z), r.multiplicity + 1});
      finite_count += r.multiplicity;
    }
  }
  const int at_infinity = 2 * deg - 2 - finite_count;
  if (at_infinity < 0) throw Error("critical_points: Wronskian degree exceeds 2d-2");
  if (at_infinity > 0) out.push_back({SpherePoint::infinity(), at_infinity + 1});
  return out;
}

std::vector<Preimage> preimages(const RationalMap& f, const SpherePoint& y) {
  const Polynomial& p = f.numerator();
  const Polynomial& q = f.denominator();
  Polynomial eq;
  Polynomial bound;
  if (y.is_finite() && std::abs(y.value()) <= 1.0) {
    eq = p - y.value() * q;
    bound = p.abs() + std::abs(y.value()) * q.abs();
  } else {
    const cplx v = y.is_infinity() ? cplx{} : 1.0 / y.value();
    eq = v * p - q;
    bound = std::abs(v) * p.abs() + q.abs();
  }
  eq = eq.cancelled(bound, kCancel);
  std::vector<Preimage> out;
  int finite_count = 0;
  if (eq.degree() >= 1) {
    for (const Root& r : polynomial_roots(eq)) {
      out.push_back({SpherePoint(r.z), r.multiplicity});
      finite_count += r.multiplicity;
    }
  }
  if (finite_count < f.degree()) out.push_back({SpherePoint::infinity(), f.degree() - finite_count});
  return out;
}

int local_degree(std::span<const CriticalPoint> critical, const SpherePoint& p) {
  for (const auto& c : critical)
    if (chordal_distance(c.point, p) < kCriticalMatch) return c.local_degree;
  return 1;
}

int local_degree(const RationalMap& f, const SpherePoint& p) {
  if (f.degree() < 2) return 1;
  const auto crit = critical_points(f);
  return local_degree(crit, p);
}

// ---------------------------------------------------------------- composition

namespace {

// sum_i c_i N^i D^(d-i)
Polynomial homogeneous_substitute(const Polynomial& c, int d, const Polynomial& n,
                                  const Polynomial& den) {
  Polynomial acc;
  std::vector<Polynomial> npow{Polynomial(std::vector<cplx>{1.0})};
  std::vector<Polynomial> dpow{Polynomial(std::vector<cplx>{1.0})};
  for (int i = 1; i <= d; ++i) {
    npow.push_back(npow.back() * n);
    dpow.push_back(dpow.back() * den);
  }
  for (int i = 0; i <= c.degree(); ++i) {
    if (c.coefficient(i) == cplx{}) continue;
    acc = acc + c.coefficient(i) * (npow[i] * dpow[d - i]);
  }
  return acc;
}

}  // namespace

RationalMap compose(const RationalMap& f, const RationalMap& g) {
  const int d = f.degree();
  const Polynomial& gn = g.numerator();
  const Polynomial& gd = g.denominator();
  const Polynomial num = homogeneous_substitute(f.numerator(), d, gn, gd);
  const Polynomial den = homogeneous_substitute(f.denominator(), d, gn, gd);
  const Polynomial num_bound = homogeneous_substitute(f.numerator().abs(), d, gn.abs(), gd.abs());
  const Polynomial den_bound =
      homogeneous_substitute(f.denominator().abs(), d, gn.abs(), gd.abs());
  return RationalMap::trusted(num.cancelled(num_bound, kCancel),
                              den.cancelled(den_bound, kCancel));
}

RationalMap iterate(const RationalMap& f, int n) {
  if (n < 1) throw PreconditionError("iterate: n must be positive");
  RationalMap out = f;
  for (int i = 1; i < n; ++i) out = compose(f, out);
  return out;
}

RationalMap conjugate(const RationalMap& f, const MoebiusMap& m) {
  // For m(z) = M(conj z): m o f o m^{-1} = M o fbar o M^{-1}.
  const RationalMap base =
      m.orientation_reversing()
          ? RationalMap::trusted(f.numerator().conj(), f.denominator().conj())
          : f;
  const MoebiusMap inv = MoebiusMap(m.a(), m.b(), m.c(), m.d()).inverse();
  const RationalMap minv = RationalMap::trusted(Polynomial({inv.b(), inv.a()}),
                                                Polynomial({inv.d(), inv.c()}));
  const RationalMap inner = compose(base, minv);
  const RationalMap outer = RationalMap::trusted(Polynomial({m.b(), m.a()}),
                                                 Polynomial({m.d(), m.c()}));
  return compose(outer, inner);
}

// ---------------------------------------------------------------- MoebiusMap

MoebiusMap::MoebiusMap(cplx a, cplx b, cplx c, cplx d, bool conjugate_first)
    : m_{a, b, c, d}, conj_(conjugate_first) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  if (!(scale > 0.0) || std::abs(determinant()) <= 1e-14 * scale * scale)
    throw PreconditionError("moebius: singular matrix");
}

MoebiusMap MoebiusMap::identity() { return MoebiusMap(1.0, 0.0, 0.0, 1.0); }
MoebiusMap MoebiusMap::conjugation() { return MoebiusMap(1.0, 0.0, 0.0, 1.0, true); }

SpherePoint MoebiusMap::operator()(const SpherePoint& zin) const {
  const SpherePoint z = conj_ ? zin.conj() : zin;
  const auto& [a, b, c, d] = m_;
  bool inv = false;
  const cplx u = z.chart(inv);
  cplx num, den;
  if (inv) {
    num = a + b * u;  // (a z + b)/(c z + d) with z = 1/u
    den = c + d * u;
  } else {
    num = a * u + b;
    den = c * u + d;
  }
  if (den == cplx{}) return SpherePoint::infinity();
  return SpherePoint(num / den);
}

MoebiusMap MoebiusMap::compose(const MoebiusMap& inner) const {
  std::array<cplx, 4> n = inner.m_;
  if (conj_)
    for (auto& x : n) x = std::conj(x);
  const auto& m = m_;
  return MoebiusMap(m[0] * n[0] + m[1] * n[2], m[0] * n[1] + m[1] * n[3],
                    m[2] * n[0] + m[3] * n[2], m[2] * n[1] + m[3] * n[3],
                    conj_ != inner.conj_);
}

MoebiusMap MoebiusMap::inverse() const {
  // m(z) = M(conj^s z)  =>  m^{-1}(w) = conj^s(M^{-1} w) = (conj^s M^{-1})(conj^s w)
  std::array<cplx, 4> n{m_[3], -m_[1], -m_[2], m_[0]};
  if (conj_)
    for (auto& x : n) x = std::conj(x);
  return MoebiusMap(n[0], n[1], n[2], n[3], conj_);
}

MoebiusMap MoebiusMap::normalized() const {
  const cplx s = std::sqrt(determinant());
  std::array<cplx, 4> n = m_;
  for (auto& x : n) x /= s;
  double mx = 0.0;
  for (const auto& x : n) mx = std::max(mx, std::abs(x));
  for (const auto& x : n) {
    if (std::abs(x) > 1e-9 * mx) {
      // det stays 1 under a sign flip only, so fix the half plane
      if (x.real() < 0.0 || (x.real() == 0.0 && x.imag() < 0.0))
        for (auto& y : n) y = -y;
      break;
    }
  }
  return MoebiusMap(n[0], n[1], n[2], n[3], conj_);
}

double moebius_distance(const MoebiusMap& x, const MoebiusMap& y) {
  if (x.orientation_reversing() != y.orientation_reversing())
    return std::numeric_limits<double>::infinity();
  auto unit = [](const std::array<cplx, 4>& m) {
    double n = 0.0;
    for (const auto& v : m) n += std::norm(v);
    n = std::sqrt(n);
    std::array<cplx, 4> out = m;
    for (auto& v : out) v /= n;
    return out;
  };
  const auto a = unit(x.matrix());
  const auto b = unit(y.matrix());
  cplx inner{};
  for (int i = 0; i < 4; ++i) inner += std::conj(b[i]) * a[i];
  const cplx phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cplx(1.0);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += std::norm(a[i] - phase * b[i]);
  return std::sqrt(acc);
}

namespace {

// Sends (z1, z2, z3) to (0, inf, 1).
std::array<cplx, 4> cross_ratio_matrix(const std::array<SpherePoint, 3>& z) {
  const bool i1 = z[0].is_infinity(), i2 = z[1].is_infinity(), i3 = z[2].is_infinity();
  const cplx z1 = z[0].value(), z2 = z[1].value(), z3 = z[2].value();
  if (i1) return {0.0, z3 - z2, 1.0, -z2};
  if (i2) return {1.0, -z1, 0.0, z3 - z1};
  if (i3) return {1.0, -z1, 1.0, -z2};
  return {z3 - z2, -z1 * (z3 - z2), z3 - z1, -z2 * (z3 - z1)};
}

}  // namespace

MoebiusMap MoebiusMap::from_triples(const std::array<SpherePoint, 3>& src,
                                    const std::array<SpherePoint, 3>& dst,
                                    bool orientation_reversing) {
  std::array<SpherePoint, 3> s = src;
  if (orientation_reversing)
    for (auto& p : s) p = p.conj();
  const auto ms = cross_ratio_matrix(s);
  const auto md = cross_ratio_matrix(dst);
  const MoebiusMap a(ms[0], ms[1], ms[2], ms[3]);
  const MoebiusMap b(md[0], md[1], md[2], md[3]);
  const MoebiusMap core = b.inverse() * a;
  return MoebiusMap(core.a(), core.b(), core.c(), core.d(), orientation_reversing);
}

MoebiusMap fit_moebius(std::span<const SpherePoint> src, std::span<const SpherePoint> dst,
                       bool orientation_reversing) {
  if (src.size() != dst.size() || src.size() < 3)
    throw PreconditionError("fit_moebius: need at least three matched pairs");
  Eigen::MatrixXcd rows(static_cast<Eigen::Index>(src.size()), 4);
  for (size_t i = 0; i < src.size(); ++i) {
    const SpherePoint s = orientation_reversing ? src[i].conj() : src[i];
    const SpherePoint& t = dst[i];
    Eigen::Vector4cd r;
    // a s + b - t (c s + d) = 0, rewritten when either side is infinite.
    if (s.is_infinity() && t.is_infinity()) {
      r << 0.0, 0.0, 1.0, 0.0;
    } else if (s.is_infinity()) {
      r << 1.0, 0.0, -t.value(), 0.0;
    } else if (t.is_infinity()) {
      r << 0.0, 0.0, s.value(), 1.0;
    } else {
      r << s.value(), 1.0, -t.value() * s.value(), -t.value();
    }
    r /= r.norm();
    rows.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rows, Eigen::ComputeFullV);
  const Eigen::Vector4cd v = svd.matrixV().col(3);
  return MoebiusMap(v(0), v(1), v(2), v(3), orientation_reversing);
}

}  // namespace carpet
