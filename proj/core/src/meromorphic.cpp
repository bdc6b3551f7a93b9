#include "nevlab/meromorphic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <regex>

#include "nevlab/errors.h"

namespace nevlab {
namespace {

constexpr double kPi = std::numbers::pi;

Polynomial w_times(const Polynomial& p) { return p.shifted_up(); }

// Net change of arg F along the polyline through `nodes`, each edge refined
// until consecutive samples differ in phase by less than 0.5 rad.
double phase_change(const std::function<Complex(Complex)>& f, const std::vector<Complex>& nodes) {
  double total = 0.0;
  std::function<double(Complex, Complex, Complex, Complex, int)> edge =
      [&](Complex za, Complex zb, Complex fa, Complex fb, int depth) -> double {
    const double d = std::arg(fb / fa);
    if (std::abs(d) < 0.5) return d;
    if (depth > 40 || std::abs(zb - za) < 1e-13 * std::max(1.0, std::abs(za)))
      throw Error(Errc::root_finding, "argument principle contour passes through a root");
    const Complex zm = 0.5 * (za + zb);
    const Complex fm = f(zm);
    if (fm == Complex{}) throw Error(Errc::root_finding, "root on the argument principle contour");
    return edge(za, zm, fa, fm, depth + 1) + edge(zm, zb, fm, fb, depth + 1);
  };
  std::vector<Complex> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    values[i] = f(nodes[i]);
    if (values[i] == Complex{}) throw Error(Errc::root_finding, "root on the argument principle contour");
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    total += edge(nodes[i], nodes[i + 1], values[i], values[i + 1], 0);
  return total;
}

int winding_from_phase(double phase) {
  const double turns = phase / (2 * kPi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 0.05)
    throw Error(Errc::root_finding, "argument principle phase is not a whole number of turns");
  return static_cast<int>(rounded);
}

}  // namespace

// ---------------------------------------------------------------------------
// ProjectivePoint

Complex ProjectivePoint::value() const {
  if (is_infinity()) return {std::numeric_limits<double>::infinity(), 0.0};
  return w1 / w0;
}

std::string ProjectivePoint::label() const {
  if (is_infinity()) return "inf";
  const Complex v = value();
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", v.real(), v.imag());
  return buf;
}

ProjectivePoint ProjectivePoint::parse_label(const std::string& label) {
  if (label == "inf") return infinity();
  static const std::regex pattern(R"(^([-+]?[0-9.eE+-]*?[0-9.])([-+][0-9.eE+-]*)i$)");
  std::smatch m;
  if (std::regex_match(label, m, pattern)) {
    try {
      return finite({std::stod(m[1].str()), std::stod(m[2].str())});
    } catch (const std::exception&) {
    }
  }
  try {
    std::size_t used = 0;
    const double re = std::stod(label, &used);
    if (used == label.size()) return finite({re, 0.0});
  } catch (const std::exception&) {
  }
  throw Error(Errc::invalid_configuration, "cannot parse target '" + label + "'");
}

// ---------------------------------------------------------------------------
// Construction

MeromorphicMap MeromorphicMap::rational(Polynomial p, Polynomial q, std::string name) {
  MeromorphicMap m;
  m.name_ = std::move(name);
  m.inner_ = InnerMap::affine;
  if (q.is_zero()) throw Error(Errc::degenerate_input, "zero denominator");
  if (q.degree() == 0) {
    p = Complex(1.0) / q.leading() * p;
    q = Polynomial::constant(1.0);
    m.e_ = 0;
  } else {
    m.e_ = 1;
    if (coprimality(p, q) < 1e-12)
      throw Error(Errc::degenerate_input, "numerator and denominator share a root");
    for (const Root& root : find_roots(q))
      if (root.multiplicity > 1) throw Error(Errc::degenerate_input, "denominator must be squarefree");
  }
  m.p_ = std::move(p);
  m.q_ = std::move(q);
  m.scale_degree_ = std::max({0, m.p_.degree(), m.e_ * m.q_.degree()});
  const Polynomial dn = m.e_ == 0 ? m.p_.derivative()
                                  : m.p_.derivative() * m.q_ - Complex(m.e_) * m.p_ * m.q_.derivative();
  m.constant_ = dn.is_zero();
  return m;
}

MeromorphicMap MeromorphicMap::exp_composite(Polynomial p, Polynomial q, Complex a, Complex b,
                                             std::string name) {
  if (a == Complex{}) throw Error(Errc::degenerate_input, "exponential inner map needs a != 0");
  if (q.degree() > 0 && q(Complex{}) == Complex{})
    throw Error(Errc::degenerate_input, "exponential composite: Q(0) = 0 (use a negative scale instead)");
  MeromorphicMap m = rational(std::move(p), std::move(q), std::move(name));
  m.inner_ = InnerMap::exponential;
  m.a_ = a;
  m.b_ = b;
  return m;
}

MeromorphicMap MeromorphicMap::constant(Complex c) {
  return rational(Polynomial::constant(c), Polynomial::constant(1.0), "constant");
}

MeromorphicMap MeromorphicMap::shifted(Complex z0) const {
  MeromorphicMap m = *this;
  m.b_ = b_ + a_ * z0;
  return m;
}

MeromorphicMap MeromorphicMap::derivative(int k) const {
  if (k < 0) throw Error(Errc::invalid_configuration, "negative derivative order");
  MeromorphicMap m = *this;
  for (int i = 0; i < k; ++i) {
    const Polynomial n = m.e_ == 0 ? m.p_.derivative()
                                   : m.p_.derivative() * m.q_ - Complex(m.e_) * m.p_ * m.q_.derivative();
    m.p_ = m.inner_ == InnerMap::affine ? m.a_ * n : m.a_ * w_times(n);
    if (m.e_ > 0) ++m.e_;
    m.scale_degree_ = std::max({0, m.p_.degree(), m.e_ * m.q_.degree()});
    const Polynomial dn = m.e_ == 0 ? m.p_.derivative()
                                    : m.p_.derivative() * m.q_ - Complex(m.e_) * m.p_ * m.q_.derivative();
    m.constant_ = dn.is_zero();
    m.name_ += "'";
  }
  return m;
}

// ---------------------------------------------------------------------------
// Evaluation

Jet MeromorphicMap::jet(Complex z) const {
  const Complex arg = a_ * z + b_;
  Complex w, dw_factor;  // dw/dz = dw_factor (affine) or dw_factor * w (exponential)
  if (inner_ == InnerMap::affine) {
    w = arg;
  } else {
    if (arg.real() > 700.0 || !std::isfinite(arg.real()))
      throw Error(Errc::range, "exponential inner map overflows");
    w = std::exp(arg);
  }
  dw_factor = a_;
  const double mod = std::abs(w);
  const double log_big = mod > 1.0 ? std::log(mod) : 0.0;
  const int D = scale_degree_;
  const int dq = std::max(0, q_.degree());

  Jet j;
  j.log_scale = D * log_big;
  // psi1 = P(w), psi1' = P'(w) w'.
  j.f1 = p_.scaled(w, D);
  if (inner_ == InnerMap::affine) {
    j.d1 = dw_factor * p_.derivative().scaled(w, D);
  } else {
    j.d1 = dw_factor * w_times(p_.derivative()).scaled(w, D);
  }
  if (e_ == 0) {
    j.f0 = std::exp(-j.log_scale);
    j.d0 = 0.0;
    return j;
  }
  // psi0 = Q(w)^e, psi0' = e Q^(e-1) Q'(w) w'.
  const double rescale = std::exp((e_ * dq - D) * log_big);
  const Complex qs = q_.scaled(w, dq);
  const Complex dqs = inner_ == InnerMap::affine ? dw_factor * q_.derivative().scaled(w, dq)
                                                 : dw_factor * w_times(q_.derivative()).scaled(w, dq);
  Complex qpow = 1.0;
  for (int i = 0; i < e_ - 1; ++i) qpow *= qs;
  j.f0 = qpow * qs * rescale;
  j.d0 = Complex(e_) * qpow * dqs * rescale;
  return j;
}

Complex MeromorphicMap::value(Complex z) const {
  const Jet j = jet(z);
  if (j.f0 == Complex{}) return {std::numeric_limits<double>::infinity(), 0.0};
  return j.f1 / j.f0;
}

ProjectivePoint MeromorphicMap::point(Complex z) const {
  const Jet j = jet(z);
  return {j.f0, j.f1};
}

double MeromorphicMap::log_modulus(Complex z) const {
  const Jet j = jet(z);
  return std::log(std::abs(j.f1)) - std::log(std::abs(j.f0));
}

double MeromorphicMap::log_norm(Complex z) const {
  const Jet j = jet(z);
  return 0.5 * std::log(std::norm(j.f0) + std::norm(j.f1)) + j.log_scale;
}

double MeromorphicMap::spherical_density(Complex z) const {
  if (constant_) return 0.0;
  const Jet j = jet(z);
  const double n = std::norm(j.f0) + std::norm(j.f1);
  return std::norm(j.f0 * j.d1 - j.f1 * j.d0) / (n * n);
}

double MeromorphicMap::log_weil(Complex z, const ProjectivePoint& a) const {
  const Jet j = jet(z);
  const double na = 0.5 * std::log(std::norm(a.w0) + std::norm(a.w1));
  const double npsi = 0.5 * std::log(std::norm(j.f0) + std::norm(j.f1));
  return npsi + na - std::log(std::abs(a.w0 * j.f1 - a.w1 * j.f0));
}

// ---------------------------------------------------------------------------
// Preimages

Polynomial MeromorphicMap::target_polynomial(const ProjectivePoint& a) const {
  // a0 P(w) - a1 Q(w)^e: its roots in w are the preimages of a.
  return a.w0 * p_ - a.w1 * q_.pow(e_);
}

std::vector<Preimage> MeromorphicMap::preimages(const ProjectivePoint& a, double modulus) const {
  const Polynomial f = target_polynomial(a);
  if (f.is_zero()) throw Error(Errc::degenerate_input, "map is identically equal to the target");
  std::vector<Preimage> out;
  if (f.degree() <= 0) return out;
  for (const Root& root : find_roots(f)) {
    if (inner_ == InnerMap::affine) {
      const Complex z = (root.value - b_) / a_;
      if (std::abs(z) < modulus) out.push_back({z, root.multiplicity});
      continue;
    }
    if (std::abs(root.value) == 0.0) continue;  // exp never vanishes
    // z_k = z_0 + k v with v = 2 pi i / a.
    const Complex z0 = (std::log(root.value) - b_) / a_;
    const Complex v = Complex(0.0, 2 * kPi) / a_;
    const double vv = std::norm(v);
    const double half_b = (z0 * std::conj(v)).real();
    const double c = std::norm(z0) - modulus * modulus;
    const double disc = half_b * half_b - vv * c;
    if (disc < 0.0) continue;
    const double kmin = std::ceil((-half_b - std::sqrt(disc)) / vv);
    const double kmax = std::floor((-half_b + std::sqrt(disc)) / vv);
    for (double k = kmin; k <= kmax; k += 1.0) {
      const Complex z = z0 + k * v;
      if (std::abs(z) < modulus) out.push_back({z, root.multiplicity});
    }
  }
  std::sort(out.begin(), out.end(), [](const Preimage& x, const Preimage& y) {
    return std::abs(x.z) < std::abs(y.z);
  });
  return out;
}

int MeromorphicMap::winding_count(const ProjectivePoint& a, double modulus) const {
  auto f = [&](Complex z) {
    const Jet j = jet(z);
    return a.w0 * j.f1 - a.w1 * j.f0;
  };
  const int n = 512;
  std::vector<Complex> nodes(n + 1);
  for (int i = 0; i <= n; ++i) nodes[static_cast<std::size_t>(i)] = std::polar(modulus, 2 * kPi * i / n);
  return winding_from_phase(phase_change(f, nodes));
}

std::vector<Preimage> MeromorphicMap::quadtree_preimages(const ProjectivePoint& a, double modulus) const {
  auto f = [&](Complex z) {
    const Jet j = jet(z);
    return a.w0 * j.f1 - a.w1 * j.f0;
  };
  auto fprime_ratio = [&](Complex z) {
    const Jet j = jet(z);
    return (a.w0 * j.f1 - a.w1 * j.f0) / (a.w0 * j.d1 - a.w1 * j.d0);
  };
  std::vector<Preimage> out;
  const double min_side = 1e-6 * std::max(1.0, modulus);
  std::function<void(Complex, double)> visit = [&](Complex lo, double side) {
    const std::vector<Complex> square{lo, lo + side, lo + Complex(side, side), lo + Complex(0.0, side), lo};
    const int count = winding_from_phase(phase_change(f, square));
    if (count <= 0) return;
    if (side < min_side) {
      Complex z = lo + Complex(0.5 * side, 0.5 * side);
      for (int it = 0; it < 20; ++it) {
        const Complex step = static_cast<double>(count) * fprime_ratio(z);
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        z -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
      }
      if (std::abs(z) < modulus) out.push_back({z, count});
      return;
    }
    const double h = 0.5 * side;
    visit(lo, h);
    visit(lo + h, h);
    visit(lo + Complex(0.0, h), h);
    visit(lo + Complex(h, h), h);
  };
  // Slightly irrational extent so that square edges avoid lattice-aligned roots.
  const double half = modulus * 1.000123 + 1e-9;
  visit(Complex(-half, -half * 0.999877), 2 * half);
  return out;
}

std::vector<Preimage> MeromorphicMap::validated_preimages(const ProjectivePoint& a,
                                                          double modulus) const {
  const std::vector<Preimage> wide = preimages(a, modulus * 1.01 + 1e-9);
  // Validation circle just outside `modulus`, kept clear of every root.
  double check = modulus;
  for (int attempt = 1; attempt <= 20; ++attempt) {
    check = modulus * (1.0 + 2.5e-4 * attempt);
    const bool clear = std::none_of(wide.begin(), wide.end(), [&](const Preimage& p) {
      return std::abs(std::abs(p.z) - check) < 1e-6 * modulus;
    });
    if (clear) break;
  }
  int located = 0;
  for (const Preimage& p : wide)
    if (std::abs(p.z) < check) located += p.multiplicity;
  const int wound = winding_count(a, check);

  std::vector<Preimage> out;
  if (located == wound) {
    for (const Preimage& p : wide)
      if (std::abs(p.z) < modulus) out.push_back(p);
    return out;
  }
  out = quadtree_preimages(a, modulus);
  int found = 0;
  for (const Preimage& p : out) found += p.multiplicity;
  if (found != winding_count(a, modulus))
    throw Error(Errc::root_finding, "preimage count disagrees with the argument principle");
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

std::vector<CatalogEntry> map_catalog() {
  std::vector<CatalogEntry> c{
      {"constant", "psi = 2"},
      {"exp", "psi = e^z"},
      {"mobius", "psi = (z - 1/2) / (1 - z/2), disc automorphism"},
      {"rational3", "psi = (z^3 + 3z - 2) / (4z^2 - 1), degree 3, psi(0) = 2"},
      {"tan", "psi = tan z = -i (e^{2iz} - 1) / (e^{2iz} + 1)"},
      {"z", "psi = z"},
      {"z2", "psi = z^2"},
      {"z2m1", "psi = z^2 - 1"},
  };
  std::sort(c.begin(), c.end(), [](const auto& x, const auto& y) { return x.name < y.name; });
  return c;
}

MeromorphicMap catalog_map(const std::string& name, Complex shift) {
  const Polynomial one = Polynomial::constant(1.0);
  MeromorphicMap m = [&] {
    if (name == "constant") return MeromorphicMap::constant(2.0);
    if (name == "exp")
      return MeromorphicMap::exp_composite(Polynomial{0.0, 1.0}, one, 1.0, 0.0, "exp");
    if (name == "mobius")
      return MeromorphicMap::rational(Polynomial{-0.5, 1.0}, Polynomial{1.0, -0.5}, "mobius");
    if (name == "rational3")
      return MeromorphicMap::rational(Polynomial{-2.0, 3.0, 0.0, 1.0}, Polynomial{-1.0, 0.0, 4.0},
                                      "rational3");
    if (name == "tan")
      return MeromorphicMap::exp_composite(Polynomial{Complex(0, 1), Complex(0, -1)},
                                           Polynomial{1.0, 1.0}, Complex(0, 2), 0.0, "tan");
    if (name == "z") return MeromorphicMap::rational(Polynomial{0.0, 1.0}, one, "z");
    if (name == "z2") return MeromorphicMap::rational(Polynomial{0.0, 0.0, 1.0}, one, "z2");
    if (name == "z2m1") return MeromorphicMap::rational(Polynomial{-1.0, 0.0, 1.0}, one, "z2m1");
    throw Error(Errc::invalid_configuration, "unknown map '" + name + "'");
  }();
  return shift == Complex{} ? m : m.shifted(shift);
}

}  // namespace nevlab
