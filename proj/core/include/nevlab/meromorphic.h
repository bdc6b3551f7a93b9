#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "nevlab/polynomial.h"

namespace nevlab {

using Complex = std::complex<double>;

/// Point [w0 : w1] of the projective line; the affine value is w1 / w0.
struct ProjectivePoint {
  Complex w0{1.0, 0.0};
  Complex w1{0.0, 0.0};

  static ProjectivePoint finite(Complex a) { return {Complex{1.0, 0.0}, a}; }
  static ProjectivePoint infinity() { return {Complex{0.0, 0.0}, Complex{1.0, 0.0}}; }
  bool is_infinity() const { return w0 == Complex{}; }
  Complex value() const;
  /// "inf", or "re+imi" with %.17g parts.
  std::string label() const;
  static ProjectivePoint parse_label(const std::string& label);

  friend bool operator==(const ProjectivePoint& a, const ProjectivePoint& b) {
    return a.w0 * b.w1 == a.w1 * b.w0;
  }
};

/// Value and z-derivative of the homogeneous pair (psi0, psi1) at a point,
/// all four divided by exp(log_scale) so that large exponentials stay finite.
struct Jet {
  Complex f0, f1, d0, d1;
  double log_scale = 0.0;
};

struct Preimage {
  Complex z;
  int multiplicity = 1;
};

enum class InnerMap { affine, exponential };

/// psi(z) = R(w(z)) with R(w) = P(w) / Q(w)^e and inner map w = a z + b or
/// w = exp(a z + b). The homogeneous pair is (Q(w)^e, P(w)); P and Q are
/// coprime and Q is squarefree, so the pair has no common zeros and every
/// derivative stays in the same family with the same Q.
class MeromorphicMap {
 public:
  static MeromorphicMap rational(Polynomial p, Polynomial q, std::string name = "rational");
  static MeromorphicMap exp_composite(Polynomial p, Polynomial q, Complex a, Complex b,
                                      std::string name = "exp_composite");
  static MeromorphicMap constant(Complex c);

  /// z -> psi(z + z0).
  MeromorphicMap shifted(Complex z0) const;
  /// k-th derivative d^k psi / dz^k.
  MeromorphicMap derivative(int k = 1) const;

  const std::string& name() const { return name_; }
  InnerMap inner() const { return inner_; }
  Complex inner_scale() const { return a_; }
  Complex inner_offset() const { return b_; }
  const Polynomial& numerator() const { return p_; }
  const Polynomial& denominator_base() const { return q_; }
  int denominator_power() const { return e_; }
  bool is_constant() const { return constant_; }

  Jet jet(Complex z) const;
  Complex value(Complex z) const;  // complex infinity at poles
  ProjectivePoint point(Complex z) const;
  /// log|psi|, -inf at zeros and +inf at poles.
  double log_modulus(Complex z) const;
  /// log sqrt(|psi0|^2 + |psi1|^2) of the unscaled pair.
  double log_norm(Complex z) const;
  /// |psi'|^2 / (1 + |psi|^2)^2 in the z chart.
  double spherical_density(Complex z) const;
  /// log 1/||psi(z), a||, chordal distance on the unit-diameter sphere.
  double log_weil(Complex z, const ProjectivePoint& a) const;

  /// Preimages of a with |z| < modulus, with multiplicity. Throws
  /// Error(degenerate_input) when psi is identically a.
  std::vector<Preimage> preimages(const ProjectivePoint& a, double modulus) const;
  /// Number of zeros of a0 psi1 - a1 psi0 inside |z| < modulus by the argument
  /// principle. The circle must avoid those zeros.
  int winding_count(const ProjectivePoint& a, double modulus) const;
  /// Preimages with the locator count checked against the winding count on a
  /// circle just outside `modulus`; on mismatch the argument-principle quadtree
  /// is used instead and a persisting mismatch raises Error(root_finding).
  std::vector<Preimage> validated_preimages(const ProjectivePoint& a, double modulus) const;

 private:
  MeromorphicMap() = default;
  Polynomial target_polynomial(const ProjectivePoint& a) const;
  std::vector<Preimage> quadtree_preimages(const ProjectivePoint& a, double modulus) const;

  std::string name_;
  InnerMap inner_ = InnerMap::affine;
  Complex a_{1.0, 0.0}, b_{0.0, 0.0};
  Polynomial p_, q_;
  int e_ = 0;
  int scale_degree_ = 0;
  bool constant_ = false;
};

struct CatalogEntry {
  std::string name;
  std::string description;
};

/// Built-in maps, sorted by name.
std::vector<CatalogEntry> map_catalog();
/// Catalog map by name, optionally pre-composed with z -> z + shift.
MeromorphicMap catalog_map(const std::string& name, Complex shift = {});

}  // namespace nevlab
