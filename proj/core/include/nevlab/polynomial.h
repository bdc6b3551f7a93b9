#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace nevlab {

/// Dense complex polynomial, coefficients in ascending order. The zero
/// polynomial has no coefficients; otherwise the leading one is non-zero.
class Polynomial {
 public:
  using Complex = std::complex<double>;

  Polynomial() = default;
  Polynomial(std::initializer_list<Complex> ascending) : Polynomial(std::vector<Complex>(ascending)) {}
  explicit Polynomial(std::vector<Complex> ascending);

  static Polynomial constant(Complex c) { return Polynomial({c}); }
  /// z^n.
  static Polynomial monomial(int n, Complex c = 1.0);

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }
  const std::vector<Complex>& coefficients() const { return c_; }
  Complex coefficient(int k) const { return k >= 0 && k <= degree() ? c_[static_cast<std::size_t>(k)] : Complex{}; }
  Complex leading() const { return c_.empty() ? Complex{} : c_.back(); }

  Complex operator()(Complex z) const;
  /// p(w) / max(1, |w|)^scale_degree, evaluated without overflow for large |w|.
  /// scale_degree must be >= degree().
  Complex scaled(Complex w, int scale_degree) const;

  Polynomial derivative() const;
  /// w * p(w).
  Polynomial shifted_up() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Complex s, const Polynomial& p);
  Polynomial pow(int e) const;

 private:
  void trim();
  std::vector<Complex> c_;
};

struct Root {
  std::complex<double> value;
  int multiplicity = 1;
};

/// Roots with multiplicity: eigenvalues of the companion matrix, grouped when
/// they agree to a relative 1e-4 (multiple roots split into clusters of that
/// size), each group centred and polished by Newton on the multiplicity-aware
/// iteration. Throws Error(degenerate_input) for the zero polynomial.
std::vector<Root> find_roots(const Polynomial& p);

/// |resultant(p, q)| proxy: min over roots of q of |p(root)| relative to the
/// size of p there. Zero means a common root.
double coprimality(const Polynomial& p, const Polynomial& q);

}  // namespace nevlab
