#include "nevlab/polynomial.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "nevlab/errors.h"

namespace nevlab {

using Complex = std::complex<double>;

Polynomial::Polynomial(std::vector<Complex> ascending) : c_(std::move(ascending)) { trim(); }

Polynomial Polynomial::monomial(int n, Complex c) {
  std::vector<Complex> v(static_cast<std::size_t>(n) + 1, Complex{});
  v.back() = c;
  return Polynomial(std::move(v));
}

void Polynomial::trim() {
  while (!c_.empty() && c_.back() == Complex{}) c_.pop_back();
}

Complex Polynomial::operator()(Complex z) const {
  Complex acc{};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Complex Polynomial::scaled(Complex w, int scale_degree) const {
  const double m = std::abs(w);
  if (m <= 1.0) return (*this)(w);
  if (c_.empty()) return {};
  // p(w) / w^n by Horner in 1/w, then times (w/|w|)^n |w|^(n - D).
  const Complex inv = 1.0 / w;
  Complex acc{};
  for (const Complex& c : c_) acc = acc * inv + c;
  const int n = degree();
  const double log_m = std::log(m);
  return acc * std::polar(std::exp((n - scale_degree) * log_m), n * std::arg(w));
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<Complex> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::shifted_up() const {
  if (c_.empty()) return {};
  std::vector<Complex> d(c_.size() + 1, Complex{});
  std::copy(c_.begin(), c_.end(), d.begin() + 1);
  return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()), Complex{});
  for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Complex(-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.c_.empty() || b.c_.empty()) return {};
  std::vector<Complex> c(a.c_.size() + b.c_.size() - 1, Complex{});
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(Complex s, const Polynomial& p) {
  std::vector<Complex> c = p.c_;
  for (auto& x : c) x *= s;
  return Polynomial(std::move(c));
}

Polynomial Polynomial::pow(int e) const {
  Polynomial out = constant(1.0);
  for (int i = 0; i < e; ++i) out = out * *this;
  return out;
}

std::vector<Root> find_roots(const Polynomial& p) {
  if (p.is_zero()) throw Error(Errc::degenerate_input, "roots of the zero polynomial");
  const int n = p.degree();
  std::vector<Root> out;
  if (n == 0) return out;

  // Roots at the origin are split off exactly.
  int zeros = 0;
  while (p.coefficient(zeros) == Complex{}) ++zeros;
  std::vector<Complex> values;
  const int m = n - zeros;
  if (m == 1) {
    values.push_back(-p.coefficient(zeros) / p.coefficient(zeros + 1));
  } else if (m > 1) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i) companion(i, m - 1) = -p.coefficient(zeros + i) / p.leading();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success)
      throw Error(Errc::root_finding, "companion eigenvalue iteration failed");
    for (int i = 0; i < m; ++i) values.push_back(solver.eigenvalues()(i));
  }

  // Cluster near-coincident eigenvalues into multiple roots.
  std::vector<bool> used(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (used[i]) continue;
    Complex sum = values[i];
    int count = 1;
    used[i] = true;
    const double tol = 1e-4 * std::max(1.0, std::abs(values[i]));
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (!used[j] && std::abs(values[j] - values[i]) < tol) {
        used[j] = true;
        sum += values[j];
        ++count;
      }
    }
    Complex z = sum / static_cast<double>(count);
    // A root of multiplicity count is a simple root of p^(count-1).
    Polynomial dk = p;
    for (int k = 1; k < count; ++k) dk = dk.derivative();
    const Polynomial dk1 = dk.derivative();
    for (int it = 0; it < 8; ++it) {
      const Complex num = dk(z), den = dk1(z);
      if (den == Complex{}) break;
      const Complex step = num / den;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    out.push_back({z, count});
  }
  if (zeros > 0) out.push_back({Complex{}, zeros});
  return out;
}

double coprimality(const Polynomial& p, const Polynomial& q) {
  if (q.degree() <= 0) return 1.0;
  double worst = 1.0;
  double size = 0.0;
  for (const Complex& c : p.coefficients()) size = std::max(size, std::abs(c));
  for (const Root& root : find_roots(q)) {
    const double scale = size * std::pow(std::max(1.0, std::abs(root.value)), p.degree());
    worst = std::min(worst, std::abs(p(root.value)) / scale);
  }
  return worst;
}

}  // namespace nevlab
