#include "nevlab/quadrature.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nevlab/errors.h"

namespace nevlab {
namespace {

struct Rule {
  std::array<double, 8> x{};   // Kronrod abscissae, x[0] = 0
  std::array<double, 8> wk{};  // Kronrod weights
  std::array<double, 4> wg{};  // Gauss weights for x[0], x[2], x[4], x[6]
};

const Rule& gk15() {
  static const Rule rule = [] {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    Rule r;
    const auto& ka = gauss_kronrod<double, 15>::abscissa();
    const auto& kw = gauss_kronrod<double, 15>::weights();
    const auto& gw = gauss<double, 7>::weights();
    std::copy(ka.begin(), ka.end(), r.x.begin());
    std::copy(kw.begin(), kw.end(), r.wk.begin());
    std::copy(gw.begin(), gw.end(), r.wg.begin());
    return r;
  }();
  return rule;
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment apply_rule(FunctionRef<double(double)> f, double a, double b) {
  const Rule& r = gk15();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double kron = f0 * r.wk[0];
  double gauss = f0 * r.wg[0];
  for (int i = 1; i < 8; ++i) {
    const double fp = f(c + h * r.x[i]);
    const double fm = f(c - h * r.x[i]);
    kron += (fp + fm) * r.wk[i];
    if (i % 2 == 0) gauss += (fp + fm) * r.wg[i / 2];
  }
  kron *= h;
  gauss *= h;
  double err = std::abs(kron - gauss);
  if (!std::isfinite(kron)) err = std::numeric_limits<double>::infinity();
  return {a, b, kron, err};
}

}  // namespace

QuadResult integrate(FunctionRef<double(double)> f, double a, double b,
                     std::span<const double> breakpoints, const QuadOptions& options) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::vector<double> cuts{a};
  const int panels = std::max(1, options.initial_panels);
  for (int i = 1; i < panels; ++i) cuts.push_back(a + (b - a) * i / panels);
  for (double p : breakpoints)
    if (p > std::min(a, b) && p < std::max(a, b)) cuts.push_back(p);
  cuts.push_back(b);
  if (a < b)
    std::sort(cuts.begin(), cuts.end());
  else
    std::sort(cuts.begin(), cuts.end(), std::greater<>());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Segment> heap;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Segment s = apply_rule(f, cuts[i], cuts[i + 1]);
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }

  auto target = [&] { return std::max(options.abs_tol, options.rel_tol * std::abs(total)); };
  while (total_err > target() && static_cast<int>(heap.size()) < options.max_intervals) {
    Segment worst = heap.top();
    if (!std::isfinite(worst.value)) break;
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) break;  // interval exhausted at machine resolution
    heap.pop();
    Segment left = apply_rule(f, worst.a, mid);
    Segment right = apply_rule(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from scratch to shed the running-sum rounding drift.
  total = 0.0;
  total_err = 0.0;
  out.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  out.converged = std::isfinite(total) && total_err <= target();
  return out;
}

QuadResult integrate(FunctionRef<double(double)> f, double a, double b,
                     const QuadOptions& options) {
  return integrate(f, a, b, std::span<const double>{}, options);
}

double integrate_or_throw(FunctionRef<double(double)> f, double a, double b,
                          const QuadOptions& options, const char* what) {
  const QuadResult r = integrate(f, a, b, options);
  if (!r.converged)
    throw Error(Errc::integrability, std::string(what) + ": adaptive quadrature did not converge (estimate " +
                                         std::to_string(r.value) + ", error " +
                                         std::to_string(r.error) + ")");
  return r.value;
}

}  // namespace nevlab
