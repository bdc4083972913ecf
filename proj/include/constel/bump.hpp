#ifndef CONSTEL_BUMP_HPP
#define CONSTEL_BUMP_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace constel {

// Even cutoff function supported on [-1, 1] with value 1 at the origin.
// `deriv` is the analytic derivative where one exists; sampled bumps use
// exact segment slopes, so quadrature sees the true piecewise structure.
struct BumpFunction {
  enum class Kind { smooth_standard, triangle, user_sampled };
  Kind kind = Kind::triangle;
  std::function<double(double)> eval;
  std::function<double(double)> deriv;

  double operator()(double x) const { return eval(x); }

  static BumpFunction smooth_standard() {
    BumpFunction b;
    b.kind = Kind::smooth_standard;
    b.eval = [](double x) {
      double ax = std::fabs(x);
      if (ax >= 1.0) return 0.0;
      return std::exp(1.0 - 1.0 / (1.0 - x * x));
    };
    b.deriv = [ev = b.eval](double x) {
      double ax = std::fabs(x);
      if (ax >= 1.0) return 0.0;
      double d = 1.0 - x * x;
      return ev(x) * (-2.0 * x / (d * d));
    };
    return b;
  }

  static BumpFunction triangle() {
    BumpFunction b;
    b.kind = Kind::triangle;
    b.eval = [](double x) { return std::max(1.0 - std::fabs(x), 0.0); };
    b.deriv = [](double x) {
      double ax = std::fabs(x);
      if (ax >= 1.0) return 0.0;
      if (x == 0.0) return 0.0;
      return x > 0 ? -1.0 : 1.0;
    };
    return b;
  }

  // Piecewise-linear interpolation through (x, value) nodes; zero outside the
  // node range, which must sit inside [-1, 1] and contain x = 0 with value 1.
  static BumpFunction user_sampled(std::vector<std::pair<double, double>> nodes) {
    if (nodes.size() < 2) throw std::invalid_argument("need at least two sample nodes");
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (nodes[i].first == nodes[i - 1].first)
        throw std::invalid_argument("duplicate sample abscissa");
    if (nodes.front().first < -1.0 || nodes.back().first > 1.0)
      throw std::invalid_argument("sample nodes must lie in [-1, 1]");
    BumpFunction b;
    b.kind = Kind::user_sampled;
    auto shared = std::make_shared<std::vector<std::pair<double, double>>>(std::move(nodes));
    b.eval = [shared](double x) {
      const auto& ns = *shared;
      if (x <= ns.front().first || x >= ns.back().first) {
        if (x == ns.front().first) return ns.front().second;
        if (x == ns.back().first) return ns.back().second;
        return 0.0;
      }
      auto it = std::upper_bound(ns.begin(), ns.end(), std::make_pair(x, 1e300));
      auto lo = *(it - 1);
      auto hi = *it;
      double t = (x - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    };
    b.deriv = [shared](double x) {
      const auto& ns = *shared;
      if (x <= ns.front().first || x >= ns.back().first) return 0.0;
      auto it = std::upper_bound(ns.begin(), ns.end(), std::make_pair(x, 1e300));
      auto lo = *(it - 1);
      auto hi = *it;
      return (hi.second - lo.second) / (hi.first - lo.first);
    };
    return b;
  }
};

namespace detail {
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 48) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}
}  // namespace detail

// Integral of the squared derivative over the positive half-line, i.e. over
// (0, 1] because the support ends at 1. `resolution` sets the finite-difference
// step when no analytic derivative is attached; that path integrates to a
// coarser tolerance because difference quotients carry rounding noise that a
// tight refinement loop would chase forever.
inline double derivative_energy(const BumpFunction& phi, long long resolution = 1 << 20) {
  std::function<double(double)> d = phi.deriv;
  double tol = 1e-14;
  int depth = 48;
  if (!d) {
    double h = 1.0 / static_cast<double>(resolution);
    d = [&phi, h](double x) { return (phi.eval(x + h) - phi.eval(x - h)) / (2.0 * h); };
    tol = 1e-9;
    depth = 24;
  }
  auto integrand = [&d](double x) {
    double v = d(x);
    return v * v;
  };
  // Split at interior panel boundaries so kinks at sample nodes are isolated.
  double total = 0.0;
  const int panels = 8;
  for (int k = 0; k < panels; ++k) {
    double a = static_cast<double>(k) / panels;
    double b = static_cast<double>(k + 1) / panels;
    total += detail::adaptive_simpson(integrand, a, b, tol / panels, depth);
  }
  return total;
}

}  // namespace constel

#endif
