#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "roughlab/errors.hpp"

namespace roughlab::quad {

inline constexpr double kDefaultTolerance = 1e-12;

template <class F>
double gauss_panel(const F& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

// Adaptive bisection of 20-point Gauss-Legendre panels. A panel is accepted
// when splitting it changes the estimate by less than its share of abs_tol.
template <class F>
double adaptive(const F& f, double a, double b, double abs_tol = kDefaultTolerance,
                std::size_t max_panels = 1u << 18) {
  if (b == a) return 0.0;
  if (!(b > a)) throw DomainError("quadrature interval must satisfy a <= b");
  struct Panel {
    double lo, hi, estimate;
  };
  const double width = b - a;
  std::vector<Panel> stack;
  stack.push_back({a, b, gauss_panel(f, a, b)});
  double total = 0.0;
  std::size_t processed = 0;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.lo + p.hi);
    const double left = gauss_panel(f, p.lo, mid);
    const double right = gauss_panel(f, mid, p.hi);
    const double refined = left + right;
    const double local_tol = abs_tol * (p.hi - p.lo) / width;
    if (std::abs(refined - p.estimate) <= local_tol || mid <= p.lo || mid >= p.hi) {
      total += refined;
    } else {
      stack.push_back({p.lo, mid, left});
      stack.push_back({mid, p.hi, right});
    }
    if (++processed > max_panels) {
      throw QuadratureError("adaptive quadrature did not converge to tolerance");
    }
    if (!std::isfinite(refined)) throw QuadratureError("non-finite integrand value");
  }
  return total;
}

// Geometric grading toward the left endpoint followed by adaptive panels;
// for integrands with an unbounded derivative at a.
template <class F>
double graded(const F& f, double a, double b, double abs_tol = kDefaultTolerance,
              int levels = 40) {
  if (b == a) return 0.0;
  if (!(b > a)) throw DomainError("quadrature interval must satisfy a <= b");
  const double panel_tol = abs_tol / (levels + 1);
  double total = 0.0;
  double hi = b;
  for (int k = 0; k < levels; ++k) {
    const double lo = a + 0.5 * (hi - a);
    total += adaptive(f, lo, hi, panel_tol);
    hi = lo;
  }
  total += adaptive(f, a, hi, panel_tol);
  return total;
}

}  // namespace roughlab::quad
