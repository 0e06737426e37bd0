#pragma once

#include <cmath>
#include <cstddef>

namespace stkrr {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Golden-section search for a minimum of `f` on [a, b]. Stops once the
/// bracket is narrower than `tol` or after `max_iterations`. Returns the best
/// point evaluated, including the endpoints.
template <class F>
ScalarMinimum golden_section_minimize(F&& f, double a, double b, double tol, std::size_t max_iterations = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  ScalarMinimum best{a, f(a), 1};
  const auto consider = [&best](double x, double fx) {
    if (fx < best.value || (fx == best.value && x < best.x)) {
      best.x = x;
      best.value = fx;
    }
  };
  consider(b, f(b));
  ++best.evaluations;

  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  best.evaluations += 2;
  consider(c, fc);
  consider(d, fd);

  for (std::size_t it = 0; it < max_iterations && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
    ++best.evaluations;
  }
  return best;
}

}  // namespace stkrr
