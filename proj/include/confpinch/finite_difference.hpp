#pragma once

// Fourth-order central difference stencils.

#include <Eigen/Dense>

#include <type_traits>

namespace confpinch::fd {

/// f'(x) ~ (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / (12 h).
/// `at(s)` evaluates the function at offset s along the differentiation direction.
template <class At>
auto first(At&& at, double h) {
  auto p2 = at(2.0 * h);
  auto p1 = at(h);
  auto m1 = at(-h);
  auto m2 = at(-2.0 * h);
  // Materialize before returning so expression templates never outlive the samples.
  std::decay_t<decltype(p1)> r = (1.0 / (12.0 * h)) * ((m2 - p2) + 8.0 * (p1 - m1));
  return r;
}

/// f''(x) ~ (-f(x+2h) + 16 f(x+h) - 30 f(x) + 16 f(x-h) - f(x-2h)) / (12 h^2).
template <class At>
auto second(At&& at, double h) {
  auto p2 = at(2.0 * h);
  auto p1 = at(h);
  auto z = at(0.0);
  auto m1 = at(-h);
  auto m2 = at(-2.0 * h);
  std::decay_t<decltype(p1)> r = (1.0 / (12.0 * h * h)) * (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * z);
  return r;
}

}  // namespace confpinch::fd
