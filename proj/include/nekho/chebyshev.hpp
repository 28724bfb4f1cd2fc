// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

namespace nekho {

/// Chebyshev interpolant on [lo, hi] through first-kind nodes, with exact
/// derivatives of the interpolant.
class Chebyshev {
 public:
  Chebyshev() = default;
  Chebyshev(const std::function<double(double)>& f, double lo, double hi, int nodes);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& coefficients() const { return c_; }

  double operator()(double x) const { return eval(c_, x); }
  /// n-th derivative of the interpolant.
  double derivative(double x, int n = 1) const;
  /// Magnitude of the trailing coefficients, a cheap truncation-error proxy.
  double tail() const;

 private:
  double eval(const std::vector<double>& c, double x) const;

  double lo_ = -1.0, hi_ = 1.0;
  std::vector<double> c_;
  std::vector<std::vector<double>> deriv_;  // cached derivative series
};

}  // namespace nekho
