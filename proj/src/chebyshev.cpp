// SPDX-License-Identifier: Apache-2.0
#include "nekho/chebyshev.hpp"

#include "nekho/core.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>

namespace nekho {

namespace {

// Coefficients of d/dt of a Chebyshev series on [-1, 1].
std::vector<double> differentiate(const std::vector<double>& c) {
  const std::size_t n = c.size();
  if (n <= 1) return {0.0};
  // d_{k-1} = d_{k+1} + 2k c_k, then halve d_0.
  std::vector<double> e(n + 1, 0.0);
  for (std::size_t k = n - 1; k >= 1; --k) e[k - 1] = e[k + 1] + 2.0 * static_cast<double>(k) * c[k];
  e[0] *= 0.5;
  e.resize(n - 1);
  return e;
}

}  // namespace

Chebyshev::Chebyshev(const std::function<double(double)>& f, double lo, double hi, int nodes)
    : lo_(lo), hi_(hi) {
  if (nodes < 2 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "bad Chebyshev interval");
  const double pi = boost::math::constants::pi<double>();
  const auto n = static_cast<std::size_t>(nodes);
  std::vector<double> fv(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = std::cos(pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
    fv[j] = f(0.5 * (hi + lo) + 0.5 * (hi - lo) * t);
  }
  c_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      s += fv[j] * std::cos(pi * static_cast<double>(k) * (static_cast<double>(j) + 0.5) /
                            static_cast<double>(n));
    c_[k] = 2.0 * s / static_cast<double>(n);
  }
  c_[0] *= 0.5;
  std::vector<double> cur = c_;
  const double scale = 2.0 / (hi - lo);
  for (int order = 1; order <= 4; ++order) {
    cur = differentiate(cur);
    for (auto& v : cur) v *= scale;
    deriv_.push_back(cur);
  }
}

double Chebyshev::eval(const std::vector<double>& c, double x) const {
  const double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

double Chebyshev::derivative(double x, int n) const {
  if (n == 0) return eval(c_, x);
  if (n < 0 || n > static_cast<int>(deriv_.size()))
    throw Error(ErrorCode::InvalidArgument, "derivative order out of range");
  return eval(deriv_[static_cast<std::size_t>(n - 1)], x);
}

double Chebyshev::tail() const {
  double t = 0.0;
  const std::size_t n = c_.size();
  for (std::size_t k = n > 3 ? n - 3 : 0; k < n; ++k) t = std::max(t, std::abs(c_[k]));
  return t;
}

}  // namespace nekho
