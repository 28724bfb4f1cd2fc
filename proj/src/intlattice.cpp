// SPDX-License-Identifier: Apache-2.0
#include "nekho/intlattice.hpp"

#include <algorithm>
#include <numeric>

namespace nekho::intlattice {

namespace {

using i128 = __int128;
using Row = std::vector<i128>;

std::int64_t narrow(i128 v) {
  if (v > static_cast<i128>(INT64_MAX) || v < static_cast<i128>(INT64_MIN))
    throw Error(ErrorCode::Numerical, "integer overflow in lattice arithmetic");
  return static_cast<std::int64_t>(v);
}

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// g = x a + y b
void ext_gcd(i128 a, i128 b, i128& g, i128& x, i128& y) {
  i128 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
  while (b != 0) {
    i128 q = a / b;
    i128 t = a - q * b;
    a = b;
    b = t;
    t = x0 - q * x1;
    x0 = x1;
    x1 = t;
    t = y0 - q * y1;
    y0 = y1;
    y1 = t;
  }
  g = a;
  x = x0;
  y = y0;
  if (g < 0) {
    g = -g;
    x = -x;
    y = -y;
  }
}

std::vector<Row> to_rows(const std::vector<IVec>& v, int dim) {
  std::vector<Row> rows;
  rows.reserve(v.size());
  for (const auto& r : v) {
    if (r.size() != dim) throw Error(ErrorCode::InvalidArgument, "vector dimension mismatch");
    rows.emplace_back(r.data(), r.data() + dim);
  }
  return rows;
}

IVec from_row(const Row& r) {
  IVec v(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) v[static_cast<Eigen::Index>(i)] = narrow(r[i]);
  return v;
}

}  // namespace

std::vector<IVec> hermite_normal_form(std::vector<IVec> input, int dim) {
  std::vector<Row> a = to_rows(input, dim);
  const std::size_t m = a.size();
  std::size_t pivot_row = 0;
  std::vector<int> pivot_cols;
  for (int c = 0; c < dim && pivot_row < m; ++c) {
    // Combine everything below pivot_row into a single nonzero entry in column c.
    for (std::size_t r = pivot_row + 1; r < m; ++r) {
      if (a[r][c] == 0) continue;
      if (a[pivot_row][c] == 0) {
        std::swap(a[pivot_row], a[r]);
        continue;
      }
      i128 g, x, y;
      const i128 p = a[pivot_row][c], q = a[r][c];
      ext_gcd(p, q, g, x, y);
      const i128 pg = p / g, qg = q / g;
      for (int k = 0; k < dim; ++k) {
        const i128 top = x * a[pivot_row][k] + y * a[r][k];
        const i128 bot = -qg * a[pivot_row][k] + pg * a[r][k];
        a[pivot_row][k] = top;
        a[r][k] = bot;
      }
    }
    if (a[pivot_row][c] == 0) continue;
    if (a[pivot_row][c] < 0)
      for (auto& e : a[pivot_row]) e = -e;
    const i128 piv = a[pivot_row][c];
    for (std::size_t r = 0; r < pivot_row; ++r) {
      i128 q = a[r][c] / piv;
      if (a[r][c] - q * piv < 0) --q;
      if (q != 0)
        for (int k = 0; k < dim; ++k) a[r][k] -= q * a[pivot_row][k];
    }
    pivot_cols.push_back(c);
    ++pivot_row;
  }
  std::vector<IVec> out;
  for (std::size_t r = 0; r < pivot_row; ++r) out.push_back(from_row(a[r]));
  return out;
}

int rank(const std::vector<IVec>& rows, int dim) {
  return static_cast<int>(hermite_normal_form(rows, dim).size());
}

std::vector<IVec> kernel(const std::vector<IVec>& rows_in, int dim) {
  std::vector<Row> a = to_rows(rows_in, dim);
  // Column operations on A mirrored on U = I, so that A U stays in echelon form.
  std::vector<Row> u(static_cast<std::size_t>(dim), Row(static_cast<std::size_t>(dim), 0));
  for (int i = 0; i < dim; ++i) u[i][i] = 1;
  auto col_op = [&](int c1, int c2, i128 x, i128 y, i128 s, i128 t) {
    // new c1 = x c1 + y c2, new c2 = s c1 + t c2 (unimodular when xt - ys = ±1)
    for (auto& row : a) {
      const i128 p = row[c1], q = row[c2];
      row[c1] = x * p + y * q;
      row[c2] = s * p + t * q;
    }
    for (auto& row : u) {
      const i128 p = row[c1], q = row[c2];
      row[c1] = x * p + y * q;
      row[c2] = s * p + t * q;
    }
  };
  int pivot = 0;
  for (std::size_t r = 0; r < a.size() && pivot < dim; ++r) {
    for (int c = pivot + 1; c < dim; ++c) {
      if (a[r][c] == 0) continue;
      if (a[r][pivot] == 0) {
        col_op(pivot, c, 0, 1, 1, 0);
        continue;
      }
      i128 g, x, y;
      const i128 p = a[r][pivot], q = a[r][c];
      ext_gcd(p, q, g, x, y);
      col_op(pivot, c, x, y, -q / g, p / g);
    }
    if (a[r][pivot] != 0) ++pivot;
  }
  std::vector<IVec> basis;
  for (int c = pivot; c < dim; ++c) {
    IVec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = narrow(u[i][c]);
    basis.push_back(v);
  }
  return basis;
}

std::int64_t determinant(const std::vector<IVec>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) return 1;
  std::vector<Row> a = to_rows(rows, static_cast<int>(n));
  // Bareiss fraction-free elimination.
  i128 sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t sw = k + 1;
      while (sw < n && a[sw][k] == 0) ++sw;
      if (sw == n) return 0;
      std::swap(a[k], a[sw]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return narrow(sign * a[n - 1][n - 1]);
}

std::int64_t maximal_minor_gcd(const std::vector<IVec>& rows, int dim) {
  const std::vector<IVec> h = hermite_normal_form(rows, dim);
  const int s = static_cast<int>(h.size());
  if (s == 0) return 1;
  std::vector<int> cols(static_cast<std::size_t>(s));
  std::iota(cols.begin(), cols.end(), 0);
  i128 g = 0;
  while (true) {
    std::vector<IVec> sub;
    for (const auto& r : h) {
      IVec v(s);
      for (int i = 0; i < s; ++i) v[i] = r[cols[static_cast<std::size_t>(i)]];
      sub.push_back(v);
    }
    g = gcd128(g, determinant(sub));
    int i = s - 1;
    while (i >= 0 && cols[static_cast<std::size_t>(i)] == dim - s + i) --i;
    if (i < 0) break;
    ++cols[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < s; ++j)
      cols[static_cast<std::size_t>(j)] = cols[static_cast<std::size_t>(j - 1)] + 1;
  }
  return narrow(g);
}

}  // namespace nekho::intlattice
