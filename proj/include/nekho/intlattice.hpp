// SPDX-License-Identifier: Apache-2.0
//
// Exact integer linear algebra on small sublattices of Z^d.

#pragma once

#include "nekho/core.hpp"

#include <vector>

namespace nekho::intlattice {

/// Row Hermite normal form of the lattice spanned by `rows` (zero rows dropped).
/// Pivots are positive and entries above each pivot lie in [0, pivot).
std::vector<IVec> hermite_normal_form(std::vector<IVec> rows, int dim);

/// Rank over Q.
int rank(const std::vector<IVec>& rows, int dim);

/// Basis of {x in Z^d : r.x = 0 for every row r}; always saturated.
std::vector<IVec> kernel(const std::vector<IVec>& rows, int dim);

/// gcd of all maximal (rank x rank) minors of the row matrix; 1 iff the
/// lattice is saturated (Smith invariants all ones).
std::int64_t maximal_minor_gcd(const std::vector<IVec>& rows, int dim);

/// Exact determinant of a small square integer matrix given as rows.
std::int64_t determinant(const std::vector<IVec>& rows);

}  // namespace nekho::intlattice
